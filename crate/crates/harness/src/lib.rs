//! Table verification, parameter sweeps and class-number queries.
//!
//! Fixtures are CSV transcriptions of the printed tables, typos included.
//! [`verify_table`] regenerates every row from its parameters and reports
//! how the printed `d` and `h` compare with the recomputed ones.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use quadclass_core::classgroup::{self, ClassGroupError, ClassNumberResult, Cutoffs};
use quadclass_core::families::{self, Divisibility, FamilyError, FamilyId, FamilyInstance, Params};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: line {line}: {msg}")]
    Fixture {
        path: String,
        line: u64,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no table {0} (tables are numbered 1 to 7)")]
    UnknownTable(u8),
    #[error("bad range {0:?}: expected name=lo..hi")]
    BadRange(String),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    ClassGroup(#[from] ClassGroupError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub const TABLE_IDS: std::ops::RangeInclusive<u8> = 1..=7;

const EMBEDDED: [&str; 7] = [
    include_str!("../fixtures/table1.csv"),
    include_str!("../fixtures/table2.csv"),
    include_str!("../fixtures/table3.csv"),
    include_str!("../fixtures/table4.csv"),
    include_str!("../fixtures/table5.csv"),
    include_str!("../fixtures/table6.csv"),
    include_str!("../fixtures/table7.csv"),
];

/// The family whose examples a table lists.
pub fn table_family(table: u8) -> Result<FamilyId> {
    Ok(match table {
        1 => FamilyId::Thm2_1,
        2 => FamilyId::Thm2_2,
        3 => FamilyId::Thm2_3,
        4 => FamilyId::Thm2_4,
        5 => FamilyId::Thm2_5,
        6 => FamilyId::Thm3_1I,
        7 => FamilyId::Thm3_2,
        other => return Err(HarnessError::UnknownTable(other)),
    })
}

/// Extra parameter distinguishing the printed pairs of a two-pair table.
fn pair_param(table: u8, index: usize) -> Option<(&'static str, i64)> {
    match (table, index) {
        (2, 0) => Some(("sign", 1)),
        (2, _) => Some(("sign", -1)),
        (3, 0) => Some(("r", -2)),
        (3, _) => Some(("r", 4)),
        _ => None,
    }
}

fn pair_count(table: u8) -> usize {
    if matches!(table, 2 | 3) {
        2
    } else {
        1
    }
}

/// One printed `(d, h)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Printed {
    pub d: BigInt,
    pub h: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub table: u8,
    /// 1-based line in the fixture file.
    pub line: u64,
    pub params: Params,
    pub printed: Printed,
    /// Second pair of Tables 2 and 3.
    pub second: Option<Printed>,
}

impl TableRow {
    pub fn pairs(&self) -> impl Iterator<Item = &Printed> {
        std::iter::once(&self.printed).chain(self.second.as_ref())
    }

    /// Parameters for the `index`-th pair, including the implied sign or `r`.
    pub fn pair_params(&self, index: usize) -> Params {
        let mut p = self.params.clone();
        if let Some((name, value)) = pair_param(self.table, index) {
            p.insert(name.to_string(), value);
        }
        p
    }
}

/// Parses a fixture. `table` fixes the expected columns.
pub fn parse_fixture(table: u8, text: &str, path: &str) -> Result<Vec<TableRow>> {
    let family = table_family(table)?;
    let fail = |line: u64, msg: String| HarnessError::Fixture {
        path: path.to_string(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| fail(e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    let header_line = text
        .lines()
        .position(|l| !l.trim_start().starts_with('#'))
        .map_or(1, |i| i as u64 + 1);

    let pairs = pair_count(table);
    let value_cols: Vec<String> = if pairs == 1 {
        vec!["d".into(), "h".into()]
    } else {
        vec!["d1".into(), "h1".into(), "d2".into(), "h2".into()]
    };
    let param_names: Vec<&str> = family
        .params()
        .iter()
        .copied()
        .filter(|p| pair_param(table, 0).is_none_or(|(name, _)| name != *p))
        .collect();
    let expected: Vec<&str> = param_names
        .iter()
        .copied()
        .chain(value_cols.iter().map(String::as_str))
        .collect();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(fail(
            header_line,
            format!(
                "expected columns {}, found {}",
                expected.join(","),
                got.join(",")
            ),
        ));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| fail(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let int = |i: usize| -> Result<i64> {
            field(i).parse().map_err(|_| {
                fail(
                    line,
                    format!("column {}: {:?} is not an integer", expected[i], field(i)),
                )
            })
        };
        let mut params = Params::new();
        for (i, name) in param_names.iter().enumerate() {
            params.insert(name.to_string(), int(i)?);
        }
        let base = param_names.len();
        let mut printed = Vec::with_capacity(pairs);
        for k in 0..pairs {
            let (di, hi) = (base + 2 * k, base + 2 * k + 1);
            let d = BigInt::from_str(field(di)).map_err(|_| {
                fail(
                    line,
                    format!("column {}: {:?} is not an integer", expected[di], field(di)),
                )
            })?;
            let h = field(hi)
                .parse::<u64>()
                .ok()
                .filter(|h| *h > 0)
                .ok_or_else(|| {
                    fail(
                        line,
                        format!(
                            "column {}: {:?} is not a positive integer",
                            expected[hi],
                            field(hi)
                        ),
                    )
                })?;
            printed.push(Printed { d, h });
        }
        let mut printed = printed.into_iter();
        rows.push(TableRow {
            table,
            line,
            params,
            printed: printed.next().expect("at least one pair"),
            second: printed.next(),
        });
    }
    Ok(rows)
}

/// Loads a fixture file from disk.
pub fn load_fixture(table: u8, path: &Path) -> Result<Vec<TableRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fixture(table, &text, &path.display().to_string())
}

/// Where table fixtures come from.
#[derive(Debug, Clone, Default)]
pub enum FixtureSource {
    #[default]
    Embedded,
    Directory(PathBuf),
}

impl FixtureSource {
    pub fn load(&self, table: u8) -> Result<Vec<TableRow>> {
        table_family(table)?;
        match self {
            FixtureSource::Embedded => parse_fixture(
                table,
                EMBEDDED[table as usize - 1],
                &format!("fixtures/table{table}.csv"),
            ),
            FixtureSource::Directory(dir) => {
                load_fixture(table, &dir.join(format!("table{table}.csv")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Ok,
    DMismatch,
    HMismatch,
    BothMismatch,
    SkippedSize,
    ParamReject,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::DMismatch => "D_MISMATCH",
            Status::HMismatch => "H_MISMATCH",
            Status::BothMismatch => "BOTH_MISMATCH",
            Status::SkippedSize => "SKIPPED_SIZE",
            Status::ParamReject => "PARAM_REJECT",
        }
    }

    /// True for the statuses that leave the exit code at zero.
    pub fn is_clean(self) -> bool {
        matches!(self, Status::Ok | Status::SkippedSize)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome for a single printed pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub params: Params,
    pub printed: Printed,
    pub raw_d: Option<BigInt>,
    pub d: Option<BigInt>,
    /// Class number of the recomputed field, when within the cutoff.
    pub h: Option<u64>,
    /// Class number of the field named by the printed `d`, computed only on a `d` mismatch.
    pub printed_field_h: Option<u64>,
    pub status: Status,
    pub certificate: Option<String>,
    pub note: Option<String>,
}

impl PairRecord {
    pub fn h_agrees(&self) -> Option<bool> {
        self.h.map(|h| h == self.printed.h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationRecord {
    pub row: TableRow,
    pub pairs: Vec<PairRecord>,
    pub status: Status,
}

impl VerificationRecord {
    pub fn computed_raw_d(&self) -> Option<&BigInt> {
        self.pairs[0].raw_d.as_ref()
    }

    pub fn computed_d(&self) -> Option<&BigInt> {
        self.pairs[0].d.as_ref()
    }

    pub fn computed_h(&self) -> Option<u64> {
        self.pairs[0].h
    }
}

fn class_number_within(
    n: &BigInt,
    cutoffs: &Cutoffs,
) -> std::result::Result<Option<u64>, ClassGroupError> {
    match classgroup::class_number_with(n, cutoffs) {
        Ok(r) => Ok(Some(r.h)),
        Err(ClassGroupError::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn verify_pair(id: FamilyId, params: Params, printed: &Printed, cutoffs: &Cutoffs) -> PairRecord {
    let mut rec = PairRecord {
        params,
        printed: printed.clone(),
        raw_d: None,
        d: None,
        h: None,
        printed_field_h: None,
        status: Status::ParamReject,
        certificate: None,
        note: None,
    };
    let inst = match families::generate(id, &rec.params) {
        Ok(inst) => inst,
        Err(e) => {
            rec.note = Some(e.to_string());
            return rec;
        }
    };
    rec.certificate = Some(inst.certificate.summary());
    let d_ok = inst.raw_d == printed.d;
    rec.raw_d = Some(inst.raw_d);
    rec.d = Some(inst.d.clone());
    match class_number_within(&inst.d, cutoffs) {
        Ok(h) => rec.h = h,
        Err(e) => rec.note = Some(e.to_string()),
    }
    if !d_ok {
        rec.status = Status::DMismatch;
        rec.printed_field_h = class_number_within(&printed.d, cutoffs).ok().flatten();
        return rec;
    }
    rec.status = match rec.h {
        Some(h) if h == printed.h => Status::Ok,
        Some(_) => Status::HMismatch,
        None => Status::SkippedSize,
    };
    rec
}

fn combine(statuses: &[Status]) -> Status {
    let has = |s| statuses.contains(&s);
    if has(Status::DMismatch) && has(Status::HMismatch) {
        Status::BothMismatch
    } else {
        [
            Status::DMismatch,
            Status::HMismatch,
            Status::ParamReject,
            Status::SkippedSize,
        ]
        .into_iter()
        .find(|s| has(*s))
        .unwrap_or(Status::Ok)
    }
}

/// Regenerates one row and compares it with the printed values.
pub fn verify_row(row: &TableRow, cutoffs: &Cutoffs) -> Result<VerificationRecord> {
    let id = table_family(row.table)?;
    let pairs: Vec<PairRecord> = row
        .pairs()
        .enumerate()
        .map(|(i, printed)| verify_pair(id, row.pair_params(i), printed, cutoffs))
        .collect();
    let status = combine(&pairs.iter().map(|p| p.status).collect::<Vec<_>>());
    Ok(VerificationRecord {
        row: row.clone(),
        pairs,
        status,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Verifies every row of a table. Records come back in fixture order.
pub fn verify_rows(
    rows: &[TableRow],
    cutoffs: &Cutoffs,
    jobs: usize,
) -> Result<Vec<VerificationRecord>> {
    pool(jobs)?.install(|| rows.par_iter().map(|r| verify_row(r, cutoffs)).collect())
}

pub fn verify_table(
    table: u8,
    source: &FixtureSource,
    cutoffs: &Cutoffs,
    jobs: usize,
) -> Result<Vec<VerificationRecord>> {
    let rows = source.load(table)?;
    verify_rows(&rows, cutoffs, jobs)
}

/// An instance whose proof-side checks passed but whose class number is prime to 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub params: Params,
    pub d: BigInt,
    pub h: u64,
}

/// Parameters that satisfy the stated hypotheses but fail a proof-side check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateFailure {
    pub params: Params,
    pub check: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub verified: u64,
    pub skipped: u64,
    pub rejected: u64,
    pub counterexamples: Vec<Counterexample>,
    pub certificate_failures: Vec<CertificateFailure>,
    /// `(d, h)` for every verified instance, in sweep order.
    pub class_numbers: Vec<(Params, BigInt, u64)>,
}

impl SweepSummary {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty() && self.certificate_failures.is_empty()
    }
}

/// Parses `name=lo..hi` (inclusive).
pub fn parse_range(spec: &str) -> Result<(String, RangeInclusive<i64>)> {
    let bad = || HarnessError::BadRange(spec.to_string());
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = match range.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (range, range),
    };
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    let name = name.trim();
    if name.is_empty() {
        return Err(bad());
    }
    Ok((name.to_string(), lo..=hi))
}

/// Every parameter combination in the ranges, in lexicographic order of names.
fn grid(id: FamilyId, ranges: &BTreeMap<String, RangeInclusive<i64>>) -> Result<Vec<Params>> {
    for name in ranges.keys() {
        if !id.params().contains(&name.as_str()) {
            return Err(HarnessError::BadRange(format!(
                "{name} is not a parameter of {id}"
            )));
        }
    }
    let mut out = vec![Params::new()];
    for name in id.params() {
        let range = ranges
            .get(*name)
            .ok_or(FamilyError::MissingParam { family: id, name })?;
        out = out
            .into_iter()
            .flat_map(|p| {
                range.clone().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.to_string(), v);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

enum Outcome {
    Verified(Params, BigInt, u64),
    Counterexample(Counterexample),
    Skipped,
    Rejected,
    CertificateFailure(CertificateFailure),
}

fn sweep_one(id: FamilyId, params: Params, cutoffs: &Cutoffs) -> Result<Outcome> {
    let inst: FamilyInstance = match families::generate(id, &params) {
        Ok(i) => i,
        Err(FamilyError::Param { .. } | FamilyError::Excluded { .. }) => {
            return Ok(Outcome::Rejected)
        }
        Err(FamilyError::Certificate { check, .. }) => {
            return Ok(Outcome::CertificateFailure(CertificateFailure {
                params,
                check,
            }))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(match families::verify_divisibility(&inst, cutoffs)? {
        Divisibility::Checked { h, divisible: true } => Outcome::Verified(params, inst.d, h),
        Divisibility::Checked {
            h,
            divisible: false,
        } => Outcome::Counterexample(Counterexample {
            params,
            d: inst.d,
            h,
        }),
        Divisibility::Skipped { .. } => Outcome::Skipped,
    })
}

/// Generates every admissible instance in the ranges and checks `3 | h`.
pub fn sweep(
    id: FamilyId,
    ranges: &BTreeMap<String, RangeInclusive<i64>>,
    cutoffs: &Cutoffs,
    jobs: usize,
) -> Result<SweepSummary> {
    let points = grid(id, ranges)?;
    let outcomes: Vec<Outcome> = pool(jobs)?.install(|| {
        points
            .into_par_iter()
            .map(|p| sweep_one(id, p, cutoffs))
            .collect::<Result<_>>()
    })?;
    let mut s = SweepSummary::default();
    for o in outcomes {
        match o {
            Outcome::Verified(p, d, h) => {
                s.verified += 1;
                s.class_numbers.push((p, d, h));
            }
            Outcome::Counterexample(c) => s.counterexamples.push(c),
            Outcome::Skipped => s.skipped += 1,
            Outcome::Rejected => s.rejected += 1,
            Outcome::CertificateFailure(f) => s.certificate_failures.push(f),
        }
    }
    Ok(s)
}

/// Class number of `Q(sqrt n)`.
pub fn classno(n: &BigInt, cutoffs: &Cutoffs) -> Result<ClassNumberResult> {
    Ok(classgroup::class_number_with(n, cutoffs)?)
}

pub fn format_params(p: &Params) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn json_int(n: &BigInt) -> serde_json::Value {
    match i64::try_from(n) {
        Ok(v) => v.into(),
        Err(_) => n.to_string().into(),
    }
}

/// One JSON object per printed pair.
pub fn to_json_lines(rec: &VerificationRecord) -> Vec<serde_json::Value> {
    rec.pairs
        .iter()
        .map(|p| {
            serde_json::json!({
                "table": rec.row.table,
                "line": rec.row.line,
                "params": p.params,
                "printed_d": json_int(&p.printed.d),
                "printed_h": p.printed.h,
                "raw_d": p.raw_d.as_ref().map(json_int),
                "d": p.d.as_ref().map(json_int),
                "h": p.h,
                "h_agrees": p.h_agrees(),
                "printed_field_h": p.printed_field_h,
                "status": p.status.as_str(),
                "row_status": rec.status.as_str(),
                "certificate": p.certificate,
                "note": p.note,
            })
        })
        .collect()
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Human-readable lines for a verification record.
pub fn format_record(rec: &VerificationRecord) -> Vec<String> {
    rec.pairs
        .iter()
        .map(|p| {
            let mut line = format!(
                "{:<13} {:<22} printed d={} h={}  computed raw_d={} d={} h={}",
                p.status.as_str(),
                format_params(&p.params),
                p.printed.d,
                p.printed.h,
                opt(&p.raw_d),
                opt(&p.d),
                opt(&p.h),
            );
            if p.status == Status::DMismatch {
                line.push_str(&format!("  h(printed d)={}", opt(&p.printed_field_h)));
            }
            if let Some(note) = &p.note {
                line.push_str(&format!("  ({note})"));
            }
            line
        })
        .collect()
}
