use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;

use quadclass::{
    classno, format_params, format_record, parse_range, sweep, to_json_lines, verify_table,
    FixtureSource, HarnessError, TABLE_IDS,
};
use quadclass_core::classgroup::{self, Cutoffs};
use quadclass_core::families::{self, FamilyId, Params};

#[derive(Parser)]
#[command(
    name = "quadclass",
    version,
    about = "Class numbers of quadratic fields and families with 3 | h"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct CutoffArgs {
    /// Largest real discriminant handled.
    #[arg(long = "cutoff", default_value_t = Cutoffs::default().real)]
    real: u64,
    /// Largest |discriminant| handled for imaginary fields.
    #[arg(long = "imag-cutoff", default_value_t = Cutoffs::default().imaginary)]
    imaginary: u64,
}

impl CutoffArgs {
    fn cutoffs(self) -> Cutoffs {
        Cutoffs {
            real: self.real.min(Cutoffs::MAX),
            imaginary: self.imaginary.min(Cutoffs::MAX),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Class number of Q(sqrt n).
    Classno {
        #[arg(allow_hyphen_values = true)]
        n: String,
        #[command(flatten)]
        cutoffs: CutoffArgs,
    },
    /// Generate one family instance and print its certificate.
    Gen {
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
        /// +1 or -1 (also accepts + and -).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
        sign: Option<i64>,
        /// Also compute the class number.
        #[arg(long)]
        class_number: bool,
        #[command(flatten)]
        cutoffs: CutoffArgs,
    },
    /// Recompute a printed table and report discrepancies.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
        table: u8,
        #[command(flatten)]
        cutoffs: CutoffArgs,
        /// One JSON object per line instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Read tableN.csv from this directory instead of the built-in copies.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Check 3 | h over a parameter box.
    Sweep {
        family: String,
        /// name=lo..hi, inclusive; repeat for each parameter.
        #[arg(long = "range", required = true, allow_hyphen_values = true)]
        ranges: Vec<String>,
        #[command(flatten)]
        cutoffs: CutoffArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Print every verified class number.
        #[arg(long)]
        verbose: bool,
    },
}

fn parse_sign(s: &str) -> Result<i64, String> {
    match s {
        "+" | "+1" | "1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(format!("sign must be + or -, got {s:?}")),
    }
}

enum Failure {
    Mismatch,
    Usage(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Classno { n, cutoffs } => {
            let n = BigInt::from_str(n.trim())
                .map_err(|_| Failure::Usage(format!("{n:?} is not an integer")))?;
            let r = classno(&n, &cutoffs.cutoffs())?;
            println!("d = {}", r.d);
            println!("discriminant = {}", r.delta);
            println!("h = {}", r.h);
            println!("method = {}", r.method);
            if let Some(norm) = r.unit_norm {
                println!("h+ = {}", r.h_narrow);
                println!("unit norm = {norm:+}");
            }
            Ok(())
        }
        Command::Gen {
            family,
            m,
            n,
            k,
            p,
            r,
            a,
            b,
            sign,
            class_number,
            cutoffs,
        } => {
            let id = FamilyId::from_str(&family).map_err(|e| Failure::Usage(e.to_string()))?;
            let given = [
                ("m", m),
                ("n", n),
                ("k", k),
                ("p", p),
                ("r", r),
                ("a", a),
                ("b", b),
                ("sign", sign),
            ];
            let mut params = Params::new();
            for (name, value) in given {
                if let Some(v) = value {
                    if !id.params().contains(&name) {
                        return Err(Failure::Usage(format!("{id} takes no --{name}")));
                    }
                    params.insert(name.to_string(), v);
                }
            }
            let inst =
                families::generate(id, &params).map_err(|e| Failure::Usage(e.to_string()))?;
            println!("family = {} ({})", id, id.formula());
            println!("params = {}", format_params(&inst.params));
            println!("raw_d = {}", inst.raw_d);
            println!("d = {}", inst.d);
            println!("certificate = {}", inst.certificate.summary());
            if class_number {
                match classgroup::class_number_with(&inst.d, &cutoffs.cutoffs()) {
                    Ok(res) => println!("h = {} (3 | h: {})", res.h, res.h % 3 == 0),
                    Err(e) => println!("h = - ({e})"),
                }
            }
            Ok(())
        }
        Command::Verify {
            table,
            cutoffs,
            json,
            jobs,
            fixtures,
        } => {
            debug_assert!(TABLE_IDS.contains(&table));
            let source = fixtures.map_or(FixtureSource::Embedded, FixtureSource::Directory);
            let records = verify_table(table, &source, &cutoffs.cutoffs(), jobs)?;
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for rec in &records {
                *counts.entry(rec.status.as_str()).or_default() += 1;
                if json {
                    for v in to_json_lines(rec) {
                        println!("{v}");
                    }
                } else {
                    for line in format_record(rec) {
                        println!("{line}");
                    }
                }
            }
            if !json {
                let tally: Vec<String> = counts.iter().map(|(s, c)| format!("{s}: {c}")).collect();
                println!(
                    "table {table}: {} rows; {}",
                    records.len(),
                    tally.join(", ")
                );
            }
            if records.iter().all(|r| r.status.is_clean()) {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
        Command::Sweep {
            family,
            ranges,
            cutoffs,
            jobs,
            verbose,
        } => {
            let id = FamilyId::from_str(&family).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut map = BTreeMap::new();
            for spec in &ranges {
                let (name, range) = parse_range(spec)?;
                map.insert(name, range);
            }
            let s = sweep(id, &map, &cutoffs.cutoffs(), jobs)?;
            if verbose {
                for (params, d, h) in &s.class_numbers {
                    println!("{}  d={d}  h={h}", format_params(params));
                }
            }
            for c in &s.counterexamples {
                println!(
                    "COUNTEREXAMPLE {}  d={}  h={}",
                    format_params(&c.params),
                    c.d,
                    c.h
                );
            }
            for f in &s.certificate_failures {
                println!(
                    "CERTIFICATE_FAILURE {}  {}",
                    format_params(&f.params),
                    f.check
                );
            }
            println!(
                "{id}: verified {}, skipped {}, rejected {}, counterexamples {}, certificate failures {}",
                s.verified,
                s.skipped,
                s.rejected,
                s.counterexamples.len(),
                s.certificate_failures.len()
            );
            if s.is_clean() {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
    }
}
