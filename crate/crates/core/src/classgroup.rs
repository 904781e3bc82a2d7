//! Class numbers of quadratic fields from binary quadratic forms.
//!
//! Imaginary fields: count reduced positive-definite forms, with the finite
//! character sum of the class number formula as an independent check.
//!
//! Real fields: the reduction operator `rho` permutes the reduced indefinite
//! forms of discriminant `delta`, one cycle per narrow class. Every narrow
//! class properly represents some `|n| <= sqrt(delta / 5)` (Markov), and any
//! form whose leading coefficient is below `sqrt(delta) / 2` translates to a
//! reduced one with the same leading coefficient, so every cycle passes
//! through a reduced form with `|a| <= sqrt(delta / 5)`. Only those forms are
//! enumerated; each unseen one seeds a cycle walk. The narrow class number is
//! halved when the fundamental unit has norm +1.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::arith::{self, isqrt_u128, kronecker_i64};
use crate::quadfield::{self, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassGroupError {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(BigInt),
    #[error("discriminant {0} has the wrong sign for this engine")]
    WrongSign(BigInt),
    #[error("discriminant {0} is a perfect square")]
    PerfectSquare(BigInt),
    #[error("|discriminant| {delta} exceeds the configured cutoff {cutoff}")]
    TooLarge { delta: BigInt, cutoff: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, ClassGroupError>;

/// Size limits on `|delta|` beyond which the engines refuse to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoffs {
    pub real: u64,
    pub imaginary: u64,
}

impl Cutoffs {
    /// Hard ceiling: every intermediate quantity must fit in `i64`.
    pub const MAX: u64 = 1 << 60;
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            real: 1_000_000_000_000,
            imaginary: 10_000_000_000,
        }
    }
}

/// The form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i128 {
        (self.b as i128) * (self.b as i128) - 4 * (self.a as i128) * (self.c as i128)
    }

    pub fn is_reduced_imaginary(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    /// Reduced in the indefinite sense, with `isqrt_delta = floor(sqrt(delta))`
    /// for a non-square `delta`: `0 < b < sqrt(delta)` and
    /// `sqrt(delta) - b < 2|a| < sqrt(delta) + b`.
    pub fn is_reduced_real(&self, isqrt_delta: i64) -> bool {
        let s = isqrt_delta;
        let twice_a = 2 * self.a.abs();
        self.b >= 1 && self.b <= s && s - self.b < twice_a && twice_a <= s + self.b
    }

    /// One reduction step `(a, b, c) -> (c, b', c')` on reduced indefinite
    /// forms, with `b' = -b (mod 2c)` and `sqrt(delta) - 2|c| < b' < sqrt(delta)`.
    pub fn rho(&self, delta: i64, isqrt_delta: i64) -> QuadForm {
        let s = isqrt_delta;
        let m = 2 * self.c.abs();
        let b_next = s - (s + self.b).rem_euclid(m);
        let c_next =
            ((b_next as i128 * b_next as i128 - delta as i128) / (4 * self.c as i128)) as i64;
        QuadForm::new(self.c, b_next, c_next)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FormCount,
    FormCycles,
    AnalyticOracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FormCount => "form-count",
            Method::FormCycles => "form-cycles",
            Method::AnalyticOracle => "analytic-oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNumberResult {
    pub d: BigInt,
    pub delta: BigInt,
    pub h: u64,
    /// Equals `h` for imaginary fields.
    pub h_narrow: u64,
    /// Norm of the fundamental unit; real fields only.
    pub unit_norm: Option<i8>,
    pub method: Method,
}

/// Whether `delta` is the discriminant of a quadratic field (it may be 1 mod 4
/// and square-free, or 4m with m = 2, 3 mod 4 square-free).
pub fn is_fundamental(delta: &BigInt) -> bool {
    let r = delta.mod_floor(&BigInt::from(4)).to_u8().unwrap();
    let ok = |m: &BigInt| arith::is_squarefree(m).unwrap_or(false);
    match r {
        1 => *delta != BigInt::from(1) && ok(delta),
        0 => {
            let m: BigInt = delta / 4;
            let m4 = m.mod_floor(&BigInt::from(4)).to_u8().unwrap();
            (m4 == 2 || m4 == 3) && ok(&m)
        }
        _ => false,
    }
}

fn checked_delta(delta: &BigInt, negative: bool, cutoff: u64) -> Result<i64> {
    if negative != delta.is_negative() || delta.sign() == num_bigint::Sign::NoSign {
        return Err(ClassGroupError::WrongSign(delta.clone()));
    }
    if !negative && arith::is_square(delta) {
        return Err(ClassGroupError::PerfectSquare(delta.clone()));
    }
    let cutoff = cutoff.min(Cutoffs::MAX);
    if delta.abs() > BigInt::from(cutoff) {
        return Err(ClassGroupError::TooLarge {
            delta: delta.clone(),
            cutoff,
        });
    }
    if !is_fundamental(delta) {
        return Err(ClassGroupError::NotFundamental(delta.clone()));
    }
    Ok(delta.to_i64().expect("bounded by cutoff"))
}

/// Smallest-prime-factor table for `0..=limit`.
fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Square roots of `n` modulo an odd prime `p` (Tonelli-Shanks).
fn sqrt_mod_prime(n: u128, p: u128) -> Vec<u128> {
    let n = n % p;
    if n == 0 {
        return vec![0];
    }
    if pow_mod(n, (p - 1) / 2, p) != 1 {
        return vec![];
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = t2 * t2 % p;
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    if r == p - r {
        vec![r]
    } else {
        vec![r, p - r]
    }
}

/// All `x mod p^e` with `x^2 = n (mod p^e)`.
fn sqrt_mod_prime_power(n: i64, p: u64, e: u32) -> Vec<u128> {
    let p = p as u128;
    let mut modulus = p;
    let nm = |m: u128| (n as i128).rem_euclid(m as i128) as u128;
    let mut roots = if p == 2 {
        vec![nm(2)]
    } else {
        sqrt_mod_prime(nm(p), p)
    };
    for _ in 1..e {
        let next = modulus * p;
        let target = nm(next);
        let mut lifted = Vec::new();
        for &r in &roots {
            for t in 0..p {
                let x = r + t * modulus;
                if x * x % next == target {
                    lifted.push(x);
                }
            }
        }
        roots = lifted;
        modulus = next;
        if roots.is_empty() {
            break;
        }
    }
    roots
}

/// Residues `b mod 2a` with `b^2 = delta (mod 4a)`, ascending.
fn roots_mod_4a(delta: i64, a: u64, spf: &[u32]) -> Vec<u64> {
    let mut parts: Vec<(u128, Vec<u128>)> = Vec::new();
    let mut rest = a;
    let mut twos = 2u32;
    while rest.is_multiple_of(2) {
        rest /= 2;
        twos += 1;
    }
    parts.push((1u128 << twos, sqrt_mod_prime_power(delta, 2, twos)));
    while rest > 1 {
        let p = spf[rest as usize] as u64;
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        parts.push(((p as u128).pow(e), sqrt_mod_prime_power(delta, p, e)));
    }
    let mut modulus = 1u128;
    let mut acc: Vec<u128> = vec![0];
    for (q, rs) in parts {
        if rs.is_empty() {
            return vec![];
        }
        let inv = mod_inverse(modulus % q, q);
        let mut next = Vec::with_capacity(acc.len() * rs.len());
        for &x in &acc {
            for &r in &rs {
                let diff = (r + q - x % q) % q;
                let k = diff * inv % q;
                next.push(x + modulus * k);
            }
        }
        acc = next;
        modulus *= q;
    }
    let half = 2 * a as u128;
    let mut out: Vec<u64> = acc.into_iter().map(|x| (x % half) as u64).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn mod_inverse(a: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u128
}

/// Every reduced positive-definite form of the fundamental discriminant
/// `delta < 0`, sorted.
pub fn reduced_forms_imaginary(delta: &BigInt) -> Result<Vec<QuadForm>> {
    reduced_forms_imaginary_with(delta, Cutoffs::default().imaginary)
}

pub fn reduced_forms_imaginary_with(delta: &BigInt, cutoff: u64) -> Result<Vec<QuadForm>> {
    let delta = checked_delta(delta, true, cutoff)?;
    let a_max = isqrt_u128((-delta / 3) as u128) as u64;
    let spf = spf_table(a_max as usize);
    let mut forms = Vec::new();
    for a in 1..=a_max {
        for r in roots_mod_4a(delta, a, &spf) {
            let (a, r) = (a as i64, r as i64);
            // representative in (-a, a]
            let b = if r > a { r - 2 * a } else { r };
            let c = ((b as i128 * b as i128 - delta as i128) / (4 * a as i128)) as i64;
            let form = QuadForm::new(a, b, c);
            if form.is_reduced_imaginary() {
                forms.push(form);
            }
        }
    }
    forms.sort_unstable();
    Ok(forms)
}

pub fn class_number_imaginary(delta: &BigInt) -> Result<ClassNumberResult> {
    class_number_imaginary_with(delta, Cutoffs::default().imaginary)
}

pub fn class_number_imaginary_with(delta: &BigInt, cutoff: u64) -> Result<ClassNumberResult> {
    let forms = reduced_forms_imaginary_with(delta, cutoff)?;
    let h = forms.len() as u64;
    Ok(ClassNumberResult {
        d: kernel_of(delta),
        delta: delta.clone(),
        h,
        h_narrow: h,
        unit_norm: None,
        method: Method::FormCount,
    })
}

fn kernel_of(delta: &BigInt) -> BigInt {
    if delta.mod_floor(&BigInt::from(4)) == BigInt::from(0) {
        delta / 4
    } else {
        delta.clone()
    }
}

/// `h = w / (2|delta|) * |sum_{k=1}^{|delta|-1} (delta/k) k|`, exactly.
pub fn class_number_imaginary_analytic(delta: &BigInt) -> Result<u64> {
    let delta = checked_delta(delta, true, Cutoffs::default().imaginary)?;
    let n = -delta;
    let sum: i128 = (1..n)
        .map(|k| kronecker_i64(delta, k) as i128 * k as i128)
        .sum();
    let w: i128 = match delta {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let num = w * sum.abs();
    let den = 2 * n as i128;
    assert_eq!(
        num % den,
        0,
        "character sum not divisible for delta {delta}"
    );
    Ok((num / den) as u64)
}

/// Period length of the continued fraction of the maximal-order generator
/// `omega` (`sqrt d` or `(1 + sqrt d)/2`) and the norm of the fundamental unit:
/// -1 exactly when the period is odd.
pub fn cf_unit_norm(d: &BigInt) -> Result<(u64, i8)> {
    if !d.is_positive() || *d == BigInt::from(1) {
        return Err(ClassGroupError::WrongSign(d.clone()));
    }
    if !arith::is_squarefree(d).map_err(FieldError::from)? {
        return Err(FieldError::NotSquarefree(d.clone()).into());
    }
    let d = d.to_i128().ok_or_else(|| ClassGroupError::TooLarge {
        delta: d.clone(),
        cutoff: Cutoffs::MAX,
    })?;
    let root = isqrt_u128(d as u128) as i128;
    // omega = (p + sqrt d) / q with q | d - p^2
    let (mut p, mut q) = if d % 4 == 1 { (1i128, 2i128) } else { (0, 1) };
    let step = |p: i128, q: i128| {
        let a = (p + root).div_euclid(q);
        let p_next = a * q - p;
        let q_next = (d - p_next * p_next) / q;
        (p_next, q_next)
    };
    (p, q) = step(p, q);
    let start = (p, q);
    let mut period = 0u64;
    loop {
        (p, q) = step(p, q);
        period += 1;
        if (p, q) == start {
            break;
        }
    }
    Ok((period, if period % 2 == 1 { -1 } else { 1 }))
}

/// Every reduced indefinite form of discriminant `delta`, by brute force over
/// `(a, b)`. Intended for small discriminants.
pub fn reduced_forms_real(delta: i64) -> Vec<QuadForm> {
    let s = isqrt_u128(delta as u128) as i64;
    let mut forms = Vec::new();
    for b in 1..=s {
        if (b - delta).rem_euclid(2) != 0 {
            continue;
        }
        let n = (delta - b * b) / 4;
        for a in 1..=s {
            if n % a != 0 {
                continue;
            }
            for sa in [a, -a] {
                let f = QuadForm::new(sa, b, -n / sa);
                if f.is_reduced_real(s) {
                    forms.push(f);
                }
            }
        }
    }
    forms.sort_unstable();
    forms
}

/// The full `rho` cycle through `start`.
pub fn rho_cycle(start: QuadForm, delta: i64) -> Vec<QuadForm> {
    let s = isqrt_u128(delta as u128) as i64;
    let mut cycle = vec![start];
    let mut f = start.rho(delta, s);
    while f != start {
        cycle.push(f);
        f = f.rho(delta, s);
    }
    cycle
}

/// Number of `rho` cycles of reduced forms, i.e. the narrow class number.
fn count_cycles(delta: i64) -> u64 {
    let s = isqrt_u128(delta as u128) as i64;
    let bound = isqrt_u128(delta as u128 / 5) as u64;
    let spf = spf_table(bound as usize);

    let mut seeds = Vec::new();
    for a in 1..=bound {
        let ai = a as i64;
        for r in roots_mod_4a(delta, a, &spf) {
            let b = s - (s - r as i64).rem_euclid(2 * ai);
            if b < 1 {
                continue;
            }
            let c = ((b as i128 * b as i128 - delta as i128) / (4 * ai as i128)) as i64;
            for f in [QuadForm::new(ai, b, c), QuadForm::new(-ai, b, -c)] {
                if f.is_reduced_real(s) {
                    seeds.push(f);
                }
            }
        }
    }

    let bound = bound as i64;
    let mut seen: HashSet<(i64, i64)> = HashSet::with_capacity(seeds.len());
    let mut cycles = 0;
    for seed in seeds {
        if seen.contains(&(seed.a, seed.b)) {
            continue;
        }
        cycles += 1;
        let mut f = seed;
        loop {
            if f.a.abs() <= bound {
                seen.insert((f.a, f.b));
            }
            f = f.rho(delta, s);
            if f == seed {
                break;
            }
        }
    }
    cycles
}

pub fn class_number_real(delta: &BigInt) -> Result<ClassNumberResult> {
    class_number_real_with(delta, Cutoffs::default().real)
}

pub fn class_number_real_with(delta: &BigInt, cutoff: u64) -> Result<ClassNumberResult> {
    let delta_i = checked_delta(delta, false, cutoff)?;
    let d = kernel_of(delta);
    let h_narrow = count_cycles(delta_i);
    let (_, unit_norm) = cf_unit_norm(&d)?;
    let h = if unit_norm == 1 {
        h_narrow / 2
    } else {
        h_narrow
    };
    Ok(ClassNumberResult {
        d,
        delta: delta.clone(),
        h,
        h_narrow,
        unit_norm: Some(unit_norm),
        method: Method::FormCycles,
    })
}

/// Class number of `Q(sqrt n)` for any non-square `n`.
pub fn class_number(n: &BigInt) -> Result<ClassNumberResult> {
    class_number_with(n, &Cutoffs::default())
}

pub fn class_number_with(n: &BigInt, cutoffs: &Cutoffs) -> Result<ClassNumberResult> {
    let field = quadfield::field_from(n)?;
    if field.is_real {
        class_number_real_with(&field.delta, cutoffs.real)
    } else {
        class_number_imaginary_with(&field.delta, cutoffs.imaginary)
    }
}
