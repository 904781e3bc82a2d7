//! Exact integer primitives: gcd, valuations, the Kronecker symbol, integer
//! roots, certified factorization and square-free parts.
//!
//! Everything operates on [`BigInt`] so family parameters never overflow. A few
//! hot loops elsewhere in the crate use the `i64`/`u64` fast paths exported
//! here.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Deterministic Miller-Rabin with the first thirteen primes as witnesses is
/// exact below this bound (3.317 * 10^24).
pub const PRIMALITY_LIMIT: &str = "3317044064679887385961981";

const MR_WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("valuation of zero is undefined")]
    ValuationOfZero,
    #[error("{0} is not prime")]
    NotPrime(BigInt),
    #[error("square root of negative number {0}")]
    NegativeSqrt(BigInt),
    #[error("cannot factor zero")]
    FactorZero,
    #[error("factorization incomplete: cofactor {cofactor} resisted {iterations} rho iterations")]
    FactorizationIncomplete { cofactor: BigInt, iterations: u64 },
    #[error("primality of {0} cannot be certified (limit is {PRIMALITY_LIMIT})")]
    PrimalityOutOfRange(BigInt),
}

pub type Result<T> = std::result::Result<T, ArithError>;

fn primality_limit() -> &'static BigInt {
    static LIMIT: OnceLock<BigInt> = OnceLock::new();
    LIMIT.get_or_init(|| PRIMALITY_LIMIT.parse().expect("valid literal"))
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Largest `e` with `p^e | n`.
pub fn valuation(p: u64, n: &BigInt) -> Result<u32> {
    if n.is_zero() {
        return Err(ArithError::ValuationOfZero);
    }
    if p < 2 || !is_prime_u64(p) {
        return Err(ArithError::NotPrime(BigInt::from(p)));
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        n = q;
        e += 1;
    }
}

/// `valuation` for machine integers; `n` must be nonzero.
pub fn valuation_i64(p: i64, mut n: i64) -> u32 {
    debug_assert!(n != 0 && p > 1);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// Kronecker symbol `(a / n)` for arbitrary integers.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i8 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let twos = n.trailing_zeros().unwrap_or(0);
    if twos > 0 {
        if a.is_even() {
            return 0;
        }
        n >>= twos;
        let a8 = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        if twos % 2 == 1 && (a8 == 3 || a8 == 5) {
            result = -result;
        }
    }
    // Jacobi symbol for odd positive n.
    let mut a = a.mod_floor(&n);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let n8 = (&n % 8u32).to_u8().unwrap();
            if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        let three = BigInt::from(3);
        if &a % 4u32 == three && &n % 4u32 == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Kronecker symbol on machine integers.
pub fn kronecker_i64(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        let a8 = (a as i128).rem_euclid(8);
        if twos % 2 == 1 && (a8 == 3 || a8 == 5) {
            result = -result;
        }
    }
    let mut a = (a as i128).rem_euclid(n);
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Floor of the square root.
pub fn isqrt(n: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(ArithError::NegativeSqrt(n.clone()));
    }
    Ok(n.sqrt())
}

pub fn isqrt_u128(n: u128) -> u128 {
    n.sqrt()
}

pub fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

/// `Some(r)` with `r^3 = n` when `n` is a perfect cube.
pub fn cube_root_exact(n: &BigInt) -> Option<BigInt> {
    let r = n.abs().cbrt();
    let r = if n.is_negative() { -r } else { r };
    (&r * &r * &r == *n).then_some(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// -1 or +1.
    pub sign: i8,
    /// Strictly increasing primes with positive exponents.
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            v *= p.pow(*e);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    /// Trial division uses every prime up to this bound.
    pub trial_bound: u64,
    /// Total number of rho iterations across all cofactors before giving up.
    pub rho_budget: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            trial_bound: 1_000_000,
            rho_budget: 20_000_000,
        }
    }
}

fn small_primes(bound: u64) -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    const SIEVE_LIMIT: u64 = 1_000_000;
    let all = PRIMES.get_or_init(|| sieve(SIEVE_LIMIT));
    let end = all.partition_point(|&p| p <= bound.min(SIEVE_LIMIT));
    &all[..end]
}

/// Primes up to `limit` by the sieve of Eratosthenes.
pub fn sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn factorize(n: &BigInt) -> Result<Factorization> {
    factorize_with(n, &FactorConfig::default())
}

/// Trial division up to `cfg.trial_bound`, then Brent's rho on the cofactor.
/// Every reported prime is certified by deterministic Miller-Rabin; a cofactor
/// that cannot be split or certified is an error, never a guess.
pub fn factorize_with(n: &BigInt, cfg: &FactorConfig) -> Result<Factorization> {
    if n.is_zero() {
        return Err(ArithError::FactorZero);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut found: BTreeMap<BigInt, u32> = BTreeMap::new();

    let mut trial_complete = false;
    for &p in small_primes(cfg.trial_bound) {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            trial_complete = true;
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        if e > 0 {
            found.insert(pb, e);
        }
    }

    if !m.is_one() {
        if trial_complete {
            *found.entry(m).or_insert(0) += 1;
        } else {
            let mut budget = cfg.rho_budget;
            let mut stack = vec![m];
            while let Some(x) = stack.pop() {
                if x.is_one() {
                    continue;
                }
                if is_prime(&x)? {
                    *found.entry(x).or_insert(0) += 1;
                    continue;
                }
                let r = x.sqrt();
                if &r * &r == x {
                    stack.push(r.clone());
                    stack.push(r);
                    continue;
                }
                let f = rho_factor(&x, &mut budget).ok_or_else(|| {
                    ArithError::FactorizationIncomplete {
                        cofactor: x.clone(),
                        iterations: cfg.rho_budget,
                    }
                })?;
                stack.push(&x / &f);
                stack.push(f);
            }
        }
    }

    Ok(Factorization {
        sign,
        factors: found.into_iter().collect(),
    })
}

/// Returns `(d, t)` with `n = t^2 d`, `d` square-free and of the sign of `n`.
pub fn squarefree_part(n: &BigInt) -> Result<(BigInt, BigInt)> {
    let f = factorize(n)?;
    let mut d = BigInt::from(f.sign);
    let mut t = BigInt::one();
    for (p, e) in &f.factors {
        if e % 2 == 1 {
            d *= p;
        }
        t *= p.pow(e / 2);
    }
    Ok((d, t))
}

pub fn is_squarefree(n: &BigInt) -> Result<bool> {
    Ok(factorize(n)?.factors.iter().all(|&(_, e)| e == 1))
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES[..12] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality below [`PRIMALITY_LIMIT`]; larger inputs are rejected.
pub fn is_prime(n: &BigInt) -> Result<bool> {
    if let Some(small) = n.to_u64() {
        return Ok(is_prime_u64(small));
    }
    if n.is_negative() {
        return Ok(false);
    }
    if n >= primality_limit() {
        return Err(ArithError::PrimalityOutOfRange(n.clone()));
    }
    for &p in &MR_WITNESSES {
        if (n % p).is_zero() {
            return Ok(false);
        }
    }
    let one = BigInt::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// A nontrivial factor of the odd composite `n`, or `None` once `budget`
/// iterations are spent.
fn rho_factor(n: &BigInt, budget: &mut u64) -> Option<BigInt> {
    if n.is_even() {
        return Some(BigInt::from(2));
    }
    if let Some(small) = n.to_u64() {
        return rho_u64(small, budget).map(BigInt::from);
    }
    for c in 1u64.. {
        let c = BigInt::from(c);
        let step = |y: &BigInt| (y * y + &c) % n;
        let mut y = BigInt::from(2);
        let mut x = y.clone();
        let mut g = BigInt::one();
        let mut q = BigInt::one();
        let mut r: u64 = 1;
        let mut ys = y.clone();
        const BATCH: u64 = 128;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let lim = BATCH.min(r - k);
                for _ in 0..lim {
                    y = step(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                if *budget < lim {
                    return None;
                }
                *budget -= lim;
                g = q.gcd(n);
                k += lim;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = step(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    unreachable!()
}

fn rho_u64(n: u64, budget: &mut u64) -> Option<u64> {
    for c in 1u64.. {
        let step = |y: u64| (mul_mod_u64(y, y, n) + c) % n;
        let mut y = 2u64;
        let mut x = y;
        let mut g = 1u64;
        let mut q = 1u64;
        let mut r: u64 = 1;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let lim = BATCH.min(r - k);
                for _ in 0..lim {
                    y = step(y);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                if *budget < lim {
                    return None;
                }
                *budget -= lim;
                g = q.gcd(&n);
                k += lim;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    unreachable!()
}

/// Sign helper for callers that keep `BigInt` signs explicit.
pub fn sign_of(n: &BigInt) -> i8 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(&b(12), &b(18)), b(6));
        assert_eq!(gcd(&b(0), &b(7)), b(7));
        assert_eq!(gcd(&b(0), &b(0)), b(0));
        let x = b(3i64.pow(5) * 49);
        let y = b(2 * 343);
        // brute force over common divisors
        let brute = (1..=x.to_i64().unwrap().min(y.to_i64().unwrap()))
            .filter(|k| x.to_i64().unwrap() % k == 0 && y.to_i64().unwrap() % k == 0)
            .max()
            .unwrap();
        assert_eq!(brute, 49);
        assert_eq!(gcd(&x, &y), b(brute));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(3, &b(54)), Ok(3));
        assert_eq!(valuation(3, &b(1)), Ok(0));
        assert_eq!(valuation(2, &b(-96)), Ok(5));
        assert_eq!(valuation(3, &b(0)), Err(ArithError::ValuationOfZero));
        assert!(matches!(valuation(4, &b(8)), Err(ArithError::NotPrime(_))));
    }

    #[test]
    fn kronecker_examples() {
        for n in 1..50 {
            assert_eq!(kronecker(&b(1), &b(n)), 1);
        }
        assert_eq!(kronecker(&b(-53), &b(3)), 1);
        assert_eq!(kronecker(&b(5), &b(5)), 0);
        // full extension: negative and even moduli
        assert_eq!(kronecker(&b(-1), &b(-1)), -1);
        assert_eq!(kronecker(&b(5), &b(2)), -1);
        assert_eq!(kronecker(&b(7), &b(2)), 1);
        assert_eq!(kronecker(&b(3), &b(0)), 0);
        assert_eq!(kronecker(&b(-1), &b(0)), 1);
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&b(0)).unwrap(), b(0));
        assert_eq!(isqrt(&b(321)).unwrap(), b(17));
        let big = BigInt::from(10u8).pow(30);
        assert_eq!(isqrt(&big).unwrap(), BigInt::from(10u8).pow(15));
        assert!(isqrt(&b(-1)).is_err());
        assert_eq!(isqrt_u128(321), 17);
        assert_eq!(
            isqrt_u128(u64::MAX as u128 * u64::MAX as u128),
            u64::MAX as u128
        );
    }

    #[test]
    fn cube_root_examples() {
        assert_eq!(cube_root_exact(&b(27)), Some(b(3)));
        assert_eq!(cube_root_exact(&b(-8)), Some(b(-2)));
        assert_eq!(cube_root_exact(&b(28)), None);
        assert_eq!(cube_root_exact(&b(0)), Some(b(0)));
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(&b(321)).unwrap();
        assert_eq!(f.sign, 1);
        assert_eq!(f.factors, vec![(b(3), 1), (b(107), 1)]);
        let f = factorize(&b(-2175)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, vec![(b(3), 1), (b(5), 2), (b(29), 1)]);
        let f = factorize(&b(1)).unwrap();
        assert_eq!((f.sign, f.factors.len()), (1, 0));
        assert_eq!(factorize(&b(0)), Err(ArithError::FactorZero));
    }

    #[test]
    fn factorize_past_trial_bound() {
        // two primes just above 10^6 and a 20-digit semiprime
        let p = b(1_000_003);
        let q = b(1_000_033);
        let f = factorize(&(&p * &q * &q)).unwrap();
        assert_eq!(f.factors, vec![(p.clone(), 1), (q.clone(), 2)]);
        let r: BigInt = "10000000019".parse().unwrap();
        let s: BigInt = "10000000033".parse().unwrap();
        let f = factorize(&(&r * &s)).unwrap();
        assert_eq!(f.factors, vec![(r, 1), (s, 1)]);
    }

    #[test]
    fn factorize_reports_budget_exhaustion() {
        let p: BigInt = "1000000000039".parse().unwrap();
        let q: BigInt = "1000000000061".parse().unwrap();
        let cfg = FactorConfig {
            trial_bound: 100,
            rho_budget: 10,
        };
        assert!(matches!(
            factorize_with(&(&p * &q), &cfg),
            Err(ArithError::FactorizationIncomplete { .. })
        ));
    }

    #[test]
    fn primality_limit_enforced() {
        let big = primality_limit() + 2u32;
        assert!(matches!(
            is_prime(&big),
            Err(ArithError::PrimalityOutOfRange(_))
        ));
        let p: BigInt = "10000000000000000000009".parse().unwrap();
        assert_eq!(is_prime(&p), Ok(true));
        assert_eq!(is_prime(&(&p + 2)), Ok(false));
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(&b(12)).unwrap(), (b(3), b(2)));
        assert_eq!(squarefree_part(&b(-53)).unwrap(), (b(-53), b(1)));
        assert_eq!(squarefree_part(&b(-2175)).unwrap(), (b(-87), b(5)));
        assert_eq!(squarefree_part(&b(-1)).unwrap(), (b(-1), b(1)));
    }
}
