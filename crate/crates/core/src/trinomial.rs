//! Cubic trinomials `X^3 - A X - B`.
//!
//! One shape covers Kishi's trinomial `X^3 - 3 N^(1/3) X - T` built from the
//! norm and trace of a quadratic integer, the Kishi-Miyake polynomial
//! `x^3 - uv x - u^2`, and the `g(X)` of the Llorente-Nart ramification test.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{self, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrinomialError {
    #[error("norm {0} is not a perfect cube")]
    NormNotCube(BigInt),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("Llorente-Nart hypotheses not met: {0}")]
    LnHypotheses(&'static str),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `X^3 - a X - b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubicTrinomial {
    pub a: BigInt,
    pub b: BigInt,
}

impl CubicTrinomial {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        CubicTrinomial {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        x * x * x - &self.a * x - &self.b
    }

    /// `4A^3 - 27B^2`.
    pub fn discriminant(&self) -> BigInt {
        BigInt::from(4) * self.a.pow(3) - BigInt::from(27) * self.b.pow(2)
    }

    /// Irreducible over `Q`, i.e. no rational (hence integer) root.
    ///
    /// The integer points split into at most three runs on which the cubic
    /// is monotone; each run is bisected exactly. `B = 0` has the root 0.
    pub fn is_irreducible_q(&self) -> bool {
        if self.b.is_zero() {
            return false;
        }
        // Cauchy bound on the roots
        let bound = BigInt::one() + self.a.abs() + self.b.abs();
        let runs: Vec<(BigInt, BigInt, bool)> = if self.a.is_positive() {
            // critical points at +-sqrt(A/3)
            let k = (&self.a / 3u32).sqrt();
            let k = if BigInt::from(3) * (&k + 1u32).pow(2) <= self.a {
                k + 1u32
            } else {
                k
            };
            vec![
                (-&bound, -&k - 1u32, true),
                (-&k, k.clone(), false),
                (&k + 1u32, bound.clone(), true),
            ]
        } else {
            vec![(-&bound, bound.clone(), true)]
        };
        !runs
            .into_iter()
            .any(|(lo, hi, increasing)| self.has_root_in(lo, hi, increasing))
    }

    fn has_root_in(&self, mut lo: BigInt, mut hi: BigInt, increasing: bool) -> bool {
        while lo <= hi {
            let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
            let v = self.eval(&mid);
            if v.is_zero() {
                return true;
            }
            if v.is_positive() == increasing {
                hi = mid - 1u32;
            } else {
                lo = mid + 1u32;
            }
        }
        false
    }

    /// Whether the reduction mod the prime `p` has no root in `F_p`, which for
    /// a monic cubic is irreducibility over `F_p`.
    pub fn is_irreducible_mod_p(&self, p: u64) -> Result<bool, TrinomialError> {
        if !arith::is_prime_u64(p) {
            return Err(TrinomialError::NotPrime(p));
        }
        let pb = BigInt::from(p);
        let a = self.a.mod_floor(&pb).to_u64().unwrap() as u128;
        let b = self.b.mod_floor(&pb).to_u64().unwrap() as u128;
        let p = p as u128;
        Ok((0..p).all(|x| !(x * x % p * x + p * p - a * x % p - b).is_multiple_of(p)))
    }
}

impl fmt::Display for CubicTrinomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X^3")?;
        if !self.a.is_zero() {
            if self.a.is_negative() {
                write!(f, " + {}X", -&self.a)?;
            } else {
                write!(f, " - {}X", self.a)?;
            }
        }
        if !self.b.is_zero() {
            if self.b.is_negative() {
                write!(f, " + {}", -&self.b)?;
            } else {
                write!(f, " - {}", self.b)?;
            }
        }
        Ok(())
    }
}

/// `X^3 - 3 N^(1/3) X - T` for an element of norm `N` and trace `T`.
pub fn kishi_trinomial(norm: &BigInt, trace: &BigInt) -> Result<CubicTrinomial, TrinomialError> {
    let root =
        arith::cube_root_exact(norm).ok_or_else(|| TrinomialError::NormNotCube(norm.clone()))?;
    Ok(CubicTrinomial::new(root * 3, trace.clone()))
}

/// `x^3 - uv x - u^2`.
pub fn km_polynomial(u: &BigInt, v: &BigInt) -> CubicTrinomial {
    CubicTrinomial::new(u * v, u * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LnCondition {
    Ln1,
    Ln2,
    Ln3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LnOutcome {
    TotallyRamified(LnCondition),
    NotTotallyRamified,
}

impl fmt::Display for LnOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LnOutcome::TotallyRamified(c) => write!(f, "totally ramified ({c:?})"),
            LnOutcome::NotTotallyRamified => f.write_str("not totally ramified"),
        }
    }
}

/// 3-adic valuation, `None` standing for infinity at 0.
fn v3(n: &BigInt) -> Option<u32> {
    (!n.is_zero()).then(|| arith::valuation(3, n).expect("nonzero"))
}

/// Decides whether 3 is totally ramified in `Q(theta)`, `theta` a root of the
/// irreducible `X^3 - aX - b` with `v3(a) < 2` or `v3(b) < 3`.
pub fn ln_totally_ramified(a: &BigInt, b: &BigInt) -> Result<LnOutcome, TrinomialError> {
    let g = CubicTrinomial::new(a.clone(), b.clone());
    if !g.is_irreducible_q() {
        return Err(TrinomialError::LnHypotheses(
            "trinomial is reducible over Q",
        ));
    }
    let (va, vb) = (v3(a), v3(b));
    let lt = |v: Option<u32>, k: u32| v.is_some_and(|v| v < k);
    if !lt(va, 2) && !lt(vb, 3) {
        return Err(TrinomialError::LnHypotheses("v3(a) >= 2 and v3(b) >= 3"));
    }

    let md = |x: &BigInt, m: u32| x.mod_floor(&BigInt::from(m)).to_u32().unwrap();
    let three_divides_b = vb.is_some_and(|v| v >= 1);

    // LN-1: 1 <= v3(b) <= v3(a)
    if let Some(vb) = vb {
        if vb >= 1 && va.is_none_or(|va| vb <= va) {
            return Ok(LnOutcome::TotallyRamified(LnCondition::Ln1));
        }
    }
    let b_sq = b * b;
    let a_plus_1 = a + 1u32;
    // LN-2: 3 | a, a != 3 (mod 9), 3 does not divide b, b^2 != a + 1 (mod 9)
    if md(a, 3) == 0 && md(a, 9) != 3 && !three_divides_b && md(&b_sq, 9) != md(&a_plus_1, 9) {
        return Ok(LnOutcome::TotallyRamified(LnCondition::Ln2));
    }
    // LN-3: a = 3 (mod 9), 3 does not divide b, b^2 != a + 1 (mod 27)
    if md(a, 9) == 3 && !three_divides_b && md(&b_sq, 27) != md(&a_plus_1, 27) {
        return Ok(LnOutcome::TotallyRamified(LnCondition::Ln3));
    }
    Ok(LnOutcome::NotTotallyRamified)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Km4Branch {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmReport {
    pub u: BigInt,
    pub v: BigInt,
    /// `gcd(u, v) = 1`
    pub km1: bool,
    /// `f_{u,v}` irreducible over `Q`
    pub km2: bool,
    /// discriminant not a perfect square
    pub km3: bool,
    pub km4: Option<Km4Branch>,
    /// `u^3 (4v^3 - 27u)`
    pub disc: BigInt,
    /// Square-free kernel of `disc`; `None` when `disc = 0` or its
    /// factorization cannot be certified.
    pub d_field: Option<BigInt>,
}

impl KmReport {
    /// All four conditions hold, so 3 divides the class number of
    /// `Q(sqrt disc)`.
    pub fn passes(&self) -> bool {
        self.km1 && self.km2 && self.km3 && self.km4.is_some()
    }
}

/// Evaluates the conditions KM-1 to KM-4 on `(u, v)`.
pub fn km_check(u: &BigInt, v: &BigInt) -> KmReport {
    let f = km_polynomial(u, v);
    let disc = f.discriminant();
    let km1 = arith::gcd(u, v).is_one();
    let km2 = f.is_irreducible_q();
    let km3 = !arith::is_square(&disc);

    let md = |x: &BigInt, m: i64| x.mod_floor(&BigInt::from(m));
    let uv = u * v;
    let u_near_v = |m: i64| {
        let du = md(u, m);
        du == md(&(v + 1), m) || du == md(&(v - 1), m)
    };
    let km4 = if !md(v, 3).is_zero() {
        Some(Km4Branch::A)
    } else if md(&uv, 9) != BigInt::from(3) && u_near_v(9) {
        Some(Km4Branch::B)
    } else if md(&uv, 9) == BigInt::from(3) && u_near_v(27) {
        Some(Km4Branch::C)
    } else {
        None
    };

    let d_field = if disc.is_zero() {
        None
    } else {
        arith::squarefree_part(&disc).ok().map(|(d, _)| d)
    };
    KmReport {
        u: u.clone(),
        v: v.clone(),
        km1,
        km2,
        km3,
        km4,
        disc,
        d_field,
    }
}
