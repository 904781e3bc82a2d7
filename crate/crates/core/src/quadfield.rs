//! Quadratic fields `Q(sqrt d)`: square-free kernels, fundamental
//! discriminants and the mirror field `D` attached to `d`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is a perfect square: not a quadratic field")]
    PerfectSquare(BigInt),
    #[error("zero does not define a quadratic field")]
    Zero,
    #[error("d = {0} is excluded (d must differ from 1 and -3)")]
    Excluded(BigInt),
    #[error("{0} is not square-free")]
    NotSquarefree(BigInt),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The field `Q(sqrt d)` with `d` square-free and its discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub d: BigInt,
    pub delta: BigInt,
    pub is_real: bool,
}

impl FieldSpec {
    /// Builds the field data for an already square-free `d`.
    pub fn from_squarefree(d: BigInt) -> Result<Self, FieldError> {
        if d.is_zero() {
            return Err(FieldError::Zero);
        }
        if d.is_one() {
            return Err(FieldError::PerfectSquare(d));
        }
        let delta = fundamental_discriminant(&d);
        let is_real = d.is_positive();
        Ok(FieldSpec { d, delta, is_real })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({})), disc {}", self.d, self.delta)
    }
}

/// `d` if `d = 1 (mod 4)`, else `4d`. `d` must be square-free.
pub fn fundamental_discriminant(d: &BigInt) -> BigInt {
    if d.mod_floor(&BigInt::from(4)).is_one() {
        d.clone()
    } else {
        d * 4
    }
}

/// The quadratic field generated by `sqrt n`.
pub fn field_from(n: &BigInt) -> Result<FieldSpec, FieldError> {
    if n.is_zero() {
        return Err(FieldError::Zero);
    }
    if arith::is_square(n) {
        return Err(FieldError::PerfectSquare(n.clone()));
    }
    let (d, _) = arith::squarefree_part(n)?;
    FieldSpec::from_squarefree(d)
}

/// `-d/3` when `3 | d`, otherwise `-3d`.
pub fn mirror_d(d: &BigInt) -> Result<BigInt, FieldError> {
    if d.is_one() || *d == BigInt::from(-3) {
        return Err(FieldError::Excluded(d.clone()));
    }
    if !arith::is_squarefree(d)? {
        return Err(FieldError::NotSquarefree(d.clone()));
    }
    let three = BigInt::from(3);
    let mirror = if d.is_multiple_of(&three) {
        -(d / &three)
    } else {
        -(d * &three)
    };
    assert!(
        arith::is_squarefree(&mirror)?,
        "mirror of square-free {d} must be square-free"
    );
    Ok(mirror)
}
