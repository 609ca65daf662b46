//! Arithmetic backends: exact arbitrary-precision rationals and 64-bit floats.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. The rational
//! backend keeps equality constraints exact, which is what certification
//! needs; the float backend trades exactness for speed on larger grids and
//! carries the tolerances used throughout the crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used by the certification paths.
pub type Rational = BigRational;

/// Which arithmetic backend an instance (or a CLI invocation) requests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithmeticMode {
    Rational,
    Float,
}

impl ArithmeticMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ArithmeticMode::Rational => "rational",
            ArithmeticMode::Float => "float",
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArithmeticMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(ArithmeticMode::Rational),
            "float" => Ok(ArithmeticMode::Float),
            other => Err(format!("unknown arithmetic mode `{other}`")),
        }
    }
}

/// Number type the toolkit computes in.
///
/// Tolerances are associated with the type: the rational backend returns
/// zero for all of them, so "within tolerance" degenerates to exact
/// comparison there.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and tolerances are zero.
    const EXACT: bool;

    fn mode() -> ArithmeticMode;

    fn from_int(v: i64) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// Exact rational value of this scalar. `None` for non-finite floats.
    /// Finite floats convert exactly (they are dyadic rationals).
    fn to_rational(&self) -> Option<Rational>;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    fn is_finite_value(&self) -> bool;

    /// Feasibility/equality tolerance: 0 exact, 1e-9 float.
    fn eq_tol() -> Self;

    /// Mass below which a plan entry counts as zero: 0 exact, 1e-12 float.
    fn support_tol() -> Self;

    /// Marginal-sum tolerance: 0 exact, 1e-12 float.
    fn sum_tol() -> Self;

    /// Simplex pivot tolerance: 0 exact, 1e-10 float.
    fn pivot_tol() -> Self;

    fn approx_eq(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }

    /// `self <= other` up to the given tolerance.
    fn le_within(&self, other: &Self, tol: &Self) -> bool {
        *self <= other.clone() + tol.clone()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn mode() -> ArithmeticMode {
        ArithmeticMode::Rational
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn eq_tol() -> Self {
        Rational::zero()
    }

    fn support_tol() -> Self {
        Rational::zero()
    }

    fn sum_tol() -> Self {
        Rational::zero()
    }

    fn pivot_tol() -> Self {
        Rational::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn mode() -> ArithmeticMode {
        ArithmeticMode::Float
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn eq_tol() -> Self {
        1e-9
    }

    fn support_tol() -> Self {
        1e-12
    }

    fn sum_tol() -> Self {
        1e-12
    }

    fn pivot_tol() -> Self {
        1e-10
    }
}

/// Total order for scalars. Panics on NaN, which validated inputs exclude.
pub fn cmp<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).expect("non-comparable scalar (NaN)")
}

pub fn min_of<S: Scalar>(a: S, b: S) -> S {
    if cmp(&b, &a) == Ordering::Less {
        b
    } else {
        a
    }
}

pub fn max_of<S: Scalar>(a: S, b: S) -> S {
    if cmp(&b, &a) == Ordering::Greater {
        b
    } else {
        a
    }
}
