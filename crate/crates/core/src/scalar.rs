//! Scalar types the numerical routines are generic over.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, NumAssign, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field elements used for weights, vectors and series terms.
///
/// Implemented for `f32`, `f64` and [`BigRational`]. Exact scalars compare
/// against zero exactly; floats use [`Scalar::zero_tolerance`].
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + NumAssign + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Relative threshold under which a pivot or a sign test counts as zero.
    fn zero_tolerance() -> Self;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Tolerance derived from a user-facing `f64` value; zero in exact mode.
    fn tolerance_from(tol: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(tol).unwrap_or_else(Self::zero)
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn zero_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn zero_tolerance() -> Self {
        1e-4
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(x)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn zero_tolerance() -> Self {
        BigRational::zero()
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(r) {
        if x.is_finite() {
            return x;
        }
    }
    // Huge numerators and denominators: shift both to a common scale first.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Parses `p/q`, an integer, or a decimal with optional exponent into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("not a number: `{text}`"));
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Parses a number directly into the scalar type.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S> {
    parse_rational(text).map(|r| S::from_rational(&r))
}

/// `base^n` by repeated squaring.
pub fn powi<S: Scalar>(base: &S, mut n: u64) -> S {
    let mut acc = S::one();
    let mut sq = base.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc *= sq.clone();
        }
        n >>= 1;
        if n > 0 {
            sq = sq.clone() * sq;
        }
    }
    acc
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, tol: &S) -> bool {
    let scale = S::one().max_of(a.abs()).max_of(b.abs());
    (a.clone() - b.clone()).abs() <= tol.clone() * scale
}
