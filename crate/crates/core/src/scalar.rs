//! Numeric abstraction shared by models, equation systems and solvers.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A probability-valued scalar: `f64`, `f32`, or an exact rational.
///
/// Everything from grammar parsing to Gaussian elimination is written against
/// this trait. Diagnostics that are inherently approximate (spectral radius
/// estimates) are computed in `f64` after conversion.
pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Parses a decimal literal such as `0.4`, `1`, `.25` or `3e-2`.
    fn parse_decimal(s: &str) -> Option<Self>;

    /// Machine epsilon of the representation; zero for exact types.
    fn epsilon_f64() -> f64;

    fn is_exact() -> bool {
        Self::epsilon_f64() == 0.0
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, 16 ulp)`; lets f32 models pass checks pinned for f64.
    fn tolerance(tol: f64) -> Self {
        Self::from_f64_lossy(tol.max(16.0 * Self::epsilon_f64()))
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn epsilon_f64() -> f64 {
        f64::EPSILON
    }
}

impl Scalar for f32 {
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse::<f32>().ok().filter(|v| v.is_finite())
    }

    fn epsilon_f64() -> f64 {
        f32::EPSILON as f64
    }
}

/// Exact rational arithmetic. Fine for small systems; numerators and
/// denominators are fixed-width, so long fixpoint runs will overflow.
pub type Rational = Ratio<i128>;

impl Scalar for Rational {
    fn parse_decimal(s: &str) -> Option<Self> {
        parse_decimal_ratio(s)
    }

    fn epsilon_f64() -> f64 {
        0.0
    }

    fn from_f64_lossy(x: f64) -> Self {
        Ratio::approximate_float(x).expect("finite f64 is representable")
    }
}

fn parse_decimal_ratio(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let scale = exp.checked_sub(frac_part.len() as i32)?;
    let mut denom: i128 = 1;
    if scale >= 0 {
        numer = numer.checked_mul(10i128.checked_pow(scale as u32)?)?;
    } else {
        denom = 10i128.checked_pow((-scale) as u32)?;
    }
    if neg {
        numer = -numer;
    }
    Some(Ratio::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_decimal_literals() {
        assert_eq!(Rational::parse_decimal("0.4"), Some(Ratio::new(2, 5)));
        assert_eq!(Rational::parse_decimal("1"), Some(Ratio::from_integer(1)));
        assert_eq!(Rational::parse_decimal(".25"), Some(Ratio::new(1, 4)));
        assert_eq!(Rational::parse_decimal("3e-2"), Some(Ratio::new(3, 100)));
        assert_eq!(Rational::parse_decimal("1.5E1"), Some(Ratio::from_integer(15)));
        assert_eq!(Rational::parse_decimal("abc"), None);
        assert_eq!(Rational::parse_decimal("."), None);
    }

    #[test]
    fn float_literals_reject_non_finite() {
        assert_eq!(f64::parse_decimal("0.3"), Some(0.3));
        assert_eq!(f64::parse_decimal("inf"), None);
        assert_eq!(f32::parse_decimal("NaN"), None);
    }

    #[test]
    fn tolerance_floor_scales_with_precision() {
        assert_eq!(f64::tolerance(1e-9), 1e-9);
        assert!(f32::tolerance(1e-9) > 1e-7);
        assert!(Rational::tolerance(1e-9) > Rational::from_integer(0));
    }
}
