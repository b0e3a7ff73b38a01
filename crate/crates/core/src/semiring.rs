//! Coefficient semirings for finite distributions.
//!
//! Two semirings are supported: nonnegative rationals (exact, via
//! [`BigRational`]) and the Boolean semiring (`or` / `and`). Both are
//! semifields.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational arithmetic used throughout the crate.
pub type Rational = BigRational;

/// Shorthand constructor for `num / den`.
///
/// Panics if `den == 0`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A commutative semiring usable as distribution weights.
pub trait Semiring: Clone + Ord + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// Multiplicative inverse of a nonzero element, `None` for zero.
    fn inverse(&self) -> Option<Self>;

    /// Whether the value may appear as a weight (nonnegativity for rationals).
    fn is_admissible(&self) -> bool;

    /// Canonical text form used by the JSON schemas.
    fn to_canonical(&self) -> String;

    fn parse_canonical(text: &str) -> Result<Self>;

    fn sum<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc.add(x))
    }
}

impl Semiring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_one(&self) -> bool {
        One::is_one(self)
    }

    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }

    fn is_admissible(&self) -> bool {
        !self.is_negative()
    }

    fn to_canonical(&self) -> String {
        format_rational(self)
    }

    fn parse_canonical(text: &str) -> Result<Self> {
        parse_rational(text)
    }
}

/// Rationals with machine-word parts. Exact as long as nothing overflows,
/// which is the case for the small matrices in exhaustive law checks.
pub type SmallRational = Ratio<i64>;

impl Semiring for SmallRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_one(&self) -> bool {
        One::is_one(self)
    }

    fn inverse(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }

    fn is_admissible(&self) -> bool {
        !self.is_negative()
    }

    fn to_canonical(&self) -> String {
        self.to_string()
    }

    fn parse_canonical(text: &str) -> Result<Self> {
        text.trim().parse().map_err(|_| Error::Parse(format!("invalid rational {text:?}")))
    }
}

impl Semiring for bool {
    fn zero() -> Self {
        false
    }

    fn one() -> Self {
        true
    }

    fn add(&self, other: &Self) -> Self {
        *self || *other
    }

    fn mul(&self, other: &Self) -> Self {
        *self && *other
    }

    fn inverse(&self) -> Option<Self> {
        if *self {
            Some(true)
        } else {
            None
        }
    }

    fn is_admissible(&self) -> bool {
        true
    }

    fn to_canonical(&self) -> String {
        if *self { "1" } else { "0" }.to_string()
    }

    fn parse_canonical(text: &str) -> Result<Self> {
        match text.trim() {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(Error::Parse(format!("invalid Boolean weight {other:?}"))),
        }
    }
}

/// Lowest-terms text form: `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    // BigRational keeps itself reduced with a positive denominator.
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"n"` or `"n/d"`; the result is reduced.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Checks that `weights` is a convex vector: admissible entries summing to one.
pub fn is_convex_vector<S: Semiring>(weights: &[S]) -> bool {
    weights.iter().all(S::is_admissible) && S::sum(weights).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_is_canonical() {
        assert_eq!(format_rational(&parse_rational("4/6").unwrap()), "2/3");
        assert_eq!(format_rational(&parse_rational("3/3").unwrap()), "1");
        assert_eq!(format_rational(&parse_rational("0/5").unwrap()), "0");
        assert_eq!(format_rational(&parse_rational(" 7 ").unwrap()), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn boolean_semiring_is_or_and() {
        assert!(true.add(&false));
        assert!(!false.add(&false));
        assert!(!true.mul(&false));
        assert_eq!(true.inverse(), Some(true));
        assert_eq!(false.inverse(), None);
    }

    #[test]
    fn rational_inverse_and_admissibility() {
        assert_eq!(q(2, 3).inverse(), Some(q(3, 2)));
        assert_eq!(Semiring::inverse(&qi(0)), None);
        assert!(!q(-1, 2).is_admissible());
        assert!(is_convex_vector(&[q(1, 3), q(2, 3)]));
        assert!(!is_convex_vector(&[q(1, 2), q(1, 3)]));
        assert!(!is_convex_vector(&[q(3, 2), q(-1, 2)]));
    }
}
