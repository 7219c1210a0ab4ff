//! Coefficient domains.
//!
//! Identities that hold exactly are checked with [`BigRational`]; the
//! randomized estimators run in `f64`.

use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{NumOps, One, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + PartialEq + Zero + One + NumOps + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_biguint(n: &BigUint) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool {
        true
    }

    /// Sum of a sequence of terms. Floating point overrides this with
    /// compensated summation.
    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    /// Text form that [`Scalar::parse_text`] reads back exactly.
    fn to_text(&self) -> String;

    fn parse_text(s: &str) -> Option<Self>;
}

impl Scalar for f64 {
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let mut acc = NeumaierSum::default();
        for t in terms {
            acc.add(t);
        }
        acc.value()
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn parse_text(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Scalar for BigRational {
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_text(&self) -> String {
        self.to_string()
    }

    fn parse_text(s: &str) -> Option<Self> {
        BigRational::from_str(s).ok()
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
