//! Scalar types used for measures, ratios and bounds.
//!
//! Everything that carries a measure is generic over [`Scalar`]. The exact
//! instantiation ([`crate::Rational`]) is what the checks run on; the float
//! instantiations exist for quick exploratory runs where exactness is not
//! needed.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseScalarError;

/// Number type carrying measures and boundary ratios.
pub trait Scalar:
    num_traits::Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// `true` when arithmetic is exact, so equality tests are meaningful.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn to_f64(&self) -> f64;

    /// Equality for exact types, closeness (1e-9 relative) for floats.
    fn same_as(&self, other: &Self) -> bool;

    /// Enclosure `[lo, hi]` of `self^(1/root)` for `self >= 0`.
    ///
    /// Exact types return a degenerate interval when the root is rational and
    /// otherwise an interval of width at most `2^-bits`. Floats return
    /// `powf` twice.
    fn root_enclosure(&self, root: u32, bits: u32) -> (Self, Self);

    /// Parses `"p/q"`, `"p"` or a decimal literal.
    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError>;

    /// Integer representation of a list of nonnegative values over a common
    /// unit: `values[i] == ints[i] * unit`. Only exact types can do this.
    fn common_unit(values: &[Self]) -> Option<(Vec<u64>, Self)>;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

/// Outcome of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Verdict {
    Holds,
    Violated,
    /// The instance lies outside the range where the statement applies.
    OutOfWindow,
    /// Enclosures were too wide to decide at the maximum precision tried.
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::OutOfWindow => "out-of-window",
            Verdict::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// Closed interval `[lo, hi]` enclosing a possibly irrational value.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<Q> {
    pub lo: Q,
    pub hi: Q,
}

impl<Q: Scalar> Interval<Q> {
    pub fn point(x: Q) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Interval {
            lo: self.lo.clone() + other.lo.clone(),
            hi: self.hi.clone() + other.hi.clone(),
        }
    }

    /// Product of two nonnegative intervals.
    pub fn mul(&self, other: &Self) -> Self {
        Interval {
            lo: self.lo.clone() * other.lo.clone(),
            hi: self.hi.clone() * other.hi.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Interval {
            lo: self.lo.clone() * c.clone(),
            hi: self.hi.clone() * c.clone(),
        }
    }

    /// `[lo, hi]^(num/den)` for a nonnegative interval.
    pub fn pow_ratio(&self, num: u32, den: u32, bits: u32) -> Self {
        let lo = powi(&self.lo, num).root_enclosure(den, bits).0;
        let hi = powi(&self.hi, num).root_enclosure(den, bits).1;
        Interval { lo, hi }
    }

    /// Decides `lhs <= self`.
    pub fn ge_verdict(&self, lhs: &Q) -> Verdict {
        if *lhs <= self.lo {
            Verdict::Holds
        } else if *lhs > self.hi {
            Verdict::Violated
        } else {
            Verdict::Undecided
        }
    }

    /// Decides `self <= rhs`.
    pub fn le_verdict(&self, rhs: &Q) -> Verdict {
        if self.hi <= *rhs {
            Verdict::Holds
        } else if self.lo > *rhs {
            Verdict::Violated
        } else {
            Verdict::Undecided
        }
    }
}

/// Precisions (bits) tried in turn by certified comparisons.
pub const PRECISION_LADDER: [u32; 4] = [32, 96, 256, 1024];

/// Rational exponent `p = num/den > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub fn new(num: u32, den: u32) -> Result<Self, ParseScalarError> {
        if den == 0 || num <= den {
            return Err(ParseScalarError(format!("{num}/{den} (need p > 1)")));
        }
        let g = num.gcd(&den);
        Ok(Exponent {
            num: num / g,
            den: den / g,
        })
    }

    /// Hölder conjugate `q = p/(p-1)`.
    pub fn conjugate(&self) -> Exponent {
        Exponent {
            num: self.num,
            den: self.num - self.den,
        }
    }

    pub fn value<Q: Scalar>(&self) -> Q {
        Q::from_ratio(self.num as i64, self.den as i64)
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Exponent {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseScalarError(s.to_string());
        let (n, d) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        Exponent::new(n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?)
    }
}

/// Integer power by repeated squaring.
pub fn powi<Q: Scalar>(base: &Q, exp: u32) -> Q {
    num_traits::pow(base.clone(), exp as usize)
}

/// Renders an exact rational as `p/q` (or `p` when the denominator is 1).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        // numerator and denominator may exceed f64 range individually
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
        let shift = self.denom().bits().max(self.numer().bits()) as i64 - 60;
        let scale = BigInt::one() << shift.max(0) as usize;
        let n = (self.numer() / &scale).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() / &scale).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn same_as(&self, other: &Self) -> bool {
        self == other
    }

    fn root_enclosure(&self, root: u32, bits: u32) -> (Self, Self) {
        rational_root_enclosure(self, root, bits)
    }

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }

    fn common_unit(values: &[Self]) -> Option<(Vec<u64>, Self)> {
        let mut den = BigInt::one();
        for v in values {
            if v.is_negative() {
                return None;
            }
            den = den.lcm(v.denom());
        }
        let ints = values
            .iter()
            .map(|v| (v.numer() * (&den / v.denom())).to_u64())
            .collect::<Option<Vec<u64>>>()?;
        Some((ints, BigRational::new(BigInt::one(), den)))
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn same_as(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                (self - other).abs() <= 1e-9 as $t * scale
            }

            fn root_enclosure(&self, root: u32, _bits: u32) -> (Self, Self) {
                let r = self.powf(1.0 / root as $t);
                (r, r)
            }

            fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
                let q = parse_rational(s)?;
                Ok(Scalar::to_f64(&q) as $t)
            }

            fn common_unit(_values: &[Self]) -> Option<(Vec<u64>, Self)> {
                None
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let s = s.trim();
    let bad = || ParseScalarError(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = int_part.abs() * &den + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, den));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// Exact integer k-th root when `n` is a perfect k-th power.
fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

fn rational_root_enclosure(x: &BigRational, root: u32, bits: u32) -> (BigRational, BigRational) {
    assert!(!x.is_negative(), "root of a negative value");
    assert!(root >= 1);
    if root == 1 || x.is_zero() {
        return (x.clone(), x.clone());
    }
    if let (Some(n), Some(d)) = (exact_int_root(x.numer(), root), exact_int_root(x.denom(), root)) {
        let r = BigRational::new(n, d);
        return (r.clone(), r);
    }
    // floor(x * 2^(bits*root))^(1/root) / 2^bits brackets the root
    let scale = BigInt::one() << (bits as usize * root as usize);
    let scaled = (x.numer() * &scale) / x.denom();
    let lo_int = scaled.nth_root(root);
    let unit = BigInt::one() << bits as usize;
    let lo = BigRational::new(lo_int.clone(), unit.clone());
    let hi = BigRational::new(lo_int + 1, unit);
    (lo, hi)
}
