//! Numeric kernel: the [`Scalar`] abstraction shared by series arithmetic,
//! conditional-law tables and the conditioned samplers.
//!
//! Two instantiations matter in practice:
//!
//! * [`ScaledRat`]: an exact rational mantissa together with a symbolic
//!   power of a fixed positive scale constant (e.g. the normalizing constant
//!   `c` of an exponential-type family). Within one offspring family every
//!   weight carries the same scale power, so sums only ever combine equal
//!   powers and every ratio of equal-length products is an exact rational.
//! * [`LogWeight`]: a nonnegative quantity stored as its natural logarithm.
//!   Used where exact arithmetic is unavailable (power-law weights) or
//!   impractical (coefficient probes at large order).
//!
//! `f64` also implements [`Scalar`] for small cross-checks.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use rand::Rng;

/// Natural log of a positive rational whose numerator/denominator may far
/// exceed `f64` range.
pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln_rational requires a positive argument");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 52 {
        return (mag.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 52;
    let top = (mag >> shift).to_u64().unwrap() as f64;
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Common interface for coefficient/weight arithmetic.
///
/// Only the ring operations actually used by the engine are required; on the
/// log-space side `sub` is partial (the result must stay nonnegative) and is
/// never exercised by the sampling or convolution paths.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Whether bulk weight construction should go through the float log
    /// recurrences instead of exact rational prefixes.
    const PREFERS_LN: bool;

    /// Build from a rational mantissa carrying `scale_pow` powers of the
    /// family scale constant, whose natural log is `ln_scale`.
    fn from_weight(rat: &BigRational, scale_pow: i64, ln_scale: f64) -> Self;

    /// Build from a natural logarithm alone. `None` when the scalar cannot
    /// represent such a value exactly.
    fn try_from_ln(ln: f64) -> Option<Self>;

    fn from_u64(v: u64) -> Self;

    /// Natural log of the value (must be nonnegative; zero maps to -inf).
    fn ln_approx(&self) -> f64;

    /// Draw an index `i` with probability `(cum[i] - cum[i-1]) / total`,
    /// where `cum` is a nondecreasing cumulative-weight vector and
    /// `total = cum[last]`. Exact scalars must make the draw exact in
    /// distribution.
    fn inverse_cdf_index<R: Rng + ?Sized>(cum: &[Self], rng: &mut R) -> usize;
}

/// Exact rational mantissa times `scale^pow` for a symbolic positive scale.
///
/// Addition and comparison require equal powers (zero unifies with any
/// power); multiplication and division combine powers. This makes mixed-power
/// sums a programming error rather than a silent loss of exactness.
#[derive(Clone, PartialEq, Debug)]
pub struct ScaledRat {
    rat: BigRational,
    pow: i64,
}

impl ScaledRat {
    pub fn new(rat: BigRational, pow: i64) -> Self {
        if rat.is_zero() {
            ScaledRat { rat, pow: 0 }
        } else {
            ScaledRat { rat, pow }
        }
    }

    pub fn from_rational(rat: BigRational) -> Self {
        Self::new(rat, 0)
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rational(&self) -> &BigRational {
        &self.rat
    }

    pub fn scale_pow(&self) -> i64 {
        self.pow
    }

    /// Exact ratio of two values whose scale powers cancel.
    pub fn ratio_to(&self, other: &ScaledRat) -> BigRational {
        let q = self.clone() / other.clone();
        assert_eq!(q.pow, 0, "scale powers do not cancel in ratio");
        q.rat
    }

    fn unify_pow(&self, other: &Self) -> i64 {
        if self.rat.is_zero() {
            other.pow
        } else if other.rat.is_zero() {
            self.pow
        } else {
            assert_eq!(
                self.pow, other.pow,
                "cannot combine scaled rationals with different scale powers"
            );
            self.pow
        }
    }
}

impl Add for ScaledRat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let pow = self.unify_pow(&rhs);
        ScaledRat::new(self.rat + rhs.rat, pow)
    }
}

impl Sub for ScaledRat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let pow = self.unify_pow(&rhs);
        ScaledRat::new(self.rat - rhs.rat, pow)
    }
}

impl Mul for ScaledRat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.rat.is_zero() || rhs.rat.is_zero() {
            return ScaledRat::zero();
        }
        ScaledRat::new(self.rat * rhs.rat, self.pow + rhs.pow)
    }
}

impl Div for ScaledRat {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.rat.is_zero(), "division by zero scaled rational");
        ScaledRat::new(self.rat / rhs.rat, self.pow - rhs.pow)
    }
}

impl Zero for ScaledRat {
    fn zero() -> Self {
        ScaledRat {
            rat: BigRational::zero(),
            pow: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }
}

impl One for ScaledRat {
    fn one() -> Self {
        ScaledRat {
            rat: BigRational::one(),
            pow: 0,
        }
    }
}

impl PartialOrd for ScaledRat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.unify_pow(other);
        self.rat.partial_cmp(&other.rat)
    }
}

impl Scalar for ScaledRat {
    const PREFERS_LN: bool = false;

    fn from_weight(rat: &BigRational, scale_pow: i64, _ln_scale: f64) -> Self {
        ScaledRat::new(rat.clone(), scale_pow)
    }

    fn try_from_ln(_ln: f64) -> Option<Self> {
        None
    }

    fn from_u64(v: u64) -> Self {
        ScaledRat::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    fn ln_approx(&self) -> f64 {
        if self.rat.is_zero() {
            f64::NEG_INFINITY
        } else {
            // scale contribution is symbolic; callers needing a numeric value
            // must add pow * ln(scale) themselves
            ln_rational(&self.rat.abs())
        }
    }

    fn inverse_cdf_index<R: Rng + ?Sized>(cum: &[Self], rng: &mut R) -> usize {
        // Exact inverse CDF: compare a lazily refined dyadic uniform
        // u = a / 2^bits against the rational cumulative weights. Refine
        // until the dyadic interval [a, a+1) / 2^bits contains no boundary.
        let total = cum.last().expect("empty cumulative vector");
        assert!(total.rat.is_positive(), "total weight must be positive");
        let pow = total.pow;
        for c in cum {
            assert!(c.rat.is_zero() || c.pow == pow);
        }
        let (tn, td) = (total.rat.numer(), total.rat.denom());

        let mut a = BigUint::from(rng.gen::<u64>());
        let mut bits = 64u64;
        loop {
            // chosen index = smallest i with u*total < c_i, where
            // u in [a, a+1)/2^bits. Unambiguous when both interval ends give
            // the same index:  c_i > x*tn/td  <=>  (p_i*td) << bits > x*tn*q_i
            let lo = BigInt::from_biguint(Sign::Plus, a.clone()) * tn;
            let hi = BigInt::from_biguint(Sign::Plus, &a + 1u32) * tn;
            let first_above = |bound: &BigInt| -> usize {
                cum.partition_point(|c| {
                    let (p, q) = (c.rat.numer(), c.rat.denom());
                    ((p * td) << bits) <= bound * q
                })
            };
            let i_lo = first_above(&lo);
            let i_hi = first_above(&hi);
            if i_lo == i_hi {
                return i_lo.min(cum.len() - 1);
            }
            a = (a << 64) | BigUint::from(rng.gen::<u64>());
            bits += 64;
        }
    }
}

/// A nonnegative quantity represented by its natural logarithm.
#[derive(Clone, Copy, PartialEq, PartialOrd, Debug)]
pub struct LogWeight {
    ln: f64,
}

impl LogWeight {
    pub fn from_ln(ln: f64) -> Self {
        LogWeight { ln }
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }
}

impl Add for LogWeight {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        // log-sum-exp
        if self.ln == f64::NEG_INFINITY {
            return rhs;
        }
        if rhs.ln == f64::NEG_INFINITY {
            return self;
        }
        let (hi, lo) = if self.ln >= rhs.ln {
            (self.ln, rhs.ln)
        } else {
            (rhs.ln, self.ln)
        };
        LogWeight {
            ln: hi + (lo - hi).exp().ln_1p(),
        }
    }
}

impl Sub for LogWeight {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        if rhs.ln == f64::NEG_INFINITY {
            return self;
        }
        debug_assert!(self.ln >= rhs.ln, "log-space subtraction would go negative");
        if self.ln == rhs.ln {
            return LogWeight::zero();
        }
        LogWeight {
            ln: self.ln + (-(rhs.ln - self.ln).exp()).ln_1p(),
        }
    }
}

impl Mul for LogWeight {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.ln == f64::NEG_INFINITY || rhs.ln == f64::NEG_INFINITY {
            return LogWeight::zero();
        }
        LogWeight {
            ln: self.ln + rhs.ln,
        }
    }
}

impl Div for LogWeight {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)] // log space: quotient is a difference
    fn div(self, rhs: Self) -> Self {
        LogWeight {
            ln: self.ln - rhs.ln,
        }
    }
}

impl Zero for LogWeight {
    fn zero() -> Self {
        LogWeight {
            ln: f64::NEG_INFINITY,
        }
    }
    fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }
}

impl One for LogWeight {
    fn one() -> Self {
        LogWeight { ln: 0.0 }
    }
}

impl Scalar for LogWeight {
    const PREFERS_LN: bool = true;

    fn from_weight(rat: &BigRational, scale_pow: i64, ln_scale: f64) -> Self {
        if rat.is_zero() {
            return LogWeight::zero();
        }
        assert!(rat.is_positive(), "log-space weights must be nonnegative");
        LogWeight {
            ln: ln_rational(rat) + scale_pow as f64 * ln_scale,
        }
    }

    fn try_from_ln(ln: f64) -> Option<Self> {
        Some(LogWeight { ln })
    }

    fn from_u64(v: u64) -> Self {
        if v == 0 {
            LogWeight::zero()
        } else {
            LogWeight {
                ln: (v as f64).ln(),
            }
        }
    }

    fn ln_approx(&self) -> f64 {
        self.ln
    }

    fn inverse_cdf_index<R: Rng + ?Sized>(cum: &[Self], rng: &mut R) -> usize {
        let total = cum.last().expect("empty cumulative vector").ln;
        assert!(total > f64::NEG_INFINITY);
        let target = rng.gen::<f64>().ln() + total;
        cum.partition_point(|c| c.ln <= target).min(cum.len() - 1)
    }
}

impl Scalar for f64 {
    const PREFERS_LN: bool = true;

    fn from_weight(rat: &BigRational, scale_pow: i64, ln_scale: f64) -> Self {
        if rat.is_zero() {
            return 0.0;
        }
        let sign = if rat.is_negative() { -1.0 } else { 1.0 };
        sign * (ln_rational(&rat.abs()) + scale_pow as f64 * ln_scale).exp()
    }

    fn try_from_ln(ln: f64) -> Option<Self> {
        Some(ln.exp())
    }

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn ln_approx(&self) -> f64 {
        self.abs().ln()
    }

    fn inverse_cdf_index<R: Rng + ?Sized>(cum: &[Self], rng: &mut R) -> usize {
        let total = *cum.last().expect("empty cumulative vector");
        let target = rng.gen::<f64>() * total;
        cum.partition_point(|c| *c <= target).min(cum.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn scaled_rat_ops_track_powers() {
        let a = ScaledRat::new(rat(1, 2), 1);
        let b = ScaledRat::new(rat(1, 3), 1);
        let s = a.clone() + b.clone();
        assert_eq!(s, ScaledRat::new(rat(5, 6), 1));
        let p = a.clone() * b.clone();
        assert_eq!(p.scale_pow(), 2);
        let q = p / a;
        assert_eq!(q, b);
    }

    #[test]
    #[should_panic(expected = "different scale powers")]
    fn scaled_rat_mixed_power_add_panics() {
        let a = ScaledRat::new(rat(1, 2), 1);
        let b = ScaledRat::new(rat(1, 3), 0);
        let _ = a + b;
    }

    #[test]
    fn zero_unifies_with_any_power() {
        let z = ScaledRat::zero();
        let a = ScaledRat::new(rat(2, 7), 3);
        assert_eq!(z + a.clone(), a);
    }

    #[test]
    fn ln_rational_handles_huge_values() {
        // 2^200 / 3^50
        let big = BigRational::new(BigInt::from(1) << 200, BigInt::from(3).pow(50));
        let expect = 200.0 * std::f64::consts::LN_2 - 50.0 * 3f64.ln();
        assert!((ln_rational(&big) - expect).abs() < 1e-9);
    }

    #[test]
    fn log_weight_sum_matches_linear() {
        let a = LogWeight::from_ln(0.3f64.ln());
        let b = LogWeight::from_ln(0.4f64.ln());
        assert!(((a + b).ln() - 0.7f64.ln()).abs() < 1e-12);
        assert!(((b - a).ln() - 0.1f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn exact_inverse_cdf_matches_frequencies() {
        // weights 1,2,5 -> cumulative 1,3,8
        let cum = vec![
            ScaledRat::from_int(1),
            ScaledRat::from_int(3),
            ScaledRat::from_int(8),
        ];
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut counts = [0u32; 3];
        let n = 40_000;
        for _ in 0..n {
            counts[ScaledRat::inverse_cdf_index(&cum, &mut rng)] += 1;
        }
        let exp = [n as f64 / 8.0, n as f64 * 2.0 / 8.0, n as f64 * 5.0 / 8.0];
        for i in 0..3 {
            let sd = (exp[i] * (1.0 - exp[i] / n as f64)).sqrt();
            assert!(
                (counts[i] as f64 - exp[i]).abs() < 4.0 * sd,
                "bucket {i}: got {} want {}",
                counts[i],
                exp[i]
            );
        }
    }

    #[test]
    fn log_inverse_cdf_matches_frequencies() {
        let w: Vec<LogWeight> = [1.0f64, 2.0, 5.0]
            .iter()
            .map(|x| LogWeight::from_ln(x.ln()))
            .collect();
        let mut cum = Vec::new();
        let mut acc = LogWeight::zero();
        for x in &w {
            acc = acc + *x;
            cum.push(acc);
        }
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let mut counts = [0u32; 3];
        let n = 40_000;
        for _ in 0..n {
            counts[LogWeight::inverse_cdf_index(&cum, &mut rng)] += 1;
        }
        assert!((counts[2] as f64 / n as f64 - 0.625).abs() < 0.02);
    }
}
