//! Offspring-weight families.
//!
//! Each family provides *unnormalized exact-rational* weights, optionally
//! carrying one power of a fixed positive scale constant per weight (the
//! exponential-type family's normalizer). Every conditional law computed in
//! this crate is a ratio of sums of products of equally many weights, so the
//! scale token and any missing normalization cancel; this is what keeps the
//! exponential-type family fully exact and lets the power-law family (whose
//! weights are genuinely irrational) participate through log-space floats.
//!
//! Textual form, used by the CLI:
//!
//! ```text
//! geometric:p=1/2
//! polyexp:a=[1]               (weights ~ exp(a1 z + a2 z^2 + ...))
//! stabletail:alpha=3/2,m=0,c=1/2
//! powerlaw:beta=3/2,c=1,w0=1/2
//! finite:[1/2,0,1/2]
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::scalar::{ln_rational, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("parse error at position {pos}: {reason}")]
    Parse { pos: usize, reason: String },
    #[error("exact arithmetic unavailable for {0}")]
    ExactUnavailable(&'static str),
}

/// Which biconditioning a family is asked to support.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Conditioning {
    /// fixed number of leaves (requires weight(1) > 0)
    Leaves,
    /// fixed number of internal nodes (requires weight(0) > 0)
    Internal,
}

/// An offspring-weight family.
#[derive(Clone, PartialEq, Debug)]
pub enum OffspringWeights {
    /// Arbitrary nonnegative rational weights on a finite support.
    Finite { weights: Vec<BigRational> },
    /// w(i) = p (1-p)^i.
    Geometric { p: BigRational },
    /// w(i) = scale * [z^i] exp(P(z)), P(z) = sum a_j z^j, scale = exp(-P(1)).
    PolyExp { a: Vec<BigRational> },
    /// w(i) = [z^i] ( z - m z + m z^2 + c (1-z)^alpha ), alpha in (1,2).
    StableTail {
        alpha: BigRational,
        m: BigRational,
        c: BigRational,
    },
    /// w(0) = w0, w(i) = c / i^(1+beta) for i >= 1; exact form unavailable.
    PowerLaw {
        beta: BigRational,
        c: BigRational,
        w0: BigRational,
    },
}

fn rat_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl OffspringWeights {
    pub fn finite(weights: Vec<BigRational>) -> Result<Self, FamilyError> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(FamilyError::InvalidParam("negative weight".into()));
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(FamilyError::InvalidParam("all weights zero".into()));
        }
        Ok(OffspringWeights::Finite { weights })
    }

    pub fn geometric(p: BigRational) -> Result<Self, FamilyError> {
        if !p.is_positive() || p >= BigRational::one() {
            return Err(FamilyError::InvalidParam("geometric needs 0 < p < 1".into()));
        }
        Ok(OffspringWeights::Geometric { p })
    }

    pub fn polyexp(a: Vec<BigRational>) -> Result<Self, FamilyError> {
        let mut a = a;
        while a.last().is_some_and(|x| x.is_zero()) {
            a.pop();
        }
        if a.is_empty() {
            return Err(FamilyError::InvalidParam("polyexp needs a nonzero polynomial".into()));
        }
        if a.iter().any(|x| x.is_negative()) {
            return Err(FamilyError::InvalidParam("polyexp coefficients must be >= 0".into()));
        }
        let mut g = 0u64;
        for (j, x) in a.iter().enumerate() {
            if !x.is_zero() {
                g = gcd_u64(g, (j + 1) as u64);
            }
        }
        if g != 1 {
            return Err(FamilyError::InvalidParam(format!(
                "polyexp exponent gcd is {g}, must be 1"
            )));
        }
        Ok(OffspringWeights::PolyExp { a })
    }

    pub fn stable_tail(
        alpha: BigRational,
        m: BigRational,
        c: BigRational,
    ) -> Result<Self, FamilyError> {
        if alpha <= BigRational::one() || alpha >= rat_u64(2) {
            return Err(FamilyError::InvalidParam("stabletail needs 1 < alpha < 2".into()));
        }
        if m <= -BigRational::one() {
            return Err(FamilyError::InvalidParam("stabletail needs m > -1".into()));
        }
        if !c.is_positive() {
            return Err(FamilyError::InvalidParam("stabletail needs c > 0".into()));
        }
        let w1 = BigRational::one() - &m - &c * &alpha;
        if w1.is_negative() {
            return Err(FamilyError::InvalidParam("stabletail needs 1 - m - c*alpha >= 0".into()));
        }
        let w2 = &m + &c * &alpha * (&alpha - BigRational::one()) / rat_u64(2);
        if w2.is_negative() {
            return Err(FamilyError::InvalidParam(
                "stabletail needs m + c*alpha*(alpha-1)/2 >= 0".into(),
            ));
        }
        Ok(OffspringWeights::StableTail { alpha, m, c })
    }

    pub fn power_law(
        beta: BigRational,
        c: BigRational,
        w0: BigRational,
    ) -> Result<Self, FamilyError> {
        if beta <= BigRational::one() {
            return Err(FamilyError::InvalidParam("powerlaw needs beta > 1".into()));
        }
        if !c.is_positive() {
            return Err(FamilyError::InvalidParam("powerlaw needs c > 0".into()));
        }
        if w0.is_negative() {
            return Err(FamilyError::InvalidParam("powerlaw needs w0 >= 0".into()));
        }
        Ok(OffspringWeights::PowerLaw { beta, c, w0 })
    }

    /// Power of the scale constant carried by every weight (uniform within a
    /// family, so equal-length products have equal powers).
    pub fn scale_pow_per_weight(&self) -> i64 {
        match self {
            OffspringWeights::PolyExp { .. } => 1,
            _ => 0,
        }
    }

    /// Natural log of the scale constant.
    pub fn ln_scale(&self) -> f64 {
        match self {
            OffspringWeights::PolyExp { a } => {
                // scale = exp(-P(1))
                -a.iter()
                    .map(|x| x.to_f64().expect("small rational"))
                    .sum::<f64>()
            }
            _ => 0.0,
        }
    }

    /// Largest index with nonzero weight, when the support is finite.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            OffspringWeights::Finite { weights } => {
                weights.iter().rposition(|w| !w.is_zero())
            }
            _ => None,
        }
    }

    /// Rational parts of weights `0..len` (scale power excluded), when the
    /// family admits exact arithmetic.
    pub fn exact_weight_prefix(&self, len: usize) -> Option<Vec<BigRational>> {
        let mut out = Vec::with_capacity(len);
        match self {
            OffspringWeights::Finite { weights } => {
                for i in 0..len {
                    out.push(weights.get(i).cloned().unwrap_or_else(BigRational::zero));
                }
            }
            OffspringWeights::Geometric { p } => {
                let q = BigRational::one() - p;
                let mut w = p.clone();
                for _ in 0..len {
                    out.push(w.clone());
                    w *= &q;
                }
            }
            OffspringWeights::PolyExp { a } => {
                // n f_n = sum_{j=1}^{min(p,n)} j a_j f_{n-j},  f_0 = 1
                let p = a.len();
                for n in 0..len {
                    if n == 0 {
                        out.push(BigRational::one());
                        continue;
                    }
                    let mut s = BigRational::zero();
                    for j in 1..=p.min(n) {
                        if a[j - 1].is_zero() {
                            continue;
                        }
                        s += rat_u64(j as u64) * &a[j - 1] * &out[n - j];
                    }
                    out.push(s / rat_u64(n as u64));
                }
            }
            OffspringWeights::StableTail { alpha, m, c } => {
                // binom(alpha, i) via the ratio recurrence
                let mut binom = BigRational::one();
                for i in 0..len {
                    let w = match i {
                        0 => c.clone(),
                        1 => BigRational::one() - m - c * alpha,
                        2 => m + c * alpha * (alpha - BigRational::one()) / rat_u64(2),
                        _ => {
                            let signed = if i % 2 == 0 { binom.clone() } else { -binom.clone() };
                            c * signed
                        }
                    };
                    out.push(w);
                    binom = binom * (alpha - rat_u64(i as u64)) / rat_u64(i as u64 + 1);
                }
            }
            OffspringWeights::PowerLaw { .. } => return None,
        }
        Some(out)
    }

    /// Exact weight at a single index (scale power from
    /// [`Self::scale_pow_per_weight`]).
    pub fn exact_weight(&self, i: usize) -> Option<BigRational> {
        self.exact_weight_prefix(i + 1).map(|mut v| v.pop().unwrap())
    }

    /// Natural logs of weights `0..len` (scale folded in numerically).
    /// Computed by per-family float recurrences, so long prefixes stay cheap.
    pub fn ln_weight_prefix(&self, len: usize) -> Vec<f64> {
        let ln_or_ninf = |r: &BigRational| {
            if r.is_zero() {
                f64::NEG_INFINITY
            } else {
                ln_rational(r)
            }
        };
        match self {
            OffspringWeights::Finite { weights } => (0..len)
                .map(|i| weights.get(i).map(&ln_or_ninf).unwrap_or(f64::NEG_INFINITY))
                .collect(),
            OffspringWeights::Geometric { p } => {
                let lp = ln_rational(p);
                let lq = (1.0 - p.to_f64().unwrap()).ln();
                (0..len).map(|i| lp + i as f64 * lq).collect()
            }
            OffspringWeights::PolyExp { a } => {
                // log-space form of n f_n = sum_j j a_j f_{n-j}, then + ln c
                let lc = self.ln_scale();
                let p = a.len();
                let lna: Vec<Option<f64>> = a
                    .iter()
                    .map(|x| if x.is_zero() { None } else { Some(ln_rational(x)) })
                    .collect();
                let mut lf = Vec::with_capacity(len);
                for n in 0..len {
                    if n == 0 {
                        lf.push(0.0);
                        continue;
                    }
                    let terms: Vec<f64> = (1..=p.min(n))
                        .filter_map(|j| lna[j - 1].map(|la| (j as f64).ln() + la + lf[n - j]))
                        .collect();
                    let hi = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    lf.push(
                        hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
                            - (n as f64).ln(),
                    );
                }
                lf.into_iter().map(|l| l + lc).collect()
            }
            OffspringWeights::StableTail { alpha, c, .. } => {
                let small = self.exact_weight_prefix(len.min(3)).unwrap();
                let af = alpha.to_f64().unwrap();
                let lc = ln_rational(c);
                let mut out: Vec<f64> = small.iter().map(ln_or_ninf).collect();
                // ln |binom(alpha, i)| by the ratio recurrence; the signed
                // weight c (-1)^i binom(alpha, i) is positive for i >= 3
                let mut lb = (af * (af - 1.0) / 2.0).abs().ln();
                for i in 2..len {
                    lb += ((af - i as f64).abs() / (i as f64 + 1.0)).ln();
                    if i + 1 >= 3 && i + 1 < len {
                        out.push(lc + lb);
                    }
                }
                out
            }
            OffspringWeights::PowerLaw { beta, c, w0 } => {
                let bf = beta.to_f64().unwrap();
                let lc = ln_rational(c);
                (0..len)
                    .map(|i| {
                        if i == 0 {
                            if w0.is_zero() {
                                f64::NEG_INFINITY
                            } else {
                                ln_rational(w0)
                            }
                        } else {
                            lc - (1.0 + bf) * (i as f64).ln()
                        }
                    })
                    .collect()
            }
        }
    }

    /// Weights `0..len` as any [`Scalar`]. Log-space scalars are built from
    /// the float recurrences; exact scalars require an exact family.
    pub fn weight_prefix<C: Scalar>(&self, len: usize) -> Result<Vec<C>, FamilyError> {
        if C::PREFERS_LN {
            return self
                .ln_weight_prefix(len)
                .into_iter()
                .map(|ln| C::try_from_ln(ln).ok_or(FamilyError::ExactUnavailable("log")))
                .collect();
        }
        match self.exact_weight_prefix(len) {
            Some(rats) => {
                let pow = self.scale_pow_per_weight();
                let ls = self.ln_scale();
                Ok(rats.iter().map(|r| C::from_weight(r, pow, ls)).collect())
            }
            None => Err(FamilyError::ExactUnavailable("powerlaw")),
        }
    }

    /// Is weight(i) > 0?
    pub fn support_contains(&self, i: usize) -> bool {
        match self {
            OffspringWeights::PowerLaw { w0, .. } => i > 0 || !w0.is_zero(),
            OffspringWeights::StableTail { .. } if i >= 3 => true,
            _ => self
                .exact_weight(i)
                .map(|w| !w.is_zero())
                .unwrap_or(false),
        }
    }

    /// Support restricted to `0..=k`.
    pub fn support_upto(&self, k: usize) -> BTreeSet<usize> {
        (0..=k).filter(|&i| self.support_contains(i)).collect()
    }

    /// Mean number of children of the normalized law.
    pub fn mean(&self) -> Mean {
        match self {
            OffspringWeights::Finite { weights } => {
                let total: BigRational = weights.iter().cloned().sum();
                let m: BigRational = weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| rat_u64(i as u64) * w)
                    .sum();
                Mean::Exact(m / total)
            }
            OffspringWeights::Geometric { p } => {
                Mean::Exact((BigRational::one() - p) / p.clone())
            }
            // the (1-z)^alpha term has zero derivative at 1 for alpha > 1
            OffspringWeights::StableTail { m, .. } => Mean::Exact(BigRational::one() + m),
            // F = c exp(P) with F(1) = 1, so the mean is F'(1) = P'(1)
            OffspringWeights::PolyExp { a } => Mean::Exact(
                a.iter()
                    .enumerate()
                    .map(|(j, x)| rat_u64(j as u64 + 1) * x)
                    .sum(),
            ),
            OffspringWeights::PowerLaw { beta, c, w0 } => {
                let bf = beta.to_f64().unwrap();
                let cf = c.to_f64().unwrap();
                let total = w0.to_f64().unwrap() + cf * zeta(1.0 + bf);
                Mean::Approx(cf * zeta(bf) / total)
            }
        }
    }

    /// Check the positivity requirements of the requested conditioning;
    /// returns human-readable violations instead of failing.
    pub fn validate_for(&self, mode: Conditioning) -> Vec<String> {
        let mut v = Vec::new();
        match mode {
            Conditioning::Leaves => {
                if !self.support_contains(1) {
                    v.push("weight(1) = 0: conditioning on leaves is degenerate".into());
                }
            }
            Conditioning::Internal => {
                if !self.support_contains(0) {
                    v.push("weight(0) = 0: conditioning on internal nodes is degenerate".into());
                }
                if self.max_index() == Some(0) {
                    v.push("no weight(j) > 0 with j >= 1".into());
                }
            }
        }
        if let OffspringWeights::StableTail { alpha, m, c } = self {
            if (BigRational::one() - m - c * alpha).is_negative() {
                v.push("1 - m - c*alpha < 0".into());
            }
        }
        v
    }

    /// Total weight of the family in `f64` (1 for the normalized families).
    pub fn total_weight_f64(&self) -> f64 {
        match self {
            OffspringWeights::Finite { weights } => {
                weights.iter().map(|w| w.to_f64().unwrap()).sum()
            }
            OffspringWeights::PowerLaw { beta, c, w0 } => {
                w0.to_f64().unwrap() + c.to_f64().unwrap() * zeta(1.0 + beta.to_f64().unwrap())
            }
            _ => 1.0,
        }
    }

    /// Exact tail sum over `i >= n` for the stable-tail family: the partial
    /// alternating binomial sums telescope to
    /// `c * (-1)^n * binom(alpha-1, n-1)`.
    pub fn stable_tail_sum(&self, n: usize) -> Option<BigRational> {
        let OffspringWeights::StableTail { alpha, m: _, c } = self else {
            return None;
        };
        assert!(n >= 3, "tail formula valid past the polynomial part");
        // binom(alpha-1, n-1) = prod_{j=1}^{n-1} (alpha - j)/j
        let mut b = BigRational::one();
        for j in 1..n {
            b *= (alpha - rat_u64(j as u64)) / rat_u64(j as u64);
        }
        if n % 2 == 1 {
            b = -b;
        }
        Some(c * b)
    }

    /// ln of [`Self::stable_tail_sum`], computed by a float recurrence so it
    /// stays cheap at large `n`.
    pub fn stable_tail_ln_tail(&self, n: usize) -> Option<f64> {
        let OffspringWeights::StableTail { alpha, m: _, c } = self else {
            return None;
        };
        assert!(n >= 3, "tail formula valid past the polynomial part");
        let af = alpha.to_f64().unwrap();
        let mut ln = ln_rational(c);
        for j in 1..n {
            ln += ((af - j as f64).abs() / j as f64).ln();
        }
        Some(ln)
    }
}

/// Mean of a weight family: exact where the algebra allows, float otherwise.
#[derive(Clone, PartialEq, Debug)]
pub enum Mean {
    Exact(BigRational),
    Approx(f64),
}

impl Mean {
    pub fn to_f64(&self) -> f64 {
        match self {
            Mean::Exact(r) => r.to_f64().unwrap(),
            Mean::Approx(x) => *x,
        }
    }
}

/// `zeta(s)` for `s > 1` by direct summation plus an Euler–Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    let cut = 1000usize;
    let head: f64 = (1..cut).map(|i| (i as f64).powf(-s)).sum();
    let j = cut as f64;
    head + j.powf(1.0 - s) / (s - 1.0) + 0.5 * j.powf(-s) + s / 12.0 * j.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * j.powf(-s - 3.0)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

impl fmt::Display for OffspringWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffspringWeights::Finite { weights } => {
                let parts: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "finite:[{}]", parts.join(","))
            }
            OffspringWeights::Geometric { p } => write!(f, "geometric:p={p}"),
            OffspringWeights::PolyExp { a } => {
                let parts: Vec<String> = a.iter().map(|w| w.to_string()).collect();
                write!(f, "polyexp:a=[{}]", parts.join(","))
            }
            OffspringWeights::StableTail { alpha, m, c } => {
                write!(f, "stabletail:alpha={alpha},m={m},c={c}")
            }
            OffspringWeights::PowerLaw { beta, c, w0 } => {
                write!(f, "powerlaw:beta={beta},c={c},w0={w0}")
            }
        }
    }
}

impl FromStr for OffspringWeights {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, FamilyError> {
        Parser { s, pos: 0 }.family()
    }
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, FamilyError> {
        Err(FamilyError::Parse {
            pos: self.pos,
            reason: reason.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn rational(&mut self) -> Result<BigRational, FamilyError> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !matches!(c, '0'..='9' | '-' | '/'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return self.err("expected a rational number");
        }
        let tok = &rest[..end];
        match BigRational::from_str(tok) {
            Ok(r) => {
                self.pos += end;
                Ok(r)
            }
            Err(e) => self.err(format!("bad rational {tok:?}: {e}")),
        }
    }

    fn rational_list(&mut self) -> Result<Vec<BigRational>, FamilyError> {
        if !self.eat("[") {
            return self.err("expected '['");
        }
        let mut out = Vec::new();
        if self.eat("]") {
            return Ok(out);
        }
        loop {
            out.push(self.rational()?);
            if self.eat("]") {
                return Ok(out);
            }
            if !self.eat(",") {
                return self.err("expected ',' or ']'");
            }
        }
    }

    fn key(&mut self, name: &str) -> Result<(), FamilyError> {
        if self.eat(name) && self.eat("=") {
            Ok(())
        } else {
            self.err(format!("expected '{name}='"))
        }
    }

    fn finish<T>(&mut self, v: T) -> Result<T, FamilyError> {
        if self.rest().is_empty() {
            Ok(v)
        } else {
            self.err(format!("trailing input {:?}", self.rest()))
        }
    }

    fn family(&mut self) -> Result<OffspringWeights, FamilyError> {
        if self.eat("geometric:") {
            self.key("p")?;
            let p = self.rational()?;
            let fam = OffspringWeights::geometric(p)?;
            self.finish(fam)
        } else if self.eat("polyexp:") {
            self.key("a")?;
            let a = self.rational_list()?;
            let fam = OffspringWeights::polyexp(a)?;
            self.finish(fam)
        } else if self.eat("stabletail:") {
            self.key("alpha")?;
            let alpha = self.rational()?;
            if !self.eat(",") {
                return self.err("expected ','");
            }
            self.key("m")?;
            let m = self.rational()?;
            if !self.eat(",") {
                return self.err("expected ','");
            }
            self.key("c")?;
            let c = self.rational()?;
            let fam = OffspringWeights::stable_tail(alpha, m, c)?;
            self.finish(fam)
        } else if self.eat("powerlaw:") {
            self.key("beta")?;
            let beta = self.rational()?;
            if !self.eat(",") {
                return self.err("expected ','");
            }
            self.key("c")?;
            let c = self.rational()?;
            if !self.eat(",") {
                return self.err("expected ','");
            }
            self.key("w0")?;
            let w0 = self.rational()?;
            let fam = OffspringWeights::power_law(beta, c, w0)?;
            self.finish(fam)
        } else if self.eat("finite:") {
            let weights = self.rational_list()?;
            let fam = OffspringWeights::finite(weights)?;
            self.finish(fam)
        } else {
            self.err("unknown family (expected geometric:, polyexp:, stabletail:, powerlaw: or finite:)")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn geom_half() -> OffspringWeights {
        OffspringWeights::geometric(rat(1, 2)).unwrap()
    }

    #[test]
    fn geometric_weights() {
        let d = geom_half();
        assert_eq!(d.exact_weight(2).unwrap(), rat(1, 8));
        assert_eq!(d.mean(), Mean::Exact(BigRational::one()));
    }

    #[test]
    fn stable_tail_weights() {
        let d = OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 2)).unwrap();
        assert_eq!(d.exact_weight(0).unwrap(), rat(1, 2));
        assert_eq!(d.exact_weight(1).unwrap(), rat(1, 4));
        // binom(3/2,3) = -1/16, sign (-1)^3 -> w(3) = (1/2)(1/16)
        assert_eq!(d.exact_weight(3).unwrap(), rat(1, 32));
        assert_eq!(d.mean(), Mean::Exact(BigRational::one()));
        // partial sums approach 1
        let total: f64 = d
            .ln_weight_prefix(10_000)
            .iter()
            .map(|l| l.exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-5, "partial sum {total}");
        for w in d.exact_weight_prefix(200).unwrap() {
            assert!(!w.is_negative());
        }
    }

    #[test]
    fn polyexp_weights_are_exp_series() {
        let d = OffspringWeights::polyexp(vec![BigRational::one()]).unwrap();
        let f = d.exact_weight_prefix(8).unwrap();
        let mut fact = BigRational::one();
        for (i, w) in f.iter().enumerate() {
            if i > 0 {
                fact /= rat_u64(i as u64);
            }
            assert_eq!(w, &fact, "coefficient {i} of exp(z)");
        }
        assert_eq!(d.scale_pow_per_weight(), 1);
        assert!((d.ln_scale() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn polyexp_gcd_rule() {
        assert!(OffspringWeights::polyexp(vec![rat(0, 1), rat(1, 1)]).is_err());
        assert!(OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2)]).is_ok());
    }

    #[test]
    fn geometric_partial_sums_near_one() {
        let total: f64 = geom_half()
            .ln_weight_prefix(10_000)
            .iter()
            .map(|l| l.exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn validate_modes() {
        assert!(geom_half().validate_for(Conditioning::Leaves).is_empty());
        let no_unary =
            OffspringWeights::finite(vec![rat(1, 2), rat(0, 1), rat(1, 2)]).unwrap();
        let v = no_unary.validate_for(Conditioning::Leaves);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(
            no_unary.mean(),
            Mean::Exact(BigRational::one())
        );
        // 1 - c*alpha < 0 is rejected at construction
        assert!(
            OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 1)).is_err()
        );
    }

    #[test]
    fn weight_ratios_are_scale_free() {
        let d = OffspringWeights::polyexp(vec![BigRational::one()]).unwrap();
        let w: Vec<crate::ScaledRat> = d.weight_prefix(6).unwrap();
        let r = (w[2].clone() * w[3].clone()).ratio_to(&(w[1].clone() * w[4].clone()));
        // (1/2! * 1/3!) / (1/1! * 1/4!) = 2
        assert_eq!(r, rat(2, 1));
    }

    #[test]
    fn powerlaw_is_float_only() {
        let d = OffspringWeights::power_law(rat(3, 2), BigRational::one(), rat(1, 2)).unwrap();
        assert!(d.exact_weight_prefix(4).is_none());
        let lw = d.ln_weight_prefix(4);
        assert!((lw[2] - (1.0f64 / 2f64.powf(2.5)).ln()).abs() < 1e-12);
        let m = d.mean().to_f64();
        assert!(m > 0.0 && m.is_finite());
    }

    #[test]
    fn zeta_spot_values() {
        assert!((zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
        assert!((zeta(4.0) - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-10);
    }

    #[test]
    fn parse_round_trips() {
        for s in [
            "geometric:p=1/2",
            "polyexp:a=[1]",
            "polyexp:a=[1,1/2]",
            "stabletail:alpha=3/2,m=0,c=1/2",
            "powerlaw:beta=3/2,c=1,w0=1/2",
            "finite:[1/2,0,1/2]",
        ] {
            let d: OffspringWeights = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
            assert_eq!(d.to_string().parse::<OffspringWeights>().unwrap(), d);
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = "geometric:q=1/2".parse::<OffspringWeights>().unwrap_err();
        match e {
            FamilyError::Parse { pos, .. } => assert_eq!(pos, 10),
            other => panic!("unexpected {other:?}"),
        }
        assert!("geometric:p=2".parse::<OffspringWeights>().is_err());
        assert!("nope:p=1".parse::<OffspringWeights>().is_err());
    }

    #[test]
    fn stable_tail_sum_matches_direct() {
        let d = OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 2)).unwrap();
        let ln_tail = d.stable_tail_ln_tail(30).unwrap();
        // direct summation truncated at 30_000 misses ~(30/30000)^{3/2}
        let direct: f64 = d.ln_weight_prefix(30_000)[30..]
            .iter()
            .map(|l| l.exp())
            .sum();
        assert!(
            (ln_tail.exp() - direct).abs() / direct < 5e-3,
            "{} vs {}",
            ln_tail.exp(),
            direct
        );
        // the float recurrence agrees with the exact rational tail
        let exact = d.stable_tail_sum(30).unwrap();
        assert!((ln_rational(&exact) - ln_tail).abs() < 1e-10);
    }

    #[test]
    fn stable_tail_admissible_grid() {
        // weights stay nonnegative and the truncation-corrected partial sum
        // equals one exactly, across a parameter grid
        for alpha in [rat(5, 4), rat(3, 2), rat(7, 4)] {
            for m in [rat(-1, 4), rat(0, 1), rat(1, 2)] {
                for c in [rat(1, 8), rat(1, 4)] {
                    let Ok(d) = OffspringWeights::stable_tail(alpha.clone(), m.clone(), c)
                    else {
                        continue;
                    };
                    let prefix = d.exact_weight_prefix(80).unwrap();
                    assert!(prefix.iter().all(|w| !w.is_negative()), "{d}");
                    let head: BigRational = prefix.iter().cloned().sum();
                    assert_eq!(
                        head + d.stable_tail_sum(80).unwrap(),
                        BigRational::one(),
                        "exact total mass for {d}"
                    );
                }
            }
        }
    }
}
