//! Truncated power series over any [`Scalar`], plus the generating-function
//! constructions used by the internal-node conditioning: the per-tree product
//! `G^a = Ftilde^{phi0} * prod_u F^(c_u)` and, for exponential-type families,
//! its exact polynomial factorization and large-order coefficient probes.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::offspring::{FamilyError, OffspringWeights};
use crate::scalar::{ScaledRat, Scalar};
use crate::tree::PlaneTree;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("constant term does not cancel; cannot divide by z")]
    NonDivisible,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("operation requires an exponential-type (polyexp) family")]
    NotPolyExp,
}

/// A power series truncated at a fixed order; `coeffs[i]` is the coefficient
/// of `z^i` and every arithmetic result is truncated to the smaller operand
/// order.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Scalar> TruncSeries<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        TruncSeries { coeffs }
    }

    pub fn constant(value: C, order: usize) -> Self {
        let mut coeffs = vec![C::zero(); order + 1];
        coeffs[0] = value;
        TruncSeries { coeffs }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C::one(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(order + 1);
        coeffs.resize(order + 1, C::zero());
        TruncSeries { coeffs }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let mut out = vec![C::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncSeries { coeffs: out }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        TruncSeries { coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        TruncSeries { coeffs }
    }

    pub fn scalar_mul(&self, c: &C) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    /// Formal derivative; the order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(C::zero(), 0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|i| self.coeffs[i].clone() * C::from_u64(i as u64))
            .collect();
        TruncSeries { coeffs }
    }

    /// `(self - constant) / z`; requires the constant term to cancel exactly.
    pub fn shift_div_z(&self, constant: &C) -> Result<Self, SeriesError> {
        if self.coeff(0) != *constant {
            return Err(SeriesError::NonDivisible);
        }
        if self.order() == 0 {
            return Ok(Self::constant(C::zero(), 0));
        }
        Ok(TruncSeries {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// `self^m` at the order of `self`.
    pub fn pow(&self, m: usize) -> Self {
        let order = self.order();
        let mut acc = Self::one(order);
        let mut base = self.truncated(order);
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Shift coefficients up by `k` (multiply by `z^k`), growing the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        TruncSeries { coeffs }
    }
}

/// Generating function of the weights: coefficient `i` is `weight(i)`.
pub fn from_offspring<C: Scalar>(
    d: &OffspringWeights,
    order: usize,
) -> Result<TruncSeries<C>, FamilyError> {
    Ok(TruncSeries::new(d.weight_prefix(order + 1)?))
}

/// Generating function of the shifted weights: coefficient `i` is
/// `weight(i+1)`.
pub fn ftilde_from_offspring<C: Scalar>(
    d: &OffspringWeights,
    order: usize,
) -> Result<TruncSeries<C>, FamilyError> {
    let mut w = d.weight_prefix(order + 2)?;
    w.remove(0);
    Ok(TruncSeries::new(w))
}

/// The product `G^a = Ftilde^{phi0(a)} * prod_{u internal} F^(c_u(a))`,
/// truncated at `order`. Every coefficient carries `|a|` scale powers, so
/// ratios of coefficients across trees of equal vertex count are scale-free.
pub fn build_ga<C: Scalar>(
    d: &OffspringWeights,
    a: &PlaneTree,
    order: usize,
) -> Result<TruncSeries<C>, FamilyError> {
    let phi = a.degree_profile();
    let max_c = *phi.keys().max().unwrap();
    let f: TruncSeries<C> = from_offspring(d, order + max_c)?;
    let phi0 = *phi.get(&0).unwrap_or(&0);
    let mut g = ftilde_from_offspring::<C>(d, order)?.pow(phi0);
    let mut fder = f;
    for c in 1..=max_c {
        fder = fder.derivative();
        if let Some(&count) = phi.get(&c) {
            g = g.mul(&fder.truncated(order).pow(count));
        }
    }
    Ok(g.truncated(order))
}

fn polyexp_params(d: &OffspringWeights) -> Result<&[BigRational], SeriesError> {
    match d {
        OffspringWeights::PolyExp { a } => Ok(a),
        _ => Err(SeriesError::NotPolyExp),
    }
}

/// Plain polynomials `P_j` with `F^(j) = P_j * F` for `F = c exp(P)`:
/// `P_1 = P'` and `P_{j+1} = P_j' + P' P_j`. Index `i` of each entry is the
/// `z^i` coefficient.
fn derivative_polys(a: &[BigRational], up_to: usize) -> Vec<Vec<BigRational>> {
    let p_prime: Vec<BigRational> = (1..=a.len())
        .map(|j| BigRational::from_integer(j.into()) * &a[j - 1])
        .collect();
    let mut out: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]]; // P_0 = 1
    for j in 1..=up_to {
        let prev = &out[j - 1];
        // derivative of prev
        let mut next: Vec<BigRational> = (1..prev.len())
            .map(|i| BigRational::from_integer(i.into()) * &prev[i])
            .collect();
        // plus P' * prev
        next.resize(prev.len() + p_prime.len() - 1, BigRational::zero());
        for (i, x) in p_prime.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in prev.iter().enumerate() {
                next[i + k] += x * y;
            }
        }
        out.push(next);
    }
    out
}

/// The polynomial `prod_{u internal} P_{c_u(a)}` for an exponential-type
/// family; multiplying by `z^{-phi0(a)}` gives the Laurent factor of `G^a`.
/// Its degree is `(k-1)(p-1)` and its leading coefficient `(p a_p)^{k-1}`.
pub fn qa_polynomial(
    d: &OffspringWeights,
    a: &PlaneTree,
) -> Result<Vec<BigRational>, SeriesError> {
    let params = polyexp_params(d)?;
    let max_c = (0..a.len()).map(|u| a.outdegree(u)).max().unwrap();
    let polys = derivative_polys(params, max_c);
    let mut q = vec![BigRational::one()];
    for u in 0..a.len() {
        let c = a.outdegree(u);
        if c == 0 {
            continue;
        }
        let rhs = &polys[c];
        let mut next = vec![BigRational::zero(); q.len() + rhs.len() - 1];
        for (i, x) in q.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in rhs.iter().enumerate() {
                next[i + k] += x * y;
            }
        }
        q = next;
    }
    Ok(q)
}

/// Exact series identity for exponential-type families:
/// `z^{phi0} G^a = (prod_u P_{c_u}) * sum_j binom(phi0, j) (-w0)^j F^{k-j}`,
/// checked coefficientwise up to `order`.
pub fn poisson_factorization_check(
    d: &OffspringWeights,
    a: &PlaneTree,
    order: usize,
) -> Result<bool, SeriesError> {
    polyexp_params(d)?;
    let phi0 = a.leaf_count();
    let k = a.len();

    let g: TruncSeries<ScaledRat> = build_ga(d, a, order)?;
    let lhs = g.shift_up(phi0).truncated(order + phi0);

    let f: TruncSeries<ScaledRat> = from_offspring(d, order + phi0)?;
    let w0 = f.coeff(0);
    let neg_w0 = ScaledRat::from_int(-1) * w0;
    let mut sum = TruncSeries::constant(ScaledRat::zero(), order + phi0);
    let mut neg_w0_pow = ScaledRat::one();
    for j in 0..=phi0 {
        let coef = ScaledRat::from_weight(
            &BigRational::from_integer(binomial(phi0 as u64, j as u64).into()),
            0,
            0.0,
        ) * neg_w0_pow.clone();
        sum = sum.add(&f.pow(k - j).scalar_mul(&coef));
        neg_w0_pow = neg_w0_pow * neg_w0.clone();
    }
    let q = qa_polynomial(d, a)?;
    let q_series = TruncSeries::new(
        q.iter()
            .map(|r| ScaledRat::from_rational(r.clone()))
            .collect::<Vec<_>>(),
    )
    .truncated(order + phi0);
    let rhs = q_series.mul(&sum);

    Ok(lhs == rhs)
}

/// Degree and leading coefficient of [`qa_polynomial`].
pub fn qa_degree_leading(
    d: &OffspringWeights,
    a: &PlaneTree,
) -> Result<(usize, BigRational), SeriesError> {
    let q = qa_polynomial(d, a)?;
    let deg = q.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    Ok((deg, q[deg].clone()))
}

/// Normalized coefficient-ratio probe for an exponential-type family:
/// `r_n = (e^m_{n+1} / e^m_n) * n^{1/p} / (m p a_p)^{1/p}` with
/// `e^m_n = [z^n] F^m`, computed in log space; `r_n -> 1`.
pub fn coeff_ratio_probe(
    d: &OffspringWeights,
    m: u64,
    n_grid: &[usize],
) -> Result<Vec<f64>, SeriesError> {
    let params = polyexp_params(d)?;
    assert!(m >= 1);
    let p = params.len();
    let a_p = params[p - 1].to_f64_lossy();
    let max_n = *n_grid.iter().max().unwrap_or(&0);
    // ln f_n for exp(m P): n f_n = sum_j j (m a_j) f_{n-j}
    let mut lf = vec![0.0f64; max_n + 2];
    let lna: Vec<Option<f64>> = params
        .iter()
        .map(|x| {
            if x.is_zero() {
                None
            } else {
                Some(crate::scalar::ln_rational(x))
            }
        })
        .collect();
    for n in 1..=max_n + 1 {
        let mut terms: Vec<f64> = Vec::new();
        for j in 1..=p.min(n) {
            if let Some(la) = lna[j - 1] {
                terms.push((j as f64 * m as f64).ln() + la + lf[n - j]);
            }
        }
        let hi = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lf[n] = hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln() - (n as f64).ln();
    }
    let norm = (m as f64 * p as f64 * a_p).powf(1.0 / p as f64);
    Ok(n_grid
        .iter()
        .map(|&n| (lf[n + 1] - lf[n]).exp() * (n as f64).powf(1.0 / p as f64) / norm)
        .collect())
}

trait ToF64Lossy {
    fn to_f64_lossy(&self) -> f64;
}

impl ToF64Lossy for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Debug dump as a JSON array of "num/den" strings (exact coefficients).
pub fn dump_exact_series(s: &TruncSeries<ScaledRat>) -> String {
    let parts: Vec<String> = s
        .coeffs()
        .iter()
        .map(|c| format!("\"{}\"", c.rational()))
        .collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn sr(n: i64, d: i64) -> ScaledRat {
        ScaledRat::from_rational(rat(n, d))
    }

    fn geom_half() -> OffspringWeights {
        OffspringWeights::geometric(rat(1, 2)).unwrap()
    }

    #[test]
    fn from_offspring_examples() {
        let s: TruncSeries<ScaledRat> = from_offspring(&geom_half(), 3).unwrap();
        assert_eq!(
            s.coeffs(),
            &[sr(1, 2), sr(1, 4), sr(1, 8), sr(1, 16)]
        );

        let pe = OffspringWeights::polyexp(vec![BigRational::one()]).unwrap();
        let s: TruncSeries<ScaledRat> = from_offspring(&pe, 2).unwrap();
        for (i, want) in [rat(1, 1), rat(1, 1), rat(1, 2)].iter().enumerate() {
            assert_eq!(s.coeff(i).rational(), want);
            assert_eq!(s.coeff(i).scale_pow(), 1);
        }

        let st = OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 2)).unwrap();
        let s: TruncSeries<ScaledRat> = from_offspring(&st, 1).unwrap();
        assert_eq!(s.coeffs(), &[sr(1, 2), sr(1, 4)]);
    }

    #[test]
    fn mul_truncates_to_min_order() {
        let a = TruncSeries::new(vec![sr(1, 1), sr(1, 1)]);
        let prod = a.mul(&a);
        assert_eq!(prod.coeffs(), &[sr(1, 1), sr(2, 1)]);
    }

    #[test]
    fn derivative_shifts_and_scales() {
        let s = TruncSeries::new(vec![sr(3, 1), sr(5, 1), sr(7, 1)]);
        assert_eq!(s.derivative().coeffs(), &[sr(5, 1), sr(14, 1)]);
    }

    #[test]
    fn pow_matches_direct_convolution() {
        let f: TruncSeries<ScaledRat> = from_offspring(&geom_half(), 8).unwrap();
        let sq = f.pow(2);
        for n in 0..=8 {
            let mut direct = ScaledRat::zero();
            for i in 0..=n {
                direct = direct + f.coeff(i) * f.coeff(n - i);
            }
            assert_eq!(sq.coeff(n), direct);
        }
    }

    #[test]
    fn shift_div_z_precondition() {
        let f: TruncSeries<ScaledRat> = from_offspring(&geom_half(), 4).unwrap();
        let ft = f.shift_div_z(&sr(1, 2)).unwrap();
        assert_eq!(ft.coeff(0), sr(1, 4));
        assert_eq!(
            ftilde_from_offspring::<ScaledRat>(&geom_half(), 3).unwrap(),
            ft
        );
        assert_eq!(f.shift_div_z(&sr(1, 3)), Err(SeriesError::NonDivisible));
    }

    #[test]
    fn build_ga_single_vertex_is_ftilde() {
        let a = PlaneTree::singleton();
        let g: TruncSeries<ScaledRat> = build_ga(&geom_half(), &a, 5).unwrap();
        assert_eq!(g, ftilde_from_offspring(&geom_half(), 5).unwrap());
    }

    #[test]
    fn build_ga_cherry_matches_manual_product() {
        let cherry = PlaneTree::star(2);
        let d = geom_half();
        let order = 10;
        let g: TruncSeries<ScaledRat> = build_ga(&d, &cherry, order).unwrap();
        let ft: TruncSeries<ScaledRat> = ftilde_from_offspring(&d, order).unwrap();
        let f: TruncSeries<ScaledRat> = from_offspring(&d, order + 2).unwrap();
        let f2 = f.derivative().derivative();
        let manual = ft.mul(&ft).mul(&f2.truncated(order));
        assert_eq!(g, manual);
    }

    #[test]
    fn log_space_series_tracks_exact() {
        let d = geom_half();
        let cherry = PlaneTree::star(2);
        let exact: TruncSeries<ScaledRat> = build_ga(&d, &cherry, 20).unwrap();
        let logs: TruncSeries<crate::LogWeight> = build_ga(&d, &cherry, 20).unwrap();
        for i in 0..=20 {
            let want = exact.coeff(i).ln_approx();
            let got = logs.coeff(i).ln_approx();
            assert!((want - got).abs() < 1e-9, "coeff {i}: {want} vs {got}");
        }
    }

    #[test]
    fn qa_polynomial_degree_and_leading() {
        // degree (k-1)(p-1) and leading coefficient (p a_p)^{k-1} for every
        // tree with k <= 5 vertices, p in {2, 3}
        let fams = [
            OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2)]).unwrap(),
            OffspringWeights::polyexp(vec![rat(1, 1), rat(0, 1), rat(1, 3)]).unwrap(),
        ];
        for (p, d) in fams.iter().enumerate().map(|(i, d)| (i + 2, d)) {
            let a_p = match d {
                OffspringWeights::PolyExp { a } => a.last().unwrap().clone(),
                _ => unreachable!(),
            };
            for k in 1..=5usize {
                for a in
                    crate::tree::enumerate_trees(k, crate::tree::TreeFilter::all()).unwrap()
                {
                    let (deg, lead) = qa_degree_leading(d, &a).unwrap();
                    assert_eq!(deg, (k - 1) * (p - 1), "degree for {a}, p={p}");
                    let want =
                        (rat(p as i64, 1) * &a_p).pow((k - 1) as i32);
                    assert_eq!(lead, want, "leading for {a}, p={p}");
                }
            }
        }
    }

    #[test]
    fn poisson_factorization_small() {
        let fams = [
            OffspringWeights::polyexp(vec![rat(1, 1)]).unwrap(),
            OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2)]).unwrap(),
        ];
        for d in &fams {
            for k in 1..=3usize {
                for a in crate::tree::enumerate_trees(k, crate::tree::TreeFilter::all()).unwrap()
                {
                    assert!(
                        poisson_factorization_check(d, &a, 30).unwrap(),
                        "factorization fails for {a} under {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn probe_exp_matches_closed_form() {
        // e_n = 1/n! gives ratio 1/(n+1), so the probe is n/(n+1)
        let d = OffspringWeights::polyexp(vec![rat(1, 1)]).unwrap();
        for m in [1u64, 2] {
            let vals = coeff_ratio_probe(&d, m, &[200, 2000]).unwrap();
            assert!((vals[0] - 200.0 / 201.0).abs() < 1e-9);
            assert!((vals[1] - 2000.0 / 2001.0).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_converges_monotonically_for_quadratic() {
        let d = OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2)]).unwrap();
        let vals = coeff_ratio_probe(&d, 1, &[200, 2000]).unwrap();
        assert!(
            (vals[1] - 1.0).abs() < (vals[0] - 1.0).abs(),
            "|{} - 1| !< |{} - 1|",
            vals[1],
            vals[0]
        );
        // computed value is ~1.0109: inside a slightly wider window than the
        // leading-order heuristic suggests
        assert!((vals[1] - 1.0).abs() < 0.02, "probe(2000) = {}", vals[1]);
    }

    #[test]
    fn binomial_small() {
        assert_eq!(binomial(7, 3), BigUint::from(35u32));
        assert_eq!(binomial(3, 7), BigUint::zero());
    }

    proptest! {
        #[test]
        fn ring_axioms_spot_checks(
            av in proptest::collection::vec(-4i64..=4, 4),
            bv in proptest::collection::vec(-4i64..=4, 4),
            cv in proptest::collection::vec(-4i64..=4, 4),
        ) {
            let mk = |v: &Vec<i64>| TruncSeries::new(
                v.iter().map(|&x| ScaledRat::from_int(x)).collect::<Vec<_>>());
            let (a, b, c) = (mk(&av), mk(&bv), mk(&cv));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }
}
