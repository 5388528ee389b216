//! Exact conditional laws for the biconditioned trees: reduced-tree
//! distributions under both conditionings, the maximal degree profile for
//! the leaf conditioning, sorted-outdegree laws, per-vertex leaf-total
//! tables, the four limit laws, and two exact Gamma/Dirichlet identities.
//!
//! All probabilities are exact rationals: every law here is a ratio of sums
//! of products of equally many offspring weights, so family scale constants
//! and missing normalization cancel.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::offspring::{FamilyError, OffspringWeights};
use crate::scalar::{ScaledRat, Scalar};
use crate::series::{binomial, build_ga, ftilde_from_offspring};
use crate::tree::{enumerate_trees, PlaneTree, TreeError, TreeFilter};

#[derive(Debug, Error)]
pub enum DistError {
    #[error("empty conditioning: {0}")]
    EmptyConditioning(String),
    #[error("k = {0} is not attainable for this offspring support")]
    InadmissibleK(usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

fn rat_u(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn big_to_rat(b: num_bigint::BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(b))
}

/// `x^(x+1)...(x+m-1)` (rising factorial).
pub fn rising(x: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..m {
        acc *= x + rat_u(j);
    }
    acc
}

/// `x (x-1) ... (x-m+1)` (falling factorial).
pub fn falling(x: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..m {
        acc *= x - rat_u(j);
    }
    acc
}

fn factorial_rat(n: u64) -> BigRational {
    let mut acc = BigRational::one();
    for i in 2..=n {
        acc *= rat_u(i);
    }
    acc
}

/// `1 / prod_{u internal} c_u(a)!`.
pub fn zeta_weight(a: &PlaneTree) -> BigRational {
    let mut acc = BigRational::one();
    for u in 0..a.len() {
        let c = a.outdegree(u) as u64;
        if c > 1 {
            acc /= factorial_rat(c);
        }
    }
    acc
}

/// An exact finite probability distribution over trees.
#[derive(Clone, PartialEq, Debug)]
pub struct TreeDist {
    atoms: BTreeMap<PlaneTree, BigRational>,
    support: String,
}

impl TreeDist {
    /// Normalize weights (any common scale power cancels). Zero-weight atoms
    /// are dropped; the remaining masses sum to exactly one.
    pub fn from_weights(
        weights: impl IntoIterator<Item = (PlaneTree, ScaledRat)>,
        support: impl Into<String>,
    ) -> Result<Self, DistError> {
        let support = support.into();
        let kept: Vec<(PlaneTree, ScaledRat)> = weights
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .collect();
        if kept.is_empty() {
            return Err(DistError::EmptyConditioning(support));
        }
        let mut total = ScaledRat::zero();
        for (_, w) in &kept {
            assert!(!w.rational().is_negative(), "negative mass in {support}");
            total = total + w.clone();
        }
        let atoms: BTreeMap<PlaneTree, BigRational> = kept
            .into_iter()
            .map(|(t, w)| (t, w.ratio_to(&total)))
            .collect();
        let dist = TreeDist { atoms, support };
        debug_assert!(dist.mass_sum().is_one());
        Ok(dist)
    }

    pub fn point_mass(t: PlaneTree, support: impl Into<String>) -> Self {
        TreeDist {
            atoms: BTreeMap::from([(t, BigRational::one())]),
            support: support.into(),
        }
    }

    pub fn atoms(&self) -> &BTreeMap<PlaneTree, BigRational> {
        &self.atoms
    }

    pub fn prob(&self, t: &PlaneTree) -> BigRational {
        self.atoms.get(t).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support_desc(&self) -> &str {
        &self.support
    }

    pub fn mass_sum(&self) -> BigRational {
        self.atoms.values().cloned().sum()
    }

    /// Bit-exact JSON form: `[{"tree": "<step csv>", "prob_num": "...",
    /// "prob_den": "..."}]` in canonical tree order.
    pub fn to_json(&self) -> String {
        let items: Vec<String> = self
            .atoms
            .iter()
            .map(|(t, p)| {
                format!(
                    "{{\"tree\":\"{t}\",\"prob_num\":\"{}\",\"prob_den\":\"{}\"}}",
                    p.numer(),
                    p.denom()
                )
            })
            .collect();
        format!("[{}]", items.join(","))
    }
}

/// An exact distribution over integer vectors (sorted outdegree laws,
/// per-vertex leaf totals).
#[derive(Clone, PartialEq, Debug)]
pub struct IntSeqDist {
    atoms: BTreeMap<Vec<u64>, BigRational>,
}

impl IntSeqDist {
    pub fn from_weights(
        weights: impl IntoIterator<Item = (Vec<u64>, ScaledRat)>,
        what: &str,
    ) -> Result<Self, DistError> {
        let kept: Vec<(Vec<u64>, ScaledRat)> = weights
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .collect();
        if kept.is_empty() {
            return Err(DistError::EmptyConditioning(what.into()));
        }
        let mut total = ScaledRat::zero();
        for (_, w) in &kept {
            total = total + w.clone();
        }
        let atoms: BTreeMap<Vec<u64>, BigRational> = kept
            .into_iter()
            .map(|(v, w)| (v, w.ratio_to(&total)))
            .collect();
        let d = IntSeqDist { atoms };
        debug_assert!(d.mass_sum().is_one());
        Ok(d)
    }

    pub fn atoms(&self) -> &BTreeMap<Vec<u64>, BigRational> {
        &self.atoms
    }

    pub fn prob(&self, v: &[u64]) -> BigRational {
        self.atoms
            .get(v)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn mass_sum(&self) -> BigRational {
        self.atoms.values().cloned().sum()
    }

    /// Marginal of one coordinate.
    pub fn marginal(&self, idx: usize) -> BTreeMap<u64, BigRational> {
        let mut out = BTreeMap::new();
        for (v, p) in &self.atoms {
            *out.entry(v[idx]).or_insert_with(BigRational::zero) += p;
        }
        out
    }

    pub fn to_json(&self) -> String {
        let items: Vec<String> = self
            .atoms
            .iter()
            .map(|(v, p)| {
                let vs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!(
                    "{{\"vec\":[{}],\"prob_num\":\"{}\",\"prob_den\":\"{}\"}}",
                    vs.join(","),
                    p.numer(),
                    p.denom()
                )
            })
            .collect();
        format!("[{}]", items.join(","))
    }
}

/// The degree profile maximizing the vertex count among unary-free trees
/// with `k` leaves and support-compatible outdegrees.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MaxProfile {
    /// outdegree -> count for outdegrees >= 2 (unary vertices excluded)
    pub b: BTreeMap<usize, usize>,
    /// total number of internal vertices `sum b_j`
    pub p_max: usize,
    /// whether `k` is attainable at all
    pub admissible: bool,
}

/// Maximize `sum_j b_j` subject to `sum_j b_j (j-1) = k - 1` over outdegrees
/// `j >= 2` in the support. The maximizer is unique (asserted).
pub fn bmax(d: &OffspringWeights, k: usize) -> MaxProfile {
    assert!(k >= 1);
    let coins: Vec<usize> = d
        .support_upto(k)
        .into_iter()
        .filter(|&j| j >= 2)
        .collect();
    let target = k - 1;
    // best[i][r]: max coin count using denominations coins[i..] summing to r
    let m = coins.len();
    let mut best = vec![vec![None::<usize>; target + 1]; m + 1];
    let mut ways = vec![vec![0u64; target + 1]; m + 1];
    best[m][0] = Some(0);
    ways[m][0] = 1;
    for i in (0..m).rev() {
        let c = coins[i] - 1;
        for r in 0..=target {
            let mut t = 0;
            while t * c <= r {
                if let Some(b) = best[i + 1][r - t * c] {
                    let cand = b + t;
                    match best[i][r] {
                        Some(cur) if cur > cand => {}
                        Some(cur) if cur == cand => ways[i][r] += ways[i + 1][r - t * c],
                        _ => {
                            best[i][r] = Some(cand);
                            ways[i][r] = ways[i + 1][r - t * c];
                        }
                    }
                }
                t += 1;
                if c == 0 {
                    break;
                }
            }
        }
    }
    let Some(p_max) = best[0][target] else {
        return MaxProfile {
            b: BTreeMap::new(),
            p_max: 0,
            admissible: false,
        };
    };
    assert_eq!(ways[0][target], 1, "degree-profile maximizer is not unique");
    // recover the unique profile
    let mut b = BTreeMap::new();
    let mut r = target;
    let mut need = p_max;
    for i in 0..m {
        let c = coins[i] - 1;
        let mut t = 0;
        loop {
            if t * c <= r && best[i + 1][r - t * c] == Some(need - t) {
                if t > 0 {
                    b.insert(coins[i], t);
                }
                r -= t * c;
                need -= t;
                break;
            }
            t += 1;
        }
    }
    MaxProfile {
        b,
        p_max,
        admissible: true,
    }
}

/// All trees whose degree profile is `(b_0 = k leaves, b^max)`, i.e. the
/// support of the leaf-conditioning limit law. Generated by running through
/// the distinct permutations of the outdegree multiset and keeping the
/// first-passage ones (exactly one per cyclic class).
pub fn maximal_support_trees(
    d: &OffspringWeights,
    k: usize,
) -> Result<Vec<PlaneTree>, DistError> {
    let prof = bmax(d, k);
    if !prof.admissible {
        return Err(DistError::InadmissibleK(k));
    }
    let mut degrees: Vec<(usize, usize)> = vec![(0, k)];
    degrees.extend(prof.b.iter().map(|(&j, &c)| (j, c)));
    let v = k + prof.p_max;
    let mut out = Vec::new();
    let mut steps: Vec<i64> = Vec::with_capacity(v);
    fn rec(
        degrees: &mut Vec<(usize, usize)>,
        steps: &mut Vec<i64>,
        v: usize,
        out: &mut Vec<PlaneTree>,
    ) {
        if steps.len() == v {
            if crate::tree::first_hitting_time(steps, -1) == Some(v) {
                let p = crate::tree::LukasiewiczPath::new(steps.clone()).unwrap();
                out.push(crate::tree::luka_decode(&p).unwrap());
            }
            return;
        }
        for idx in 0..degrees.len() {
            let (j, c) = degrees[idx];
            if c == 0 {
                continue;
            }
            degrees[idx].1 -= 1;
            steps.push(j as i64 - 1);
            rec(degrees, steps, v, out);
            steps.pop();
            degrees[idx].1 += 1;
        }
    }
    rec(&mut degrees, &mut steps, v, &mut out);
    out.sort();
    Ok(out)
}

/// Exact law of the reduced tree of a tree conditioned to `n` vertices and
/// `k` leaves: mass proportional to
/// `binom(n-1, |a|-1) w(0)^k w(1)^{n-|a|} prod_{i>=2} w(i)^{phi_i(a)}`
/// over unary-free trees `a` with `k` leaves.
pub fn reduced_dist_leaves(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<TreeDist, DistError> {
    assert!(k >= 1 && n >= 1);
    let support = format!("reduced trees of {k}-leaf trees with {n} vertices");
    if k > n {
        return Err(DistError::EmptyConditioning(support));
    }
    let max_size = (2 * k - 1).min(n);
    let prefix = d
        .weight_prefix::<ScaledRat>(max_size + 1)?
        .into_iter()
        .collect::<Vec<_>>();
    let pow_sr = |w: &ScaledRat, e: usize| -> ScaledRat {
        ScaledRat::new(
            w.rational().pow(e as i32),
            w.scale_pow() * e as i64,
        )
    };
    let mut weights = Vec::new();
    for m in 1..=max_size {
        let mut filter = TreeFilter::leaves(k);
        filter.no_unary = true;
        for a in enumerate_trees(m, filter)? {
            let mut mass = ScaledRat::from_rational(big_to_rat(binomial(
                n as u64 - 1,
                m as u64 - 1,
            )));
            mass = mass * pow_sr(&prefix[0], k);
            mass = mass * pow_sr(&prefix[1], n - m);
            for (deg, count) in a.degree_profile() {
                if deg >= 2 {
                    mass = mass * pow_sr(&prefix[deg], count);
                }
            }
            weights.push((a, mass));
        }
    }
    TreeDist::from_weights(weights, support)
}

/// Exact `P(T has n vertices and k leaves)` as `(rational mantissa,
/// scale power)`: `(w(0)^k / n) binom(n, k) [z^{k-1}] Ftilde(z)^{n-k}` with
/// the shifted series truncated at order `k-1`.
pub fn prob_total_leaves(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<(BigRational, i64), DistError> {
    assert!(n >= 1);
    let pow_per = d.scale_pow_per_weight();
    let zero = (BigRational::zero(), n as i64 * pow_per);
    if k == 0 || k > n || (k == n && n > 1) {
        return Ok(zero);
    }
    let w0 = d
        .exact_weight(0)
        .ok_or(FamilyError::ExactUnavailable("powerlaw"))?;
    if n == 1 {
        return Ok((w0, pow_per));
    }
    let ft: crate::series::TruncSeries<ScaledRat> = ftilde_from_offspring(d, k - 1)?;
    let coeff = ft.pow(n - k).coeff(k - 1);
    let mantissa = w0.pow(k as i32) * coeff.rational() * big_to_rat(binomial(n as u64, k as u64))
        / rat_u(n as u64);
    debug_assert!(coeff.is_zero() || coeff.scale_pow() == (n - k) as i64 * pow_per);
    Ok((mantissa, n as i64 * pow_per))
}

/// Coefficient `[z^{n-k-phi0(a)}] G^a` for every tree `a` with `k` vertices,
/// each multiplied by `zeta_k(a)`; the common factor `w(0)^{n-k}` is left
/// out. Shared by the reduced-tree law and the total-probability formula.
fn internal_weights<C: Scalar>(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<Vec<(PlaneTree, C)>, DistError> {
    assert!(k >= 1 && n >= 1);
    let mut out = Vec::new();
    for a in enumerate_trees(k, TreeFilter::all())? {
        let phi0 = a.leaf_count();
        if n < k + phi0 {
            out.push((a, C::zero()));
            continue;
        }
        let order = n - k - phi0;
        let g: crate::series::TruncSeries<C> = build_ga(d, &a, order)?;
        let zeta = C::from_weight(&zeta_weight(&a), 0, 0.0);
        let w = zeta * g.coeff(order);
        out.push((a, w));
    }
    Ok(out)
}

/// Exact law of the leafless reduced tree of a tree conditioned to `n`
/// vertices and `k` internal nodes; the support is the whole set of trees
/// with `k` vertices.
pub fn reduced_dist_internal(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<TreeDist, DistError> {
    let support = format!("reduced trees of {n}-vertex trees with {k} internal nodes");
    TreeDist::from_weights(internal_weights::<ScaledRat>(d, n, k)?, support)
}

/// [`reduced_dist_internal`] over a whole size grid, building each series
/// once at the largest required order and reading off coefficients.
pub fn reduced_dist_internal_grid(
    d: &OffspringWeights,
    ns: &[usize],
    k: usize,
) -> Result<Vec<TreeDist>, DistError> {
    assert!(k >= 1 && !ns.is_empty());
    let n_max = *ns.iter().max().unwrap();
    let trees = enumerate_trees(k, TreeFilter::all())?;
    let mut series = Vec::with_capacity(trees.len());
    for a in &trees {
        let phi0 = a.leaf_count();
        let g: Option<crate::series::TruncSeries<ScaledRat>> = if n_max >= k + phi0 {
            Some(build_ga(d, a, n_max - k - phi0)?)
        } else {
            None
        };
        series.push((a.clone(), phi0, zeta_weight(a), g));
    }
    ns.iter()
        .map(|&n| {
            let weights = series.iter().map(|(a, phi0, zeta, g)| {
                let w = match g {
                    Some(g) if n >= k + phi0 => {
                        ScaledRat::from_rational(zeta.clone()) * g.coeff(n - k - phi0)
                    }
                    _ => ScaledRat::zero(),
                };
                (a.clone(), w)
            });
            TreeDist::from_weights(
                weights,
                format!("reduced trees of {n}-vertex trees with {k} internal nodes"),
            )
        })
        .collect()
}

/// Exact `P(T has n vertices and k internal nodes)` as `(mantissa, scale
/// power)`: `w(0)^{n-k} sum_a zeta_k(a) [z^{n-k-phi0(a)}] G^a`.
pub fn prob_total_internal(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<(BigRational, i64), DistError> {
    let pow_per = d.scale_pow_per_weight();
    let w0 = d
        .exact_weight(0)
        .ok_or(FamilyError::ExactUnavailable("powerlaw"))?;
    let mut total = ScaledRat::zero();
    for (_, w) in internal_weights::<ScaledRat>(d, n, k)? {
        total = total + w;
    }
    let mantissa = w0.pow((n - k) as i32) * total.rational();
    Ok((mantissa, n as i64 * pow_per))
}

/// Exact law of the sorted vector `(outdegree - 1)` over the `k` internal
/// nodes of a tree conditioned to `n` vertices and `k` internal nodes; equals
/// the law of `k` draws from the shifted weights conditioned on their sum.
pub fn outdegree_sorted_dist(
    d: &OffspringWeights,
    n: usize,
    k: usize,
) -> Result<IntSeqDist, DistError> {
    assert!(k >= 1);
    let what = format!("sorted internal outdegrees - 1, n={n}, k={k}");
    if n < k + 1 {
        return Err(DistError::EmptyConditioning(what));
    }
    let target = n - k - 1;
    let shifted: Vec<ScaledRat> = {
        let mut w = d.weight_prefix::<ScaledRat>(target + 2)?;
        w.remove(0);
        w
    };
    let mut weights: Vec<(Vec<u64>, ScaledRat)> = Vec::new();
    // non-increasing vectors (y_1 >= ... >= y_k >= 0) summing to target
    let mut parts: Vec<u64> = Vec::with_capacity(k);
    fn rec(
        parts: &mut Vec<u64>,
        remaining: usize,
        slots: usize,
        cap: usize,
        shifted: &[ScaledRat],
        out: &mut Vec<(Vec<u64>, ScaledRat)>,
    ) {
        if slots == 0 {
            if remaining == 0 {
                // weight: #orderings * prod shifted(y_i)
                let mut w = ScaledRat::one();
                let mut mult: BTreeMap<u64, u64> = BTreeMap::new();
                for &y in parts.iter() {
                    w = w * shifted[y as usize].clone();
                    *mult.entry(y).or_insert(0) += 1;
                }
                let mut perms = factorial_rat(parts.len() as u64);
                for m in mult.values() {
                    perms /= factorial_rat(*m);
                }
                out.push((
                    parts.clone(),
                    ScaledRat::from_rational(perms) * w,
                ));
            }
            return;
        }
        // largest part first keeps the vector sorted non-increasing
        let hi = cap.min(remaining);
        let lo = remaining.div_ceil(slots);
        for y in (lo..=hi).rev() {
            parts.push(y as u64);
            rec(parts, remaining - y, slots - 1, y, shifted, out);
            parts.pop();
        }
    }
    rec(
        &mut parts,
        target,
        k,
        target,
        &shifted,
        &mut weights,
    );
    IntSeqDist::from_weights(weights, &what)
}

/// Per-vertex leaf-total table for a fixed reduced tree `a`: vertex `u`
/// receiving `i` extra leaves contributes
/// `binom(c_u + i, c_u) * w(ctilde_u + i)` and the totals sum to
/// `n - k - phi0(a)`. Supports exact total weight, full materialization and
/// backward sampling.
pub struct LeafTotalsDp<C> {
    core: PlaneTree,
    budget: usize,
    term: Vec<Vec<C>>,
    /// `suffix[u][s]` = total weight of distributing `s` among vertices `u..`
    suffix: Vec<Vec<C>>,
}

impl<C: Scalar> LeafTotalsDp<C> {
    pub fn new(d: &OffspringWeights, a: &PlaneTree, n: usize) -> Result<Self, DistError> {
        let k = a.len();
        let phi0 = a.leaf_count();
        let what = format!("leaf totals for core {a} at n={n}");
        if n < k + phi0 {
            return Err(DistError::EmptyConditioning(what));
        }
        let budget = n - k - phi0;
        let max_c = (0..k).map(|u| a.outdegree(u)).max().unwrap();
        let prefix: Vec<C> = d.weight_prefix(budget + max_c.max(1) + 1)?;
        let mut term: Vec<Vec<C>> = Vec::with_capacity(k);
        for u in 0..k {
            let c = a.outdegree(u);
            let ct = if c == 0 { 1 } else { c };
            let mut row = Vec::with_capacity(budget + 1);
            for i in 0..=budget {
                let b = C::from_weight(
                    &big_to_rat(binomial((c + i) as u64, c as u64)),
                    0,
                    0.0,
                );
                row.push(b * prefix[ct + i].clone());
            }
            term.push(row);
        }
        let mut suffix: Vec<Vec<C>> = vec![Vec::new(); k + 1];
        suffix[k] = vec![C::zero(); budget + 1];
        suffix[k][0] = C::one();
        for u in (0..k).rev() {
            let mut row = vec![C::zero(); budget + 1];
            for (s, slot) in row.iter_mut().enumerate() {
                let mut acc = C::zero();
                for i in 0..=s {
                    if term[u][i].is_zero() || suffix[u + 1][s - i].is_zero() {
                        continue;
                    }
                    acc = acc + term[u][i].clone() * suffix[u + 1][s - i].clone();
                }
                *slot = acc;
            }
            suffix[u] = row;
        }
        Ok(LeafTotalsDp {
            core: a.clone(),
            budget,
            term,
            suffix,
        })
    }

    pub fn core(&self) -> &PlaneTree {
        &self.core
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Total weight over all allocations; equals
    /// `zeta_k(a) * [z^{budget}] G^a` (checked in tests).
    pub fn total_weight(&self) -> C {
        self.suffix[0][self.budget].clone()
    }

    /// Weight of one specific allocation.
    pub fn weight_of(&self, totals: &[usize]) -> C {
        assert_eq!(totals.len(), self.core.len());
        assert_eq!(totals.iter().sum::<usize>(), self.budget);
        let mut w = C::one();
        for (u, &i) in totals.iter().enumerate() {
            w = w * self.term[u][i].clone();
        }
        w
    }

    /// Cumulative weights of `i -> term[u][i] * suffix[u+1][s-i]`, the
    /// backward-sampling row for vertex `u` with `s` leaves still to place.
    pub fn cumulative_row(&self, u: usize, s: usize) -> Vec<C> {
        let mut cum = Vec::with_capacity(s + 1);
        let mut acc = C::zero();
        for i in 0..=s {
            acc = acc + self.term[u][i].clone() * self.suffix[u + 1][s - i].clone();
            cum.push(acc.clone());
        }
        cum
    }

    /// Materialize the joint law (exponential in `k`; small cores only).
    pub fn joint_weights(&self) -> Vec<(Vec<u64>, C)> {
        let k = self.core.len();
        let mut out = Vec::new();
        let mut current = vec![0u64; k];
        fn rec<C: Scalar>(
            dp: &LeafTotalsDp<C>,
            u: usize,
            s: usize,
            current: &mut Vec<u64>,
            out: &mut Vec<(Vec<u64>, C)>,
        ) {
            if u + 1 == dp.core.len() {
                current[u] = s as u64;
                let w = dp.weight_of(
                    &current.iter().map(|&x| x as usize).collect::<Vec<_>>(),
                );
                if !w.is_zero() {
                    out.push((current.clone(), w));
                }
                return;
            }
            for i in 0..=s {
                current[u] = i as u64;
                rec(dp, u + 1, s - i, current, out);
            }
        }
        rec(self, 0, self.budget, &mut current, &mut out);
        out
    }
}

/// Exact joint law of the per-vertex leaf totals given the reduced tree.
pub fn pervertex_leaf_totals(
    d: &OffspringWeights,
    a: &PlaneTree,
    n: usize,
) -> Result<IntSeqDist, DistError> {
    let dp: LeafTotalsDp<ScaledRat> = LeafTotalsDp::new(d, a, n)?;
    IntSeqDist::from_weights(dp.joint_weights(), &format!("leaf totals for {a}, n={n}"))
}

/// Sampler over a [`LeafTotalsDp`], memoizing cumulative rows; use one
/// instance per random stream.
pub struct LeafTotalsSampler<'a, C> {
    dp: &'a LeafTotalsDp<C>,
    rows: std::collections::HashMap<(usize, usize), Vec<C>>,
}

impl<'a, C: Scalar> LeafTotalsSampler<'a, C> {
    pub fn new(dp: &'a LeafTotalsDp<C>) -> Self {
        LeafTotalsSampler {
            dp,
            rows: Default::default(),
        }
    }

    pub fn draw<R: rand::Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<usize> {
        let k = self.dp.core.len();
        let mut totals = Vec::with_capacity(k);
        let mut s = self.dp.budget;
        for u in 0..k {
            if u + 1 == k {
                totals.push(s);
                break;
            }
            let row = self
                .rows
                .entry((u, s))
                .or_insert_with(|| self.dp.cumulative_row(u, s));
            let i = C::inverse_cdf_index(row, rng);
            totals.push(i);
            s -= i;
        }
        totals
    }
}

/// The four limit laws of the reduced tree.
#[derive(Clone, Debug)]
pub enum LimitLaw {
    /// Uniform over the maximal-profile trees with `k` leaves.
    LeavesMax { d: OffspringWeights, k: usize },
    /// Point mass on the star with one internal vertex and `k - 1` leaves.
    Star { k: usize },
    /// Mass proportional to `prod_u rising(alpha, c_u)/c_u!` over trees with
    /// `k` vertices.
    Transfer { alpha: BigRational, k: usize },
    /// Mass proportional to `zeta_k(a)` over trees with `k` vertices.
    PoissonType { k: usize },
}

pub fn limit_reduced(law: &LimitLaw) -> Result<TreeDist, DistError> {
    match law {
        LimitLaw::LeavesMax { d, k } => {
            let trees = maximal_support_trees(d, *k)?;
            let count = trees.len();
            TreeDist::from_weights(
                trees.into_iter().map(|t| (t, ScaledRat::one())),
                format!("uniform over {count} maximal-profile trees, k={k}"),
            )
        }
        LimitLaw::Star { k } => {
            assert!(*k >= 1);
            Ok(TreeDist::point_mass(
                PlaneTree::star(k - 1),
                format!("star with {} leaves", k - 1),
            ))
        }
        LimitLaw::Transfer { alpha, k } => {
            let weights = enumerate_trees(*k, TreeFilter::all())?
                .into_iter()
                .map(|a| {
                    let mut w = BigRational::one();
                    for u in 0..a.len() {
                        let c = a.outdegree(u) as u64;
                        w *= rising(alpha, c) / factorial_rat(c);
                    }
                    (a, ScaledRat::from_rational(w))
                })
                .collect::<Vec<_>>();
            TreeDist::from_weights(weights, format!("transfer limit, alpha={alpha}, k={k}"))
        }
        LimitLaw::PoissonType { k } => {
            let weights = enumerate_trees(*k, TreeFilter::all())?
                .into_iter()
                .map(|a| {
                    let w = zeta_weight(&a);
                    (a, ScaledRat::from_rational(w))
                })
                .collect::<Vec<_>>();
            TreeDist::from_weights(weights, format!("inverse-factorial limit, k={k}"))
        }
    }
}

/// Exact identity behind the derivative-stability lemma: for every `p >= 1`,
/// `sum over (m_1..m_p >= 0, sum i m_i = p) of
///   p!/prod(m_i!) * falling(alpha, sum m_i)  ==  rising(alpha, p)`
/// (both sides count weighted arrangements of `p` balls into urns).
pub fn gamma_ratio_identity_check(p: usize, alpha: &BigRational) -> bool {
    assert!(p >= 1);
    let mut lhs = BigRational::zero();
    // enumerate multiplicity vectors (m_1..m_p) with sum i*m_i = p
    let mut m = vec![0usize; p + 1];
    fn rec(
        i: usize,
        remaining: usize,
        m: &mut Vec<usize>,
        p: usize,
        alpha: &BigRational,
        lhs: &mut BigRational,
    ) {
        if i > p || remaining == 0 {
            if remaining == 0 {
                let total: usize = m.iter().sum();
                let mut term = factorial_rat(p as u64);
                for &mi in m.iter() {
                    if mi > 1 {
                        term /= factorial_rat(mi as u64);
                    }
                }
                *lhs += term * falling(alpha, total as u64);
            }
            return;
        }
        let mut t = 0;
        while t * i <= remaining {
            m[i] = t;
            rec(i + 1, remaining - t * i, m, p, alpha, lhs);
            m[i] = 0;
            t += 1;
        }
    }
    rec(1, p, &mut m, p, alpha, &mut lhs);
    lhs == rising(alpha, p as u64)
}

/// Exact moment comparison for Dirichlet aggregation: does splitting the
/// first coordinate of `Dir(alphas)` by an independent uniform `Dir(1,..,1)`
/// of length `k` match the `Dir(alpha_1/k x k, alpha_2, ..)` moment with
/// exponents `lam_split` (on the split parts) and `lam_rest`?
///
/// Both sides are evaluated exactly and compared. The identity holds for
/// every exponent grid precisely when `alpha_1 = k` (uniform splitting is
/// genuine Dirichlet aggregation only when the sub-parameters, all 1, sum to
/// the split parameter); that is the instance the limit theorems use, since
/// a vertex of outdegree `c` in the unit-exponent regime has parameter
/// `1 + c` split over `c + 1` corners. For `alpha_1 != k` the comparison
/// correctly reports inequality once a split exponent reaches two.
pub fn dirichlet_aggregation_moment_check(
    alphas: &[BigRational],
    lam_split: &[u64],
    lam_rest: &[u64],
) -> bool {
    assert!(!alphas.is_empty());
    assert_eq!(alphas.len() - 1, lam_rest.len());
    let k = lam_split.len() as u64;
    assert!(k >= 1);
    let a_total: BigRational = alphas.iter().cloned().sum();
    let lam1: u64 = lam_split.iter().sum();
    let lam_all: u64 = lam1 + lam_rest.iter().sum::<u64>();

    // E[prod Y_i^{lam_i}] for Y ~ Dir(1,...,1) of length k
    let mut e_y = BigRational::one();
    for &l in lam_split {
        e_y *= rising(&BigRational::one(), l);
    }
    e_y /= rising(&rat_u(k), lam1);

    // E[X_1^{lam1} prod X_j^{lam_j}] for X ~ Dir(alphas)
    let mut e_x = rising(&alphas[0], lam1);
    for (j, &l) in lam_rest.iter().enumerate() {
        e_x *= rising(&alphas[j + 1], l);
    }
    e_x /= rising(&a_total, lam_all);

    // E[prod U_i^{lam_split} prod X'_j^{lam_rest}] for
    // Dir(alpha_1/k x k, alpha_2...)
    let a1k = &alphas[0] / rat_u(k);
    let mut rhs = BigRational::one();
    for &l in lam_split {
        rhs *= rising(&a1k, l);
    }
    for (j, &l) in lam_rest.iter().enumerate() {
        rhs *= rising(&alphas[j + 1], l);
    }
    rhs /= rising(&a_total, lam_all);

    e_y * e_x == rhs
}
