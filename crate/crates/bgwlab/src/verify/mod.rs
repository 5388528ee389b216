//! Verification harness: exact and empirical distances, goodness-of-fit
//! tests, condensation statistics, and finite-grid convergence sweeps that
//! render "as n tends to infinity" as trend predicates on fixed grids with
//! fixed seeds.

pub mod oracle;
pub mod suites;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt::Debug;
use thiserror::Error;

use crate::dist::{
    limit_reduced, reduced_dist_internal_grid, reduced_dist_leaves, DistError, LimitLaw,
    TreeDist,
};
use crate::offspring::OffspringWeights;
use crate::sample::{ApproxInternalSampler, DnkSampler, ExactInternalSampler, RngStream,
    SampleError};
use crate::tree::PlaneTree;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("degenerate support: fewer than two buckets after pooling")]
    DegenerateSupport,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("metric requires field {0}")]
    MissingField(&'static str),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// A batch of sampled values with seed provenance.
#[derive(Clone, Debug)]
pub struct EmpiricalBatch<T> {
    pub statistic: String,
    pub values: Vec<T>,
    pub seed: u64,
}

impl<T: Ord + Clone> EmpiricalBatch<T> {
    pub fn new(statistic: impl Into<String>, values: Vec<T>, seed: u64) -> Self {
        EmpiricalBatch {
            statistic: statistic.into(),
            values,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn counts(&self) -> BTreeMap<T, u64> {
        let mut out = BTreeMap::new();
        for v in &self.values {
            *out.entry(v.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// Exact total variation distance `1/2 sum |p - q|` over the union support.
pub fn tv_exact(p: &TreeDist, q: &TreeDist) -> BigRational {
    let mut keys: std::collections::BTreeSet<&PlaneTree> = p.atoms().keys().collect();
    keys.extend(q.atoms().keys());
    let mut acc = BigRational::zero();
    for t in keys {
        acc += (p.prob(t) - q.prob(t)).abs();
    }
    acc / BigRational::from_integer(2.into())
}

/// Total variation between an empirical batch and an exact law.
pub fn tv_empirical(batch: &EmpiricalBatch<PlaneTree>, q: &TreeDist) -> f64 {
    let n = batch.len() as f64;
    let counts = batch.counts();
    let mut keys: std::collections::BTreeSet<&PlaneTree> = counts.keys().collect();
    keys.extend(q.atoms().keys());
    let mut acc = 0.0;
    for t in keys {
        let ph = counts.get(t).copied().unwrap_or(0) as f64 / n;
        acc += (ph - q.prob(t).to_f64().unwrap()).abs();
    }
    acc / 2.0
}

/// Total variation between two empirical batches over a common discrete
/// statistic.
pub fn tv_between<T: Ord + Clone>(a: &EmpiricalBatch<T>, b: &EmpiricalBatch<T>) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ca = a.counts();
    let cb = b.counts();
    let mut keys: std::collections::BTreeSet<&T> = ca.keys().collect();
    keys.extend(cb.keys());
    let mut acc = 0.0;
    for k in keys {
        let pa = ca.get(k).copied().unwrap_or(0) as f64 / na;
        let pb = cb.get(k).copied().unwrap_or(0) as f64 / nb;
        acc += (pa - pb).abs();
    }
    acc / 2.0
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_tail(dof: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(dof as f64 / 2.0, x / 2.0)
}

/// Chi-square test of observed counts against expected probabilities.
/// Buckets with expected count below five are pooled (smallest first) so
/// every remaining bucket has expected count at least five.
pub fn chi_square<T: Ord + Clone + Debug>(
    batch: &EmpiricalBatch<T>,
    expected: &[(T, f64)],
) -> Result<ChiSquare, VerifyError> {
    let n = batch.len() as f64;
    let counts = batch.counts();
    let support: std::collections::BTreeSet<&T> = expected.iter().map(|(t, _)| t).collect();
    let stray: u64 = counts
        .iter()
        .filter(|(t, _)| !support.contains(t))
        .map(|(_, c)| *c)
        .sum();
    if stray > 0 {
        // observed mass outside the support of the reference law
        return Ok(ChiSquare {
            statistic: f64::INFINITY,
            dof: expected.len().max(2) - 1,
            p_value: 0.0,
        });
    }
    let mut buckets: Vec<(f64, f64)> = expected
        .iter()
        .map(|(t, p)| {
            let obs = counts.get(t).copied().unwrap_or(0) as f64;
            (p * n, obs)
        })
        .collect();
    buckets.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in buckets {
        if acc.0 < 5.0 {
            acc.0 += e;
            acc.1 += o;
            if acc.0 >= 5.0 {
                pooled.push(acc);
                acc = (0.0, 0.0);
            }
        } else {
            pooled.push((e, o));
        }
    }
    if acc.0 > 0.0 {
        // leftover small bucket merges with the smallest kept one
        if let Some(first) = pooled.first_mut() {
            first.0 += acc.0;
            first.1 += acc.1;
        } else {
            pooled.push(acc);
        }
    }
    if pooled.len() < 2 {
        return Err(VerifyError::DegenerateSupport);
    }
    debug_assert!((pooled.iter().map(|b| b.0).sum::<f64>() - n).abs() < 1e-6 * n.max(1.0));
    let statistic: f64 = pooled
        .iter()
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let dof = pooled.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_tail(dof, statistic),
    })
}

/// Chi-square of tree samples against an exact tree law.
pub fn chi_square_vs_tree_dist(
    batch: &EmpiricalBatch<PlaneTree>,
    q: &TreeDist,
) -> Result<ChiSquare, VerifyError> {
    let expected: Vec<(PlaneTree, f64)> = q
        .atoms()
        .iter()
        .map(|(t, p)| (t.clone(), p.to_f64().unwrap()))
        .collect();
    chi_square(batch, &expected)
}

/// One-sample Kolmogorov–Smirnov statistic against the Beta(a, b) CDF
/// (regularized incomplete beta).
pub fn ks_against_beta(samples: &[f64], a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0);
    assert!(!samples.is_empty());
    let mut xs = samples.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = statrs::function::beta::beta_reg(a, b, x.clamp(0.0, 1.0));
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Degree statistics used by the condensation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CondensationStats {
    pub root_out: usize,
    pub max_out: usize,
    pub second_max_out: usize,
    pub root_is_max: bool,
}

pub fn condensation_stats(t: &PlaneTree) -> CondensationStats {
    assert!(t.len() >= 2, "condensation statistics need an internal node");
    let mut outs = t.internal_outdegrees();
    let root_out = t.outdegree(0);
    outs.sort_unstable_by(|a, b| b.cmp(a));
    CondensationStats {
        root_out,
        max_out: outs[0],
        second_max_out: outs.get(1).copied().unwrap_or(0),
        root_is_max: root_out == outs[0],
    }
}

/// Sorted non-root internal outdegrees, capped: the coarsened statistic for
/// comparing the conditioned tree with its star coupling.
pub fn coarse_outdeg_stat(t: &PlaneTree, cap: usize) -> Vec<u64> {
    let mut outs: Vec<u64> = t
        .internal_outdegrees()
        .into_iter()
        .skip(1)
        .map(|c| c.min(cap) as u64)
        .collect();
    outs.sort_unstable_by(|a, b| b.cmp(a));
    outs
}

/// One row of a convergence sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: usize,
    pub value: f64,
    pub meta: String,
}

/// A finite-grid rendering of a limit statement, with enough header data to
/// reproduce it byte for byte.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub metric: String,
    pub config: String,
    pub seed: Option<u64>,
    pub thresholds: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn initial(&self) -> f64 {
        self.rows.first().expect("nonempty sweep").value
    }

    pub fn final_value(&self) -> f64 {
        self.rows.last().expect("nonempty sweep").value
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# metric={}\n", self.metric));
        out.push_str(&format!("# config_hash={:016x}\n", fnv1a(self.config.as_bytes())));
        out.push_str(&format!("# config={}\n", self.config));
        match self.seed {
            Some(s) => out.push_str(&format!("# seed={s}\n")),
            None => out.push_str("# seed=none\n"),
        }
        out.push_str(&format!("# thresholds={}\n", self.thresholds));
        out.push_str("n,value,meta\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.value, r.meta));
        }
        out
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// The registered sweep metrics.
#[derive(Clone, Debug)]
pub enum MetricSpec {
    /// Exact TV between the leaf-conditioning reduced law and a limit law.
    TvExactLeaves {
        d: OffspringWeights,
        k: usize,
        limit: LimitLaw,
    },
    /// Exact TV between the internal-conditioning reduced law and a limit law.
    TvExactInternal {
        d: OffspringWeights,
        k: usize,
        limit: LimitLaw,
    },
    /// Exact probability that the internal-conditioning reduced tree is the
    /// star.
    ProbStarInternal { d: OffspringWeights, k: usize },
    /// Monte-Carlo mean of (root outdegree)/n for the internal conditioning.
    McRootDegreeRatio {
        d: OffspringWeights,
        k: usize,
        samples: u64,
        seed: u64,
    },
    /// Empirical TV between the coarsened outdegree statistic of the
    /// conditioned tree and its star coupling.
    McCoarseOutdegTv {
        d: OffspringWeights,
        k: usize,
        samples: u64,
        seed: u64,
        cap: usize,
    },
}

impl MetricSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::TvExactLeaves { .. } => "tv-exact-leaves",
            MetricSpec::TvExactInternal { .. } => "tv-exact-internal",
            MetricSpec::ProbStarInternal { .. } => "prob-star-internal",
            MetricSpec::McRootDegreeRatio { .. } => "mc-root-degree-ratio",
            MetricSpec::McCoarseOutdegTv { .. } => "mc-coarse-outdeg-tv",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            MetricSpec::McRootDegreeRatio { seed, .. }
            | MetricSpec::McCoarseOutdegTv { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Evaluate a metric over a size grid.
pub fn sweep(metric: &MetricSpec, n_grid: &[usize]) -> Result<SweepTable, VerifyError> {
    assert!(!n_grid.is_empty());
    assert!(n_grid.windows(2).all(|w| w[0] < w[1]), "grid must increase");
    let mut rows = Vec::with_capacity(n_grid.len());
    match metric {
        MetricSpec::TvExactLeaves { d, k, limit } => {
            let lim = limit_reduced(limit)?;
            for &n in n_grid {
                let law = reduced_dist_leaves(d, n, *k)?;
                let tv = tv_exact(&law, &lim);
                rows.push(SweepRow {
                    n,
                    value: tv.to_f64().unwrap(),
                    meta: format!("{}/{}", tv.numer(), tv.denom()),
                });
            }
        }
        MetricSpec::TvExactInternal { d, k, limit } => {
            let lim = limit_reduced(limit)?;
            let laws = reduced_dist_internal_grid(d, n_grid, *k)?;
            for (&n, law) in n_grid.iter().zip(&laws) {
                let tv = tv_exact(law, &lim);
                rows.push(SweepRow {
                    n,
                    value: tv.to_f64().unwrap(),
                    meta: format!("{}/{}", tv.numer(), tv.denom()),
                });
            }
        }
        MetricSpec::ProbStarInternal { d, k } => {
            let star = PlaneTree::star(k - 1);
            let laws = reduced_dist_internal_grid(d, n_grid, *k)?;
            for (&n, law) in n_grid.iter().zip(&laws) {
                let p = law.prob(&star);
                rows.push(SweepRow {
                    n,
                    value: p.to_f64().unwrap(),
                    meta: format!("{}/{}", p.numer(), p.denom()),
                });
            }
        }
        MetricSpec::McRootDegreeRatio {
            d,
            k,
            samples,
            seed,
        } => {
            for (row_idx, &n) in n_grid.iter().enumerate() {
                let mut rng = RngStream::with_substream(*seed, row_idx as u64);
                let mut sampler = ExactInternalSampler::new(d, n, *k)?;
                let mut acc = 0.0;
                for _ in 0..*samples {
                    let t = sampler.draw(&mut rng);
                    acc += condensation_stats(&t).root_out as f64 / n as f64;
                }
                rows.push(SweepRow {
                    n,
                    value: acc / *samples as f64,
                    meta: format!("N={samples}"),
                });
            }
        }
        MetricSpec::McCoarseOutdegTv {
            d,
            k,
            samples,
            seed,
            cap,
        } => {
            for (row_idx, &n) in n_grid.iter().enumerate() {
                let mut rng = RngStream::with_substream(*seed, 2 * row_idx as u64);
                let mut rng_d = RngStream::with_substream(*seed, 2 * row_idx as u64 + 1);
                let mut sampler = ApproxInternalSampler::new(d, n, *k)?;
                let mut dnk = DnkSampler::new(d, n, *k, None)?;
                let mut tvals = Vec::with_capacity(*samples as usize);
                let mut dvals = Vec::with_capacity(*samples as usize);
                for _ in 0..*samples {
                    tvals.push(coarse_outdeg_stat(&sampler.draw(&mut rng), *cap));
                    dvals.push(coarse_outdeg_stat(&dnk.draw(&mut rng_d).0, *cap));
                }
                let a = EmpiricalBatch::new("coarse-outdeg-conditioned", tvals, *seed);
                let b = EmpiricalBatch::new("coarse-outdeg-coupling", dvals, *seed);
                rows.push(SweepRow {
                    n,
                    value: tv_between(&a, &b),
                    meta: format!("N={samples},cap={cap}"),
                });
            }
        }
    }
    Ok(SweepTable {
        metric: metric.name().into(),
        config: format!("{metric:?}"),
        seed: metric.seed(),
        thresholds: String::new(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LimitLaw;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn geom_half() -> OffspringWeights {
        OffspringWeights::geometric(rat(1, 2)).unwrap()
    }

    #[test]
    fn tv_metric_properties() {
        let p = limit_reduced(&LimitLaw::PoissonType { k: 3 }).unwrap();
        let q = limit_reduced(&LimitLaw::Transfer {
            alpha: BigRational::from_integer(1.into()),
            k: 3,
        })
        .unwrap();
        let r = limit_reduced(&LimitLaw::Star { k: 3 }).unwrap();
        assert!(tv_exact(&p, &p).is_zero());
        assert_eq!(tv_exact(&p, &q), tv_exact(&q, &p));
        // triangle inequality on this triple
        assert!(tv_exact(&p, &r) <= tv_exact(&p, &q) + tv_exact(&q, &r));
        // point masses at distance one
        let a = TreeDist::point_mass("0,-1".parse().unwrap(), "a");
        let b = TreeDist::point_mass("-1".parse().unwrap(), "b");
        assert_eq!(tv_exact(&a, &b), BigRational::from_integer(1.into()));
    }

    #[test]
    fn chi_square_tail_reference_value() {
        // 1 dof upper tail at 3.841 is ~0.05
        assert!((chi_square_tail(1, 3.841) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn chi_square_null_and_power() {
        // sampling straight from a two-atom law: p-value comfortably high
        let q = limit_reduced(&LimitLaw::PoissonType { k: 3 }).unwrap();
        let (atoms, cum) = crate::sample::tree_dist_cumulative(&q);
        let mut rng = RngStream::new(123);
        let values: Vec<PlaneTree> = (0..20_000)
            .map(|_| {
                let i = crate::scalar::Scalar::inverse_cdf_index(&cum, &mut rng);
                atoms[i].clone()
            })
            .collect();
        let batch = EmpiricalBatch::new("null", values, 123);
        let cs = chi_square_vs_tree_dist(&batch, &q).unwrap();
        assert!(cs.p_value > 0.001, "p = {}", cs.p_value);
        // a point mass against the two-atom law is decisively rejected
        let values = vec![atoms[0].clone(); 10_000];
        let batch = EmpiricalBatch::new("point", values, 123);
        let cs = chi_square_vs_tree_dist(&batch, &q).unwrap();
        assert!(cs.p_value < 1e-6);
        // pooling keeps the expected total equal to N (debug-asserted inside)
        let ek: Vec<(u64, f64)> = vec![(0, 0.00001), (1, 0.00009), (2, 0.4999), (3, 0.5)];
        let vals: Vec<u64> = (0..1000).map(|i| 2 + (i % 2)).collect();
        let b2 = EmpiricalBatch::new("pool", vals, 1);
        assert!(chi_square(&b2, &ek).is_ok());
    }

    #[test]
    fn ks_reference_cases() {
        // uniform grid against Beta(1,1) has vanishing distance
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_against_beta(&xs, 1.0, 1.0) < 0.002);
        // all-equal degenerate sample
        let xs = vec![0.25; 50];
        let d = ks_against_beta(&xs, 1.0, 1.0);
        assert!((d - 0.75).abs() < 1e-9, "{d}");
    }

    #[test]
    fn condensation_stats_cases() {
        let star = PlaneTree::star(6);
        let s = condensation_stats(&star);
        assert_eq!(s.root_out, 6);
        assert!(s.root_is_max);
        assert_eq!(s.second_max_out, 0);
        let path: PlaneTree = "0,0,0,-1".parse().unwrap();
        let s = condensation_stats(&path);
        assert_eq!((s.root_out, s.max_out, s.second_max_out), (1, 1, 1));
    }

    #[test]
    fn coarse_stat_drops_root_and_caps() {
        // root with children: internal child with 3 leaves + 2 root leaves
        let t: PlaneTree = "2,2,-1,-1,-1,-1,-1".parse().unwrap();
        assert_eq!(coarse_outdeg_stat(&t, 20), vec![3]);
        assert_eq!(coarse_outdeg_stat(&t, 2), vec![2]);
        assert_eq!(coarse_outdeg_stat(&PlaneTree::star(4), 20), Vec::<u64>::new());
    }

    #[test]
    fn sweep_exact_internal_decreases_for_geometric() {
        let spec = MetricSpec::TvExactInternal {
            d: geom_half(),
            k: 3,
            limit: LimitLaw::Transfer {
                alpha: BigRational::from_integer(1.into()),
                k: 3,
            },
        };
        let table = sweep(&spec, &[20, 40, 80]).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.final_value() < table.initial());
        let csv = table.to_csv();
        assert!(csv.starts_with("# metric=tv-exact-internal"));
        assert!(csv.contains("n,value,meta"));
    }
}
