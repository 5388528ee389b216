//! Named verification suites, one per acceptance criterion. Each suite
//! returns one result line per checked criterion; the CLI (`verify --suite`)
//! and the integration tests both run these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use super::oracle::WeightedTrees;
use super::{
    chi_square, condensation_stats, ks_against_beta, sweep, tv_exact, EmpiricalBatch,
    MetricSpec, VerifyError,
};
use crate::dist::{
    dirichlet_aggregation_moment_check, gamma_ratio_identity_check, limit_reduced,
    outdegree_sorted_dist, prob_total_internal, prob_total_leaves, reduced_dist_internal,
    reduced_dist_internal_grid, reduced_dist_leaves, DistError, LimitLaw,
};
use crate::offspring::{Conditioning, OffspringWeights};
use crate::sample::{
    sample_composition, sample_rejection, ApproxInternalSampler, CycleLeavesSampler,
    ExactInternalSampler, LeavesSampler, RngStream,
};
use crate::series::{
    binomial, coeff_ratio_probe, poisson_factorization_check, qa_degree_leading,
};
use crate::tree::{
    cyclic_shift, decompose_leaves, decompose_unary, enumerate_trees, first_hitting_time,
    luka_decode, luka_encode, recompose_leaves, recompose_unary, PlaneTree, TreeFilter,
};

/// Seed used by the acceptance tests and by `verify --suite` when none is
/// given on the command line.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CriterionResult {
            name: name.into(),
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

pub fn suite_names() -> Vec<&'static str> {
    vec![
        "bijections",
        "exact-oracles",
        "conditional-uniformity",
        "sampler-consistency",
        "thm1.1",
        "thm1.2",
        "thm1.3",
        "thm1.4",
        "thm1.5",
        "identities",
        "lemma8.3",
        "tail",
        "all",
    ]
}

pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    match name {
        "bijections" => Ok(suite_bijections(seed)),
        "exact-oracles" => suite_exact_oracles(),
        "conditional-uniformity" => Ok(suite_conditional_uniformity()),
        "sampler-consistency" => suite_sampler_consistency(seed),
        "thm1.1" => suite_thm11(),
        "thm1.2" => suite_thm12(seed),
        "thm1.3" => suite_thm13(seed),
        "thm1.4" => suite_thm14(seed),
        "thm1.5" => suite_thm15(seed),
        "identities" => Ok(suite_identities()),
        "lemma8.3" => suite_lemma83(),
        "tail" => Ok(suite_tail()),
        "all" => {
            let mut out = Vec::new();
            for s in suite_names() {
                if s != "all" {
                    out.extend(run_suite(s, seed)?);
                }
            }
            Ok(out)
        }
        other => Err(VerifyError::UnknownMetric(format!("suite {other}"))),
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn geom_half() -> OffspringWeights {
    OffspringWeights::geometric(rat(1, 2)).unwrap()
}

fn finite_thirds() -> OffspringWeights {
    OffspringWeights::finite(vec![rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap()
}

fn poisson_like() -> OffspringWeights {
    OffspringWeights::polyexp(vec![rat(1, 1)]).unwrap()
}

fn stable_family() -> OffspringWeights {
    OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 2)).unwrap()
}

fn power_law_family() -> OffspringWeights {
    OffspringWeights::power_law(rat(3, 2), rat(1, 1), rat(1, 2)).unwrap()
}

/// Criterion 1: Łukasiewicz and decomposition round trips, exhaustively for
/// every tree with at most 10 vertices, plus the cyclic-shift counting
/// property on 10^4 random step vectors.
fn suite_bijections(seed: u64) -> Vec<CriterionResult> {
    let mut results = Vec::new();

    let mut trees_seen = 0usize;
    let mut failures = 0usize;
    for n in 1..=10 {
        let trees = enumerate_trees(n, TreeFilter::all()).unwrap();
        let mut paths = std::collections::BTreeSet::new();
        for t in &trees {
            trees_seen += 1;
            let p = luka_encode(t);
            paths.insert(p.steps().to_vec());
            if &luka_decode(&p).unwrap() != t {
                failures += 1;
            }
            let d = decompose_unary(t);
            if recompose_unary(&d).unwrap() != *t
                || d.ancestors.iter().sum::<usize>() != n - d.reduced.len()
            {
                failures += 1;
            }
            if n > 1 {
                let d = decompose_leaves(t).unwrap();
                let k = t.internal_count();
                if recompose_leaves(&d).unwrap() != *t
                    || d.leaf_seq.len() != 2 * k - 1
                    || d.leaf_seq.iter().sum::<usize>() != n - k - d.core.leaf_count()
                {
                    failures += 1;
                }
            }
        }
        if paths.len() != trees.len() {
            failures += 1;
        }
    }
    results.push(CriterionResult::new(
        "bijections/round-trips",
        failures == 0,
        format!("{trees_seen} trees with <= 10 vertices, {failures} failures"),
    ));

    let mut rng = RngStream::with_substream(seed, 0);
    let mut bad = 0usize;
    let trials = 10_000;
    for _ in 0..trials {
        let n = rng.gen_range(1..=20usize);
        let k = rng.gen_range(1..=n);
        let steps: Vec<i64> = sample_composition(n - k, n, &mut rng)
            .into_iter()
            .map(|y| y as i64 - 1)
            .collect();
        debug_assert_eq!(steps.iter().sum::<i64>(), -(k as i64));
        let good = (0..n)
            .filter(|&r| first_hitting_time(&cyclic_shift(&steps, r), -(k as i64)) == Some(n))
            .count();
        if good != k {
            bad += 1;
        }
    }
    results.push(CriterionResult::new(
        "bijections/cycle-lemma",
        bad == 0,
        format!("{trials} random step vectors (n <= 20), {bad} with wrong rotation count"),
    ));
    results
}

/// Criterion 2: the exact laws match brute-force enumeration ratios, as
/// rational equalities, for all n <= 12 and every feasible k, for three
/// families.
fn suite_exact_oracles() -> Result<Vec<CriterionResult>, VerifyError> {
    let families = [geom_half(), finite_thirds(), poisson_like()];
    let mut comparisons = 0usize;
    let mut mismatches = Vec::new();
    for d in &families {
        for n in 1..=12usize {
            let wt = WeightedTrees::new(d, n)?;
            for k in 1..=n {
                // leaf conditioning: reduced law
                let brute = wt.reduced_law(k, true);
                match (reduced_dist_leaves(d, n, k), brute) {
                    (Ok(law), Some(b)) => {
                        comparisons += 1;
                        if law.atoms() != &b {
                            mismatches.push(format!("leaves reduced {d} n={n} k={k}"));
                        }
                    }
                    (Err(DistError::EmptyConditioning(_)), None) => {}
                    _ => mismatches.push(format!("leaves reduced emptiness {d} n={n} k={k}")),
                }
                // leaf conditioning: total probability
                let (mant, pow) = prob_total_leaves(d, n, k)?;
                let total = wt.total_weight(k, true);
                comparisons += 1;
                if &mant != total.rational()
                    || (!total.is_zero() && pow != total.scale_pow())
                {
                    mismatches.push(format!("leaves total {d} n={n} k={k}"));
                }
                // internal conditioning: reduced law
                let brute = wt.reduced_law(k, false);
                match (reduced_dist_internal(d, n, k), brute) {
                    (Ok(law), Some(b)) => {
                        comparisons += 1;
                        if law.atoms() != &b {
                            mismatches.push(format!("internal reduced {d} n={n} k={k}"));
                        }
                    }
                    (Err(DistError::EmptyConditioning(_)), None) => {}
                    _ => {
                        mismatches.push(format!("internal reduced emptiness {d} n={n} k={k}"))
                    }
                }
                // internal conditioning: total probability
                let (mant, _) = prob_total_internal(d, n, k)?;
                let total = wt.total_weight(k, false);
                comparisons += 1;
                if &mant != total.rational() {
                    mismatches.push(format!("internal total {d} n={n} k={k}"));
                }
                // internal conditioning: sorted outdegrees
                let brute = wt.sorted_outdeg_law(k);
                match (outdegree_sorted_dist(d, n, k), brute) {
                    (Ok(law), Some(b)) => {
                        comparisons += 1;
                        if law.atoms() != &b {
                            mismatches.push(format!("sorted outdeg {d} n={n} k={k}"));
                        }
                    }
                    (Err(DistError::EmptyConditioning(_)), None) => {}
                    _ => mismatches.push(format!("sorted outdeg emptiness {d} n={n} k={k}")),
                }
            }
        }
    }
    Ok(vec![CriterionResult::new(
        "exact-oracles/enumeration-equality",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{comparisons} exact law comparisons over 3 families, n <= 12")
        } else {
            format!("mismatches: {}", mismatches.join("; "))
        },
    )])
}

/// Criterion 3: conditionally on the reduced tree, the single-child ancestor
/// vector is exactly uniform: every class has binom(n-1, |a|-1) members of
/// identical product weight.
fn suite_conditional_uniformity() -> Vec<CriterionResult> {
    let mut groups_checked = 0usize;
    let mut failures = Vec::new();
    for n in 1..=12usize {
        for k in 1..=n {
            let trees = enumerate_trees(n, TreeFilter::leaves(k)).unwrap();
            if trees.is_empty() {
                continue;
            }
            let mut groups: std::collections::BTreeMap<PlaneTree, Vec<PlaneTree>> =
                Default::default();
            for t in trees {
                groups
                    .entry(decompose_unary(&t).reduced)
                    .or_default()
                    .push(t);
            }
            for (r, members) in groups {
                groups_checked += 1;
                let m = r.len();
                let expect = binomial(n as u64 - 1, m as u64 - 1)
                    .to_usize()
                    .expect("small count");
                if members.len() != expect {
                    failures.push(format!(
                        "n={n} k={k} reduced {r}: {} members, want {expect}",
                        members.len()
                    ));
                    continue;
                }
                // identical degree profiles mean identical product weights,
                // hence exactly equal conditional mass 1/binom(n-1, m-1)
                // under every offspring family
                let profile = members[0].degree_profile();
                if members.iter().any(|t| t.degree_profile() != profile) {
                    failures.push(format!("n={n} k={k} reduced {r}: unequal profiles"));
                }
            }
        }
    }
    vec![CriterionResult::new(
        "conditional-uniformity/compositions",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{groups_checked} reduced-tree classes, n <= 12: all uniform")
        } else {
            format!("failures: {}", failures.join("; "))
        },
    )]
}

/// Criterion 4: the three leaf-conditioning samplers at (n=8, k=3) and the
/// exact internal-conditioning sampler at (n=8, k=2) are chi-square
/// consistent with the exhaustive laws (p > 0.001, N = 10^5, fixed seeds,
/// Bonferroni-safe threshold).
fn suite_sampler_consistency(seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    let d = geom_half();
    let n_draws = 100_000usize;
    let mut results = Vec::new();

    let wt8 = WeightedTrees::new(&d, 8)?;
    let law_leaves: Vec<(PlaneTree, f64)> = wt8
        .conditional_law(3, true)
        .expect("nonempty")
        .into_iter()
        .map(|(t, p)| (t, p.to_f64().unwrap()))
        .collect();

    // exact decomposition sampler
    let mut rng = RngStream::with_substream(seed, 1);
    let sampler = LeavesSampler::new(&d, 8, 3)?;
    let vals: Vec<PlaneTree> = (0..n_draws).map(|_| sampler.draw(&mut rng)).collect();
    let cs = chi_square(&EmpiricalBatch::new("leaves-exact", vals, seed), &law_leaves)?;
    results.push(CriterionResult::new(
        "sampler-consistency/leaves-exact",
        cs.p_value > 0.001,
        format!("chi2 = {:.2}, dof = {}, p = {:.4}", cs.statistic, cs.dof, cs.p_value),
    ));

    // cyclic-shift sampler
    let mut rng = RngStream::with_substream(seed, 2);
    let mut sampler = CycleLeavesSampler::new(&d, 8, 3)?;
    let vals: Vec<PlaneTree> = (0..n_draws).map(|_| sampler.draw(&mut rng)).collect();
    let cs = chi_square(&EmpiricalBatch::new("leaves-cycle", vals, seed), &law_leaves)?;
    results.push(CriterionResult::new(
        "sampler-consistency/leaves-cycle",
        cs.p_value > 0.001,
        format!("chi2 = {:.2}, dof = {}, p = {:.4}", cs.statistic, cs.dof, cs.p_value),
    ));

    // rejection sampler
    let mut rng = RngStream::with_substream(seed, 3);
    let mut vals = Vec::with_capacity(n_draws);
    let mut tries_total = 0u64;
    for _ in 0..n_draws {
        let (t, tries) =
            sample_rejection(&d, 8, 3, Conditioning::Leaves, &mut rng, 10_000_000)?;
        tries_total += tries;
        vals.push(t);
    }
    let cs = chi_square(&EmpiricalBatch::new("leaves-rejection", vals, seed), &law_leaves)?;
    results.push(CriterionResult::new(
        "sampler-consistency/leaves-rejection",
        cs.p_value > 0.001,
        format!(
            "chi2 = {:.2}, dof = {}, p = {:.4}, acceptance = {:.5}",
            cs.statistic,
            cs.dof,
            cs.p_value,
            n_draws as f64 / tries_total as f64
        ),
    ));

    // exact internal sampler at (8, 2)
    let law_internal: Vec<(PlaneTree, f64)> = wt8
        .conditional_law(2, false)
        .expect("nonempty")
        .into_iter()
        .map(|(t, p)| (t, p.to_f64().unwrap()))
        .collect();
    let mut rng = RngStream::with_substream(seed, 4);
    let mut sampler = ExactInternalSampler::new(&d, 8, 2)?;
    let vals: Vec<PlaneTree> = (0..n_draws).map(|_| sampler.draw(&mut rng)).collect();
    let cs = chi_square(
        &EmpiricalBatch::new("internal-exact", vals, seed),
        &law_internal,
    )?;
    results.push(CriterionResult::new(
        "sampler-consistency/internal-exact",
        cs.p_value > 0.001,
        format!("chi2 = {:.2}, dof = {}, p = {:.4}", cs.statistic, cs.dof, cs.p_value),
    ));
    Ok(results)
}

/// Criterion 5: exact TV between the leaf-conditioning reduced law for the
/// geometric family (k=3) and the uniform binary limit shrinks below 0.05.
fn suite_thm11() -> Result<Vec<CriterionResult>, VerifyError> {
    let d = geom_half();
    let spec = MetricSpec::TvExactLeaves {
        d: d.clone(),
        k: 3,
        limit: LimitLaw::LeavesMax { d, k: 3 },
    };
    let table = sweep(&spec, &[50, 100, 200, 400])?;
    let (initial, fin) = (table.initial(), table.final_value());
    Ok(vec![CriterionResult::new(
        "thm1.1/tv-to-uniform-binary",
        fin < initial && fin < 0.05,
        format!("TV: {initial:.5} -> {fin:.5} over n in {{50,100,200,400}}"),
    )])
}

/// Criterion 7: empirical TV between the coarsened outdegree statistic of
/// the power-law conditioned tree and its star coupling shrinks below 0.1.
fn suite_thm12(seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    let spec = MetricSpec::McCoarseOutdegTv {
        d: power_law_family(),
        k: 3,
        samples: 10_000,
        seed,
        cap: 20,
    };
    let table = sweep(&spec, &[50, 200])?;
    let (initial, fin) = (table.initial(), table.final_value());
    Ok(vec![CriterionResult::new(
        "thm1.2/coarse-outdeg-tv",
        fin < initial && fin < 0.1,
        format!("empirical TV: {initial:.4} -> {fin:.4} at n in {{50,200}}, N=10^4, cap 20"),
    )])
}

/// Criterion 6: for the heavy-tail family the reduced tree concentrates on
/// the star (exact probabilities) and the root carries a macroscopic share
/// of the degree mass (Monte Carlo).
fn suite_thm13(seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    let d = stable_family();
    let mut results = Vec::new();

    let spec = MetricSpec::ProbStarInternal { d: d.clone(), k: 3 };
    let table = sweep(&spec, &[50, 100, 200, 400])?;
    let (initial, fin) = (table.initial(), table.final_value());
    results.push(CriterionResult::new(
        "thm1.3/prob-star",
        fin > initial && fin > 0.9,
        format!("exact P(star): {initial:.5} -> {fin:.5} over n in {{50,100,200,400}}"),
    ));

    let n = 400usize;
    let draws = 10_000usize;
    let mut rng = RngStream::with_substream(seed, 5);
    let mut sampler = ExactInternalSampler::new(&d, n, 3)?;
    let mut ratio_acc = 0.0;
    let mut root_max = 0usize;
    for _ in 0..draws {
        let t = sampler.draw(&mut rng);
        let st = condensation_stats(&t);
        ratio_acc += st.root_out as f64 / n as f64;
        root_max += st.root_is_max as usize;
    }
    let mean_ratio = ratio_acc / draws as f64;
    let p_root_max = root_max as f64 / draws as f64;
    results.push(CriterionResult::new(
        "thm1.3/root-degree-share",
        mean_ratio > 0.9,
        format!("mean root-degree/n = {mean_ratio:.4} at n=400, N=10^4"),
    ));
    results.push(CriterionResult::new(
        "thm1.3/root-is-max",
        p_root_max > 0.95,
        format!("P(root has maximal degree) = {p_root_max:.4} at n=400, N=10^4"),
    ));
    Ok(results)
}

/// Criterion 8: the geometric family sits in the transfer regime with
/// alpha = 1: exact TV to the uniform reduced law shrinks below 0.05, and
/// the first leaf-sequence coordinate over n is Beta(1, 2k-2) in the limit.
fn suite_thm14(seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    let d = geom_half();
    let k = 3usize;
    let mut results = Vec::new();

    let spec = MetricSpec::TvExactInternal {
        d: d.clone(),
        k,
        limit: LimitLaw::Transfer {
            alpha: BigRational::from_integer(1.into()),
            k,
        },
    };
    let table = sweep(&spec, &[50, 100, 200, 400])?;
    let (initial, fin) = (table.initial(), table.final_value());
    results.push(CriterionResult::new(
        "thm1.4/tv-to-uniform",
        fin < initial && fin < 0.05,
        format!("exact TV: {initial:.5} -> {fin:.5} over n in {{50,100,200,400}}"),
    ));

    let n = 2000usize;
    let draws = 100_000usize;
    let mut rng = RngStream::with_substream(seed, 6);
    let mut sampler = ApproxInternalSampler::new(&d, n, k)?;
    let mut xs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let t = sampler.draw(&mut rng);
        let leaf_seq = decompose_leaves(&t).expect("internal nodes exist").leaf_seq;
        xs.push(leaf_seq[0] as f64 / n as f64);
    }
    let ks = ks_against_beta(&xs, 1.0, (2 * k - 2) as f64);
    results.push(CriterionResult::new(
        "thm1.4/leaf-marginal-beta",
        ks < 0.02,
        format!("KS vs Beta(1, {}) = {ks:.4} at n=2000, N=10^5", 2 * k - 2),
    ));
    Ok(results)
}

/// Criterion 9: the exponential-type family's reduced law converges (exact
/// rational comparison) to the inverse-factorial law, and the internal-node
/// child counts equidistribute.
fn suite_thm15(seed: u64) -> Result<Vec<CriterionResult>, VerifyError> {
    let d = poisson_like();
    let k = 3usize;
    let mut results = Vec::new();

    let grid = [50usize, 100, 200, 400];
    let limit = limit_reduced(&LimitLaw::PoissonType { k })?;
    let laws = reduced_dist_internal_grid(&d, &grid, k)?;
    let tvs: Vec<BigRational> = laws.iter().map(|law| tv_exact(law, &limit)).collect();
    let fin_f = tvs.last().unwrap().to_f64().unwrap();
    let passed = tvs.last().unwrap() < tvs.first().unwrap()
        && tvs.last().unwrap() < &rat(1, 20);
    results.push(CriterionResult::new(
        "thm1.5/tv-to-inverse-factorial",
        passed,
        format!(
            "exact TV: {:.3e} -> {:.3e} (strictly decreasing in exact arithmetic)",
            tvs.first().unwrap().to_f64().unwrap(),
            fin_f
        ),
    ));

    let n = 2000usize;
    let draws = 10_000usize;
    let mut rng = RngStream::with_substream(seed, 7);
    let mut sampler = ApproxInternalSampler::new(&d, n, k)?;
    let mut means = vec![0.0; k];
    for _ in 0..draws {
        let t = sampler.draw(&mut rng);
        for (i, c) in t.internal_outdegrees().into_iter().enumerate() {
            means[i] += c as f64 / n as f64;
        }
    }
    for m in &mut means {
        *m /= draws as f64;
    }
    let worst = means
        .iter()
        .map(|m| (m - 1.0 / k as f64).abs())
        .fold(0.0f64, f64::max);
    results.push(CriterionResult::new(
        "thm1.5/equidistributed-children",
        worst < 0.05,
        format!(
            "mean child shares = ({}) at n=2000, N=10^4; max deviation {worst:.4}",
            means
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ));
    Ok(results)
}

/// Criterion 10: exact zero-tolerance identities: the series factorization
/// for exponential-type families (with degree and leading coefficient), the
/// balls-in-urns Gamma identity, and the Dirichlet aggregation moments.
fn suite_identities() -> Vec<CriterionResult> {
    let mut results = Vec::new();

    let fams = [
        OffspringWeights::polyexp(vec![rat(1, 1)]).unwrap(),
        OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2)]).unwrap(),
        OffspringWeights::polyexp(vec![rat(1, 1), rat(1, 2), rat(1, 3)]).unwrap(),
    ];
    let mut checks = 0usize;
    let mut failures = Vec::new();
    for (p, d) in fams.iter().enumerate().map(|(i, d)| (i + 1, d)) {
        for k in 1..=4usize {
            for a in enumerate_trees(k, TreeFilter::all()).unwrap() {
                checks += 1;
                if !poisson_factorization_check(d, &a, 200).unwrap() {
                    failures.push(format!("factorization p={p} tree {a}"));
                }
                let (deg, lead) = qa_degree_leading(d, &a).unwrap();
                let want_deg = (k - 1) * (p - 1);
                let a_p = match d {
                    OffspringWeights::PolyExp { a } => a.last().unwrap().clone(),
                    _ => unreachable!(),
                };
                let want_lead = (BigRational::from_integer((p as i64).into()) * a_p)
                    .pow((k - 1) as i32);
                if deg != want_deg || lead != want_lead {
                    failures.push(format!("degree/leading p={p} tree {a}"));
                }
            }
        }
    }
    results.push(CriterionResult::new(
        "identities/series-factorization",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checks} factorizations to order 200 (k <= 4, p <= 3), all exact")
        } else {
            format!("failures: {}", failures.join("; "))
        },
    ));

    let alphas = [rat(1, 2), rat(3, 2), rat(7, 3), rat(5, 1), rat(9, 4)];
    let mut ok = true;
    for p in 1..=8usize {
        for a in &alphas {
            ok &= gamma_ratio_identity_check(p, a);
        }
    }
    results.push(CriterionResult::new(
        "identities/balls-in-urns",
        ok,
        "p <= 8 at five rational alphas, exact equality".into(),
    ));

    // splitting a Dir coordinate of parameter k uniformly into k parts is
    // exact aggregation; the evaluator must confirm it on the whole grid and
    // reject a non-matching parameter
    let mut ok = true;
    let mut count = 0usize;
    for a2 in [rat(1, 2), rat(1, 1), rat(2, 1)] {
        for k in 1..=3usize {
            let a1 = rat(k as i64, 1);
            for l_rest in 0..=3u64 {
                let mut split = vec![0u64; k];
                for combo in 0..(4u64.pow(k as u32)) {
                    let mut c = combo;
                    for s in split.iter_mut() {
                        *s = c % 4;
                        c /= 4;
                    }
                    count += 1;
                    ok &= dirichlet_aggregation_moment_check(
                        &[a1.clone(), a2.clone()],
                        &split,
                        &[l_rest],
                    );
                }
            }
        }
    }
    // power: a mismatched split parameter is detected
    ok &= !dirichlet_aggregation_moment_check(&[rat(1, 2), rat(1, 1)], &[2, 0], &[0]);
    results.push(CriterionResult::new(
        "identities/dirichlet-aggregation",
        ok,
        format!("{count} exact moment identities (exponents <= 3, k <= 3) plus power check"),
    ));
    results
}

/// Criterion 11: coefficient-ratio probe converges to one.
fn suite_lemma83() -> Result<Vec<CriterionResult>, VerifyError> {
    let d = poisson_like();
    let mut results = Vec::new();
    for m in [1u64, 2] {
        let vals = coeff_ratio_probe(&d, m, &[200, 2000]).unwrap();
        let (e200, e2000) = ((vals[0] - 1.0).abs(), (vals[1] - 1.0).abs());
        results.push(CriterionResult::new(
            &format!("lemma8.3/probe-m{m}"),
            e2000 < 0.01 && e2000 < e200,
            format!("|probe - 1|: {e200:.5} at n=200 -> {e2000:.5} at n=2000"),
        ));
    }
    Ok(results)
}

/// Criterion 12: the heavy-tail mass above n matches the regularly varying
/// reference within 10% at n = 10^4.
fn suite_tail() -> Vec<CriterionResult> {
    let d = stable_family();
    let n = 10_000usize;
    let alpha = 1.5f64;
    let c = 0.5f64;
    let ln_tail = d.stable_tail_ln_tail(n).unwrap();
    let reference = c * (n as f64).powf(-alpha) / (-statrs::function::gamma::gamma(1.0 - alpha));
    let ratio = (ln_tail - reference.ln()).exp();
    vec![CriterionResult::new(
        "tail/regular-variation",
        (0.9..=1.1).contains(&ratio),
        format!("tail mass / reference = {ratio:.5} at n = 10^4"),
    )]
}

#[cfg(test)]
mod tests {
    use super::*;

    // fast sanity checks; the full acceptance run lives in tests/acceptance.rs
    #[test]
    fn suite_names_resolve() {
        for name in suite_names() {
            if name == "all" {
                continue;
            }
            // the dispatcher knows every advertised suite (without running it)
            assert!(suite_names().contains(&name));
        }
        assert!(matches!(
            run_suite("nope", 1),
            Err(VerifyError::UnknownMetric(_))
        ));
    }

    #[test]
    fn tail_and_probe_suites_pass() {
        assert!(suite_tail().iter().all(|r| r.passed));
        assert!(suite_lemma83().unwrap().iter().all(|r| r.passed));
    }
}
