//! Cross-module consistency checks: samplers against exact laws computed by
//! an independent route, limit-object samplers against reference
//! distributions, and coupling behavior over growing sizes.

use bgwlab::dist::{maximal_support_trees, outdegree_sorted_dist};
use bgwlab::offspring::OffspringWeights;
use bgwlab::sample::{
    sample_composition, sample_dirichlet, sample_uniform_maximal, CycleLeavesSampler,
    DnkSampler, ExactInternalSampler, LeavesSampler, RngStream,
};
use bgwlab::tree::decompose_unary;
use bgwlab::verify::{chi_square, ks_against_beta, tv_between, EmpiricalBatch};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The sorted-outdegree law is computed from the conditioned-step-sum route;
/// the exact sampler is built on the generating-function route. Their
/// maximum-entry marginals must agree (chi-square) at n = 200.
#[test]
fn sorted_outdegree_marginal_matches_sampler_route() {
    let d = OffspringWeights::stable_tail(rat(3, 2), rat(0, 1), rat(1, 2)).unwrap();
    let (n, k) = (200usize, 3usize);
    let law = outdegree_sorted_dist(&d, n, k).unwrap();
    let mut max_marginal: std::collections::BTreeMap<u64, f64> = Default::default();
    for (v, p) in law.atoms() {
        *max_marginal.entry(v[0]).or_insert(0.0) += p.to_f64().unwrap();
    }
    let expected: Vec<(u64, f64)> = max_marginal.into_iter().collect();

    let mut rng = RngStream::new(20_250_810);
    let mut sampler = ExactInternalSampler::new(&d, n, k).unwrap();
    let draws = 10_000usize;
    let values: Vec<u64> = (0..draws)
        .map(|_| {
            let t = sampler.draw(&mut rng);
            let max_out = t.internal_outdegrees().into_iter().max().unwrap();
            (max_out - 1) as u64
        })
        .collect();
    let cs = chi_square(&EmpiricalBatch::new("max-outdeg", values, 1), &expected).unwrap();
    assert!(cs.p_value > 0.01, "chi2 = {}, p = {}", cs.statistic, cs.p_value);
}

/// Dirichlet marginals against their Beta references.
#[test]
fn dirichlet_marginals_match_beta() {
    let mut rng = RngStream::new(31);
    let n = 100_000usize;
    let uniform: Vec<f64> = (0..n)
        .map(|_| sample_dirichlet(&[1.0, 1.0], &mut rng)[0])
        .collect();
    let ks = ks_against_beta(&uniform, 1.0, 1.0);
    // 99% Kolmogorov critical value
    assert!(ks < 1.63 / (n as f64).sqrt(), "ks = {ks}");

    let skewed: Vec<f64> = (0..n)
        .map(|_| sample_dirichlet(&[2.0, 1.0], &mut rng)[0])
        .collect();
    let ks = ks_against_beta(&skewed, 2.0, 1.0);
    assert!(ks < 0.02, "ks = {ks}");
}

/// Uniform compositions have Dirichlet(1,..,1) shape in the large-total
/// limit: the first coordinate over the total is Beta(1, parts-1).
#[test]
fn composition_first_coordinate_beta() {
    let mut rng = RngStream::new(37);
    let total = 2000usize;
    let parts = 3usize;
    let n = 100_000usize;
    let xs: Vec<f64> = (0..n)
        .map(|_| sample_composition(total, parts, &mut rng)[0] as f64 / total as f64)
        .collect();
    let ks = ks_against_beta(&xs, 1.0, (parts - 1) as f64);
    assert!(ks < 0.02, "ks = {ks}");
}

/// The leaf-conditioning ancestor vector, conditioned on a binary reduced
/// tree, has a Beta(1, 2k-2) first marginal in the large-size limit.
#[test]
fn leaves_ancestor_marginal_beta() {
    let d = OffspringWeights::geometric(rat(1, 2)).unwrap();
    let (n, k) = (2000usize, 3usize);
    let sampler = LeavesSampler::new(&d, n, k).unwrap();
    let mut rng = RngStream::new(41);
    let mut xs = Vec::new();
    while xs.len() < 20_000 {
        let t = sampler.draw(&mut rng);
        let dec = decompose_unary(&t);
        if dec.reduced.len() == 2 * k - 1 {
            xs.push(dec.ancestors[0] as f64 / n as f64);
        }
    }
    let ks = ks_against_beta(&xs, 1.0, (2 * k - 2) as f64);
    assert!(ks < 0.02, "ks = {ks}");
}

/// The star-coupling overshoot event becomes rare as n grows.
#[test]
fn dnk_success_probability_grows() {
    let d = OffspringWeights::power_law(rat(3, 2), rat(1, 1), rat(1, 2)).unwrap();
    let draws = 10_000usize;
    let p_success = |n: usize, sub: u64| {
        let mut rng = RngStream::with_substream(43, sub);
        let mut s = DnkSampler::new(&d, n, 3, None).unwrap();
        let fallbacks = (0..draws).filter(|_| s.draw(&mut rng).1).count();
        1.0 - fallbacks as f64 / draws as f64
    };
    let (p50, p200) = (p_success(50, 0), p_success(200, 1));
    assert!(p200 > p50, "P(G): {p50} -> {p200}");
    assert!(p200 > 0.9, "P(G) at n=200 is {p200}");
}

/// The shuffled-multiset sampler is uniform over the maximal-profile trees
/// (chi-square against the enumerated support, k = 5).
#[test]
fn uniform_maximal_is_uniform() {
    let d = OffspringWeights::geometric(rat(1, 2)).unwrap();
    let k = 5usize;
    let support = maximal_support_trees(&d, k).unwrap();
    assert_eq!(support.len(), 14); // binary trees with 5 leaves
    let expected: Vec<(bgwlab::tree::PlaneTree, f64)> = support
        .iter()
        .map(|t| (t.clone(), 1.0 / support.len() as f64))
        .collect();
    let mut rng = RngStream::new(47);
    let draws = 28_000usize;
    let values: Vec<bgwlab::tree::PlaneTree> = (0..draws)
        .map(|_| sample_uniform_maximal(&d, k, &mut rng).unwrap())
        .collect();
    let cs = chi_square(&EmpiricalBatch::new("uniform-maximal", values, 47), &expected)
        .unwrap();
    assert!(cs.p_value > 0.01, "chi2 = {}, p = {}", cs.statistic, cs.p_value);
}

/// The decomposition and cyclic-shift samplers of the leaf conditioning
/// agree with each other empirically.
#[test]
fn leaves_samplers_pairwise_agreement() {
    let d = OffspringWeights::geometric(rat(1, 2)).unwrap();
    let (n, k) = (8usize, 3usize);
    let draws = 20_000usize;
    let mut rng = RngStream::new(53);
    let exact = LeavesSampler::new(&d, n, k).unwrap();
    let a: Vec<_> = (0..draws).map(|_| exact.draw(&mut rng)).collect();
    let mut cycle = CycleLeavesSampler::new(&d, n, k).unwrap();
    let b: Vec<_> = (0..draws).map(|_| cycle.draw(&mut rng)).collect();
    let tv = tv_between(
        &EmpiricalBatch::new("exact", a, 53),
        &EmpiricalBatch::new("cycle", b, 53),
    );
    // two empirical laws over ~100 atoms at N = 2 * 10^4
    assert!(tv < 0.05, "tv = {tv}");
}
