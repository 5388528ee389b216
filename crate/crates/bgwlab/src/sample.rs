//! Samplers: unconditioned branching trees, exact-in-distribution samplers
//! for both biconditionings (decomposition route and cyclic-shift route),
//! a rejection cross-check, limit-object samplers, and the star-coupling
//! tree used by the local-regime comparison.
//!
//! Randomness comes from [`RngStream`], a counter-based generator with a
//! documented algorithm (ChaCha12) and independent substreams, so every
//! experiment is reproducible from `(seed, substream)` across platforms.

use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;
use thiserror::Error;

use crate::dist::{
    bmax, reduced_dist_leaves, DistError, LeafTotalsDp, TreeDist,
};
use crate::offspring::{Conditioning, FamilyError, OffspringWeights};
use crate::scalar::{LogWeight, ScaledRat, Scalar};
use crate::tree::{
    cyclic_shift, first_hitting_time, luka_decode, recompose_leaves, recompose_unary,
    CoreLeafDecomp, LeafAncestorDecomp, LukasiewiczPath, PlaneTree, TreeError,
};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("generation exceeded the {cap}-vertex cap")]
    Overflow { cap: usize },
    #[error("rejection sampler gave up after {tries} tries")]
    GaveUp { tries: u64 },
    #[error("fallback tree invalid: {0}")]
    InvalidFallback(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Default vertex cap for unconditioned generation.
pub const DEFAULT_MAX_VERTICES: usize = 1_000_000;

/// Deterministic random stream: ChaCha12 keyed by a 64-bit seed, with
/// independent substreams selected by the ChaCha stream id. Identical
/// `(seed, substream)` produce identical draws on every platform.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_substream(seed, 0)
    }

    pub fn with_substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn substream(&self, stream: u64) -> Self {
        Self::with_substream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Bookkeeping for a sampling run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SamplerReport {
    pub samples: u64,
    pub rejections: u64,
    pub wall_ms: u128,
}

/// Float proposal sampler for a family's normalized child law, extending its
/// cumulative table lazily (expected scan length is one plus the mean).
pub struct ChildSampler {
    d: OffspringWeights,
    lnw: Vec<f64>,
    cum: Vec<f64>,
    total: f64,
}

impl ChildSampler {
    pub fn new(d: &OffspringWeights) -> Self {
        let total = d.total_weight_f64();
        ChildSampler {
            d: d.clone(),
            lnw: Vec::new(),
            cum: Vec::new(),
            total,
        }
    }

    fn extend_to_cover(&mut self, target: f64) -> usize {
        let mut i = self.cum.len();
        loop {
            if let Some(&last) = self.cum.last() {
                if last > target {
                    break;
                }
            }
            if i > 0 && self.d.max_index().is_some_and(|m| i > m) {
                break;
            }
            if i >= self.lnw.len() {
                // grow geometrically so repeated scans stay amortized linear
                self.lnw = self.d.ln_weight_prefix((2 * (i + 1)).max(16));
            }
            let w = self.lnw[i].exp();
            let prev = self.cum.last().copied().unwrap_or(0.0);
            let next = prev + w;
            self.cum.push(next);
            // guard against a stalled tail far past any realistic mass
            if next == prev && next >= self.total * (1.0 - 1e-12) {
                break;
            }
            i += 1;
        }
        self.cum.partition_point(|&c| c <= target)
    }

    /// Draw a child count from the normalized family law.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let target = rng.gen::<f64>() * self.total;
        let idx = self.extend_to_cover(target);
        idx.min(self.cum.len().saturating_sub(1))
    }

    /// Draw conditioned on the value being at least one.
    pub fn draw_at_least_one<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.extend_to_cover(0.0); // ensure cum[0] exists
        let w0 = self.cum[0];
        let target = w0 + rng.gen::<f64>() * (self.total - w0);
        let idx = self.extend_to_cover(target);
        idx.max(1).min(self.cum.len().saturating_sub(1)).max(1)
    }
}

/// One unconditioned branching tree, depth-first, truncated at `cap`
/// vertices (an `Overflow` result is data; supercritical runs hit it).
/// [`DEFAULT_MAX_VERTICES`] is a sensible cap when none is dictated by the
/// caller.
pub fn sample_bgw(
    d: &OffspringWeights,
    rng: &mut RngStream,
    cap: usize,
) -> Result<PlaneTree, SampleError> {
    let mut child = ChildSampler::new(d);
    sample_bgw_with(&mut child, rng, cap)
}

pub fn sample_bgw_with(
    child: &mut ChildSampler,
    rng: &mut RngStream,
    cap: usize,
) -> Result<PlaneTree, SampleError> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut pending: Vec<(usize, usize)> = Vec::new(); // (vertex, children left)
    let c0 = child.draw(rng);
    pending.push((0, c0));
    while let Some(&mut (v, ref mut left)) = pending.last_mut() {
        if *left == 0 {
            pending.pop();
            continue;
        }
        *left -= 1;
        let u = children.len();
        if u >= cap {
            return Err(SampleError::Overflow { cap });
        }
        children.push(Vec::new());
        children[v].push(u);
        let cu = child.draw(rng);
        pending.push((u, cu));
    }
    Ok(PlaneTree::from_children(children).expect("generated tree is well formed"))
}

/// Uniform composition of `total` into `parts` nonnegative parts, via a
/// uniform (parts-1)-subset of bar positions (Floyd's algorithm).
pub fn sample_composition<R: Rng + ?Sized>(
    total: usize,
    parts: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(parts >= 1);
    if parts == 1 {
        return vec![total];
    }
    let slots = total + parts - 1;
    let m = parts - 1;
    let mut chosen = std::collections::BTreeSet::new();
    for j in (slots - m)..slots {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut out = Vec::with_capacity(parts);
    let mut prev = -1i64;
    for &b in &chosen {
        out.push((b as i64 - prev - 1) as usize);
        prev = b as i64;
    }
    out.push((slots as i64 - 1 - prev) as usize);
    debug_assert_eq!(out.iter().sum::<usize>(), total);
    out
}

/// Standard Gamma-ratio Dirichlet sampler.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, Gamma};
    assert!(params.iter().all(|&a| a > 0.0));
    let draws: Vec<f64> = params
        .iter()
        .map(|&a| Gamma::new(a, 1.0).unwrap().sample(rng).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Exact sampler for the leaf conditioning: draw the reduced tree from its
/// exact law, then a uniform composition of the removed unary vertices.
pub struct LeavesSampler {
    n: usize,
    atoms: Vec<PlaneTree>,
    cum: Vec<ScaledRat>,
}

impl LeavesSampler {
    pub fn new(d: &OffspringWeights, n: usize, k: usize) -> Result<Self, SampleError> {
        let dist = reduced_dist_leaves(d, n, k)?;
        let mut atoms = Vec::new();
        let mut cum = Vec::new();
        let mut acc = ScaledRat::zero();
        for (t, p) in dist.atoms() {
            atoms.push(t.clone());
            acc = acc + ScaledRat::from_rational(p.clone());
            cum.push(acc.clone());
        }
        Ok(LeavesSampler { n, atoms, cum })
    }

    pub fn draw(&self, rng: &mut RngStream) -> PlaneTree {
        let idx = ScaledRat::inverse_cdf_index(&self.cum, rng);
        let reduced = self.atoms[idx].clone();
        let m = reduced.len();
        let ancestors = sample_composition(self.n - m, m, rng);
        recompose_unary(&LeafAncestorDecomp { reduced, ancestors })
            .expect("composition length matches reduced size")
    }
}

/// One-shot draw from the tree conditioned to `n` vertices and `k` leaves.
pub fn sample_leaves_exact(
    d: &OffspringWeights,
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<PlaneTree, SampleError> {
    Ok(LeavesSampler::new(d, n, k)?.draw(rng))
}

/// Cyclic-shift sampler for the leaf conditioning: draw the conditioned step
/// multiset (k down-steps; the other steps from the nonnegative step law
/// conditioned on their sum), interleave uniformly, then rotate to the unique
/// first-passage representative and decode.
pub struct CycleLeavesSampler {
    n: usize,
    k: usize,
    shifted: Vec<ScaledRat>,
    /// suffix[m][s]: weight of m nonnegative steps summing to s
    suffix: Vec<Vec<ScaledRat>>,
    rows: HashMap<(usize, usize), Vec<ScaledRat>>,
}

impl CycleLeavesSampler {
    pub fn new(d: &OffspringWeights, n: usize, k: usize) -> Result<Self, SampleError> {
        assert!(k >= 1 && k <= n);
        let target = k - 1;
        let mut shifted = d.weight_prefix::<ScaledRat>(target + 2)?;
        shifted.remove(0);
        shifted.truncate(target + 1);
        let steps = n - k;
        let mut suffix: Vec<Vec<ScaledRat>> = Vec::with_capacity(steps + 1);
        let mut base = vec![ScaledRat::zero(); target + 1];
        base[0] = ScaledRat::one();
        suffix.push(base);
        for m in 1..=steps {
            let mut row = vec![ScaledRat::zero(); target + 1];
            for (s, slot) in row.iter_mut().enumerate() {
                let mut acc = ScaledRat::zero();
                for y in 0..=s {
                    acc = acc + shifted[y].clone() * suffix[m - 1][s - y].clone();
                }
                *slot = acc;
            }
            suffix.push(row);
        }
        if suffix[steps][target].is_zero() {
            return Err(SampleError::Dist(DistError::EmptyConditioning(format!(
                "no nonnegative step vector of length {steps} sums to {target}"
            ))));
        }
        Ok(CycleLeavesSampler {
            n,
            k,
            shifted,
            suffix,
            rows: HashMap::new(),
        })
    }

    pub fn draw(&mut self, rng: &mut RngStream) -> PlaneTree {
        let (n, k) = (self.n, self.k);
        // nonnegative steps conditioned on total k-1
        let mut up = Vec::with_capacity(n - k);
        let mut s = k - 1;
        for rem in (1..=n - k).rev() {
            if rem == 1 {
                up.push(s as i64);
                break;
            }
            let shifted = &self.shifted;
            let suffix = &self.suffix;
            let row = self.rows.entry((rem, s)).or_insert_with(|| {
                let mut cum = Vec::with_capacity(s + 1);
                let mut acc = ScaledRat::zero();
                for y in 0..=s {
                    acc = acc + shifted[y].clone() * suffix[rem - 1][s - y].clone();
                    cum.push(acc.clone());
                }
                cum
            });
            let y = ScaledRat::inverse_cdf_index(row, rng);
            up.push(y as i64);
            s -= y;
        }
        // uniform positions for the k down-steps (Floyd)
        let mut down = std::collections::BTreeSet::new();
        for j in (n - k)..n {
            let t = rng.gen_range(0..=j);
            if !down.insert(t) {
                down.insert(j);
            }
        }
        let mut steps = Vec::with_capacity(n);
        let mut it = up.into_iter();
        for i in 0..n {
            if down.contains(&i) {
                steps.push(-1);
            } else {
                steps.push(it.next().unwrap());
            }
        }
        // unique valid rotation: start right after the first prefix minimum
        let mut w = 0i64;
        let mut min = i64::MAX;
        let mut argmin = 0usize;
        for (i, &s) in steps.iter().enumerate() {
            w += s;
            if w < min {
                min = w;
                argmin = i + 1;
            }
        }
        let rotated = cyclic_shift(&steps, argmin % n);
        debug_assert_eq!(first_hitting_time(&rotated, -1), Some(n));
        let path = LukasiewiczPath::new(rotated).expect("rotation is a valid path");
        luka_decode(&path).expect("valid path decodes")
    }
}

/// One-shot cyclic-shift draw.
pub fn sample_leaves_cycle(
    d: &OffspringWeights,
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<PlaneTree, SampleError> {
    Ok(CycleLeavesSampler::new(d, n, k)?.draw(rng))
}

/// Exact sampler for the internal-node conditioning: reduced tree from its
/// exact law, per-vertex leaf totals by backward sampling on the suffix
/// tables, then a uniform corner split per vertex.
pub struct InternalSampler<C: Scalar> {
    n: usize,
    trees: Vec<PlaneTree>,
    dps: Vec<Option<LeafTotalsDp<C>>>,
    root_cum: Vec<C>,
    rows: HashMap<(usize, usize, usize), Vec<C>>,
}

/// Exact-arithmetic instantiation (weighted families with rational weights).
pub type ExactInternalSampler = InternalSampler<ScaledRat>;
/// Log-space instantiation for families without exact weights (power law) or
/// very large sizes; draws are float-accurate rather than exact.
pub type ApproxInternalSampler = InternalSampler<LogWeight>;

impl<C: Scalar> InternalSampler<C> {
    pub fn new(d: &OffspringWeights, n: usize, k: usize) -> Result<Self, SampleError> {
        assert!(k >= 1);
        let trees = crate::tree::enumerate_trees(k, crate::tree::TreeFilter::all())?;
        let mut dps = Vec::with_capacity(trees.len());
        let mut root_cum = Vec::with_capacity(trees.len());
        let mut acc = C::zero();
        for a in &trees {
            let phi0 = a.leaf_count();
            if n >= k + phi0 {
                let dp = LeafTotalsDp::<C>::new(d, a, n)?;
                acc = acc + dp.total_weight();
                dps.push(Some(dp));
            } else {
                dps.push(None);
            }
            root_cum.push(acc.clone());
        }
        if acc.is_zero() {
            return Err(SampleError::Dist(DistError::EmptyConditioning(format!(
                "no {n}-vertex tree with {k} internal nodes has positive weight"
            ))));
        }
        Ok(InternalSampler {
            n,
            trees,
            dps,
            root_cum,
            rows: HashMap::new(),
        })
    }

    pub fn draw(&mut self, rng: &mut RngStream) -> PlaneTree {
        let idx = C::inverse_cdf_index(&self.root_cum, rng);
        let dp = self.dps[idx].as_ref().expect("picked tree has weight");
        let core = self.trees[idx].clone();
        let k = core.len();
        // backward-sample totals with memoized cumulative rows
        let mut totals = Vec::with_capacity(k);
        let mut s = dp.budget();
        for u in 0..k {
            if u + 1 == k {
                totals.push(s);
                break;
            }
            let row = self
                .rows
                .entry((idx, u, s))
                .or_insert_with(|| dp.cumulative_row(u, s));
            let i = C::inverse_cdf_index(row, rng);
            totals.push(i);
            s -= i;
        }
        // split each vertex's total uniformly over its corners
        let mut leaf_seq = Vec::with_capacity(2 * k - 1);
        for (u, &total) in totals.iter().enumerate() {
            let c = core.outdegree(u);
            if c == 0 {
                leaf_seq.push(total);
            } else {
                leaf_seq.extend(sample_composition(total, c + 1, rng));
            }
        }
        let t = recompose_leaves(&CoreLeafDecomp {
            core,
            leaf_seq,
        })
        .expect("corner counts match core shape");
        debug_assert_eq!(t.len(), self.n);
        t
    }
}

/// One-shot exact draw from the tree conditioned to `n` vertices and `k`
/// internal nodes.
pub fn sample_internal_exact(
    d: &OffspringWeights,
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<PlaneTree, SampleError> {
    Ok(ExactInternalSampler::new(d, n, k)?.draw(rng))
}

/// Rejection sampler: repeat unconditioned generation until the size and the
/// leaf/internal count match. Independent of the decomposition machinery, so
/// it serves as a cross-check; `GaveUp` is a budget outcome, not an error in
/// the law.
pub fn sample_rejection(
    d: &OffspringWeights,
    n: usize,
    k: usize,
    mode: Conditioning,
    rng: &mut RngStream,
    max_tries: u64,
) -> Result<(PlaneTree, u64), SampleError> {
    let mut child = ChildSampler::new(d);
    for tries in 1..=max_tries {
        let t = match sample_bgw_with(&mut child, rng, n + 1) {
            Ok(t) => t,
            Err(SampleError::Overflow { .. }) => continue,
            Err(e) => return Err(e),
        };
        if t.len() != n {
            continue;
        }
        let stat = match mode {
            Conditioning::Leaves => t.leaf_count(),
            Conditioning::Internal => t.internal_count(),
        };
        if stat == k {
            return Ok((t, tries));
        }
    }
    Err(SampleError::GaveUp { tries: max_tries })
}

/// A batch of rejection draws with acceptance bookkeeping.
pub fn draw_rejection_batch(
    d: &OffspringWeights,
    n: usize,
    k: usize,
    mode: Conditioning,
    rng: &mut RngStream,
    count: u64,
    max_tries: u64,
) -> Result<(Vec<PlaneTree>, SamplerReport), SampleError> {
    let start = std::time::Instant::now();
    let mut out = Vec::with_capacity(count as usize);
    let mut rejections = 0u64;
    for _ in 0..count {
        let (t, tries) = sample_rejection(d, n, k, mode, rng, max_tries)?;
        rejections += tries - 1;
        out.push(t);
    }
    Ok((
        out,
        SamplerReport {
            samples: count,
            rejections,
            wall_ms: start.elapsed().as_millis(),
        },
    ))
}

/// The star-coupling tree: reduced tree a star, non-root internal sizes
/// drawn i.i.d. from the conditioned-positive child law, root absorbing the
/// rest uniformly; falls back to a fixed tree when the sizes overshoot.
pub struct DnkSampler {
    n: usize,
    k: usize,
    child: ChildSampler,
    fallback: PlaneTree,
}

impl DnkSampler {
    /// `fallback` must have `n` vertices and `k` internal nodes; the default
    /// is the deterministic star-of-stars (every non-root internal node
    /// carrying exactly one leaf).
    pub fn new(
        d: &OffspringWeights,
        n: usize,
        k: usize,
        fallback: Option<PlaneTree>,
    ) -> Result<Self, SampleError> {
        assert!(k >= 1);
        let fallback = match fallback {
            Some(t) => t,
            None => {
                if n < (2 * k - 1).max(2) {
                    return Err(SampleError::InvalidFallback(format!(
                        "default needs n >= max(2k-1, 2), got n={n}, k={k}"
                    )));
                }
                let mut leaf_seq = vec![0usize; 2 * k - 1];
                // a singleton core carries one forced leaf, larger cores none
                leaf_seq[0] = if k == 1 { n - 2 } else { n - (2 * k - 1) };
                recompose_leaves(&CoreLeafDecomp {
                    core: PlaneTree::star(k - 1),
                    leaf_seq,
                })?
            }
        };
        if fallback.len() != n || fallback.internal_count() != k {
            return Err(SampleError::InvalidFallback(format!(
                "fallback has {} vertices and {} internal nodes, want ({n}, {k})",
                fallback.len(),
                fallback.internal_count()
            )));
        }
        Ok(DnkSampler {
            n,
            k,
            child: ChildSampler::new(d),
            fallback,
        })
    }

    /// Returns the tree and whether the fallback was used.
    pub fn draw(&mut self, rng: &mut RngStream) -> (PlaneTree, bool) {
        let (n, k) = (self.n, self.k);
        if k == 1 {
            return (PlaneTree::star(n - 1), false);
        }
        let sizes: Vec<usize> = (0..k - 1)
            .map(|_| self.child.draw_at_least_one(rng))
            .collect();
        let used: usize = sizes.iter().sum();
        if used > n - k {
            return (self.fallback.clone(), true);
        }
        let root_comp = sample_composition(n - k - used, k, rng);
        let mut leaf_seq = Vec::with_capacity(2 * k - 1);
        leaf_seq.extend(root_comp);
        leaf_seq.extend(sizes.iter().map(|&z| z - 1));
        let t = recompose_leaves(&CoreLeafDecomp {
            core: PlaneTree::star(k - 1),
            leaf_seq,
        })
        .expect("star corners match");
        (t, false)
    }
}

/// Uniform tree over the maximal degree profile with `k` leaves: shuffle the
/// outdegree multiset, rotate to the unique first-passage representative,
/// decode. Each tree corresponds to exactly one valid rotation of each of
/// its permutations, so the draw is uniform.
pub fn sample_uniform_maximal(
    d: &OffspringWeights,
    k: usize,
    rng: &mut RngStream,
) -> Result<PlaneTree, SampleError> {
    let prof = bmax(d, k);
    if !prof.admissible {
        return Err(SampleError::Dist(DistError::InadmissibleK(k)));
    }
    let mut degrees: Vec<i64> = vec![-1; k];
    for (&j, &c) in &prof.b {
        degrees.extend(std::iter::repeat_n(j as i64 - 1, c));
    }
    // Fisher-Yates
    let v = degrees.len();
    for i in (1..v).rev() {
        let j = rng.gen_range(0..=i);
        degrees.swap(i, j);
    }
    let mut w = 0i64;
    let mut min = i64::MAX;
    let mut argmin = 0usize;
    for (i, &s) in degrees.iter().enumerate() {
        w += s;
        if w < min {
            min = w;
            argmin = i + 1;
        }
    }
    let rotated = cyclic_shift(&degrees, argmin % v);
    let path = LukasiewiczPath::new(rotated).expect("rotation is valid");
    Ok(luka_decode(&path).expect("valid path decodes"))
}

/// Convenience: probabilities of a [`TreeDist`] as a cumulative vector for
/// exact inverse-CDF drawing.
pub fn tree_dist_cumulative(dist: &TreeDist) -> (Vec<PlaneTree>, Vec<ScaledRat>) {
    let mut atoms = Vec::new();
    let mut cum = Vec::new();
    let mut acc = ScaledRat::zero();
    for (t, p) in dist.atoms() {
        atoms.push(t.clone());
        acc = acc + ScaledRat::from_rational(p.clone());
        cum.push(acc.clone());
    }
    (atoms, cum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn geom_half() -> OffspringWeights {
        OffspringWeights::geometric(rat(1, 2)).unwrap()
    }

    #[test]
    fn rng_streams_are_reproducible_and_independent() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        assert_eq!(a.next_u64(), b.next_u64());
        let mut c = RngStream::new(42).substream(1);
        assert_ne!(RngStream::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn bgw_point_mass_family() {
        let d = OffspringWeights::finite(vec![rat(1, 1)]).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..10 {
            assert_eq!(
                sample_bgw(&d, &mut rng, 10).unwrap(),
                PlaneTree::singleton()
            );
        }
    }

    #[test]
    fn bgw_size_frequencies() {
        // P(|T| = 1) = w(0) = 1/2 for the geometric family
        let mut rng = RngStream::new(7);
        let n = 20_000;
        let mut singletons = 0;
        let mut child = ChildSampler::new(&geom_half());
        for _ in 0..n {
            if let Ok(t) = sample_bgw_with(&mut child, &mut rng, DEFAULT_MAX_VERTICES) {
                if t.len() == 1 {
                    singletons += 1;
                }
            }
        }
        let p = singletons as f64 / n as f64;
        let sd = (0.5 * 0.5 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * sd, "p = {p}");

        // P(|T| = 3) = w(2) w(0)^2 = 1/8 for the 0/2 family
        let d = OffspringWeights::finite(vec![rat(1, 2), rat(0, 1), rat(1, 2)]).unwrap();
        let mut count3 = 0;
        let mut child = ChildSampler::new(&d);
        for _ in 0..n {
            if let Ok(t) = sample_bgw_with(&mut child, &mut rng, 100_000) {
                if t.len() == 3 {
                    count3 += 1;
                }
            }
        }
        let p = count3 as f64 / n as f64;
        let sd = (0.125 * 0.875 / n as f64).sqrt();
        assert!((p - 0.125).abs() < 4.0 * sd, "p = {p}");
    }

    #[test]
    fn composition_edge_cases_and_uniformity() {
        let mut rng = RngStream::new(3);
        assert_eq!(sample_composition(0, 4, &mut rng), vec![0, 0, 0, 0]);
        assert_eq!(sample_composition(5, 1, &mut rng), vec![5]);
        // total=1 into 3 parts: each unit vector w.p. 1/3
        let mut counts = [0u32; 3];
        let n = 30_000;
        for _ in 0..n {
            let c = sample_composition(1, 3, &mut rng);
            counts[c.iter().position(|&x| x == 1).unwrap()] += 1;
        }
        for &c in &counts {
            let p = c as f64 / n as f64;
            assert!((p - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn dirichlet_normalizes() {
        let mut rng = RngStream::new(5);
        let mut mean0 = 0.0;
        let n = 5000;
        for _ in 0..n {
            let v = sample_dirichlet(&[1.0, 1.0], &mut rng);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            mean0 += v[0];
        }
        assert!((mean0 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn leaves_samplers_postconditions() {
        let d = geom_half();
        let mut rng = RngStream::new(11);
        // n=3, k=2: the cherry is the only tree
        for _ in 0..5 {
            assert_eq!(
                sample_leaves_exact(&d, 3, 2, &mut rng).unwrap(),
                PlaneTree::star(2)
            );
            assert_eq!(
                sample_leaves_cycle(&d, 3, 2, &mut rng).unwrap(),
                PlaneTree::star(2)
            );
        }
        let exact = LeavesSampler::new(&d, 9, 3).unwrap();
        let mut cycle = CycleLeavesSampler::new(&d, 9, 3).unwrap();
        for _ in 0..200 {
            let t = exact.draw(&mut rng);
            assert_eq!((t.len(), t.leaf_count()), (9, 3));
            let t = cycle.draw(&mut rng);
            assert_eq!((t.len(), t.leaf_count()), (9, 3));
        }
    }

    #[test]
    fn internal_sampler_postconditions() {
        let d = geom_half();
        let mut rng = RngStream::new(13);
        // k=1 is the star, deterministically
        assert_eq!(
            sample_internal_exact(&d, 8, 1, &mut rng).unwrap(),
            PlaneTree::star(7)
        );
        let mut s = ExactInternalSampler::new(&d, 9, 3).unwrap();
        for _ in 0..200 {
            let t = s.draw(&mut rng);
            assert_eq!((t.len(), t.internal_count()), (9, 3));
        }
        // log-space variant obeys the same constraints
        let pl =
            OffspringWeights::power_law(rat(3, 2), BigRational::one(), rat(1, 2)).unwrap();
        let mut s = ApproxInternalSampler::new(&pl, 30, 3).unwrap();
        for _ in 0..100 {
            let t = s.draw(&mut rng);
            assert_eq!((t.len(), t.internal_count()), (30, 3));
        }
    }

    #[test]
    fn rejection_immediate_accept() {
        let d = OffspringWeights::finite(vec![rat(1, 1)]).unwrap();
        let mut rng = RngStream::new(17);
        let (t, tries) =
            sample_rejection(&d, 1, 1, Conditioning::Leaves, &mut rng, 10).unwrap();
        assert_eq!(t, PlaneTree::singleton());
        assert_eq!(tries, 1);
        // impossible target gives up
        assert!(matches!(
            sample_rejection(&d, 2, 1, Conditioning::Leaves, &mut rng, 50),
            Err(SampleError::GaveUp { tries: 50 })
        ));
    }

    #[test]
    fn dnk_sampler_shapes() {
        let d = geom_half();
        let mut rng = RngStream::new(19);
        let mut s = DnkSampler::new(&d, 20, 3, None).unwrap();
        let mut fallbacks = 0;
        for _ in 0..500 {
            let (t, fb) = s.draw(&mut rng);
            assert_eq!((t.len(), t.internal_count()), (20, 3));
            fallbacks += fb as u32;
        }
        // sizes sum rarely exceeds n - k at n = 20
        assert!(fallbacks < 100, "{fallbacks}");
        // k = 1 is always the star
        let mut s1 = DnkSampler::new(&d, 6, 1, None).unwrap();
        assert_eq!(s1.draw(&mut rng).0, PlaneTree::star(5));
        // invalid fallback rejected
        assert!(DnkSampler::new(&d, 20, 3, Some(PlaneTree::star(3))).is_err());
    }

    #[test]
    fn uniform_maximal_support() {
        let d = geom_half();
        let mut rng = RngStream::new(23);
        // k=2: the cherry, always
        for _ in 0..5 {
            assert_eq!(
                sample_uniform_maximal(&d, 2, &mut rng).unwrap(),
                PlaneTree::star(2)
            );
        }
        // k=3: both binary shapes occur, nothing else
        let support = crate::dist::maximal_support_trees(&d, 3).unwrap();
        assert_eq!(support.len(), 2);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let t = sample_uniform_maximal(&d, 3, &mut rng).unwrap();
            assert!(support.contains(&t));
            seen.insert(t);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn identical_seeds_identical_trees() {
        let d = geom_half();
        let draw = |seed| {
            let mut rng = RngStream::new(seed);
            let mut s = ExactInternalSampler::new(&d, 12, 3).unwrap();
            (0..20).map(|_| s.draw(&mut rng).to_string()).collect::<Vec<_>>()
        };
        assert_eq!(draw(99), draw(99));
        assert_ne!(draw(99), draw(100));
    }
}
