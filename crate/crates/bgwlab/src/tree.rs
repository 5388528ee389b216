//! Rooted plane trees, their Łukasiewicz coding, and the two reduced-tree
//! decompositions (unary-vertex stripping for the leaf conditioning,
//! leaf stripping for the internal-node conditioning).
//!
//! Vertices are indexed `0..n` in depth-first left-to-right (lexicographic)
//! order with the root at index 0. The canonical text form of a tree is its
//! Łukasiewicz step sequence as comma-separated integers, e.g. `1,-1,-1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("invalid Lukasiewicz path: {0}")]
    InvalidPath(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tree has no internal node")]
    NoInternalNode,
    #[error("enumeration size {requested} exceeds bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },
    #[error("infeasible degree profile: {0}")]
    InfeasibleProfile(String),
}

/// A rooted plane tree stored as per-vertex ordered child lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    children: Vec<Vec<usize>>,
}

impl PlaneTree {
    /// Single-vertex tree.
    pub fn singleton() -> Self {
        PlaneTree {
            children: vec![vec![]],
        }
    }

    /// Star: a root with `leaves` children.
    pub fn star(leaves: usize) -> Self {
        let mut children = vec![(1..=leaves).collect::<Vec<_>>()];
        children.extend(std::iter::repeat_n(vec![], leaves));
        PlaneTree { children }
    }

    pub fn from_children(children: Vec<Vec<usize>>) -> Result<Self, TreeError> {
        let t = PlaneTree { children };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), TreeError> {
        let n = self.len();
        let total: usize = self.children.iter().map(|c| c.len()).sum();
        if total != n - 1 {
            return Err(TreeError::ShapeMismatch(format!(
                "child count {total} != n-1 = {}",
                n - 1
            )));
        }
        // depth-first order: vertex u's subtree must occupy indices
        // u..u+subtree_size contiguously, children in increasing order
        let mut next = 1usize;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((u, ci)) = stack.pop() {
            if ci < self.children[u].len() {
                let c = self.children[u][ci];
                if c != next {
                    return Err(TreeError::ShapeMismatch(format!(
                        "child {c} of {u} breaks lexicographic indexing"
                    )));
                }
                next += 1;
                stack.push((u, ci + 1));
                stack.push((c, 0));
            }
        }
        if next != n {
            return Err(TreeError::ShapeMismatch("unreachable vertices".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn outdegree(&self, u: usize) -> usize {
        self.children[u].len()
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.children[u].is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.children.iter().filter(|c| c.is_empty()).count()
    }

    pub fn internal_count(&self) -> usize {
        self.len() - self.leaf_count()
    }

    /// Count of vertices with each outdegree (the profile `phi_i`).
    pub fn degree_profile(&self) -> BTreeMap<usize, usize> {
        let mut phi = BTreeMap::new();
        for c in &self.children {
            *phi.entry(c.len()).or_insert(0) += 1;
        }
        phi
    }

    /// Outdegrees of internal vertices in lexicographic order (`c^o_i`).
    pub fn internal_outdegrees(&self) -> Vec<usize> {
        self.children
            .iter()
            .map(|c| c.len())
            .filter(|&d| d > 0)
            .collect()
    }

    /// Łukasiewicz steps: outdegree minus one in lexicographic order.
    pub fn steps(&self) -> Vec<i64> {
        self.children.iter().map(|c| c.len() as i64 - 1).collect()
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<String> = self.steps().iter().map(|s| s.to_string()).collect();
        write!(f, "{}", steps.join(","))
    }
}

impl fmt::Debug for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlaneTree({self})")
    }
}

impl FromStr for PlaneTree {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Self, TreeError> {
        let steps: Result<Vec<i64>, _> = s.split(',').map(|p| p.trim().parse::<i64>()).collect();
        let steps =
            steps.map_err(|e| TreeError::InvalidPath(format!("bad step in {s:?}: {e}")))?;
        luka_decode(&LukasiewiczPath::new(steps)?)
    }
}

impl PartialOrd for PlaneTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlaneTree {
    fn cmp(&self, other: &Self) -> Ordering {
        // lexicographic on step sequences
        self.children
            .iter()
            .map(|c| c.len())
            .cmp(other.children.iter().map(|c| c.len()))
            .then(self.len().cmp(&other.len()))
    }
}

/// A validated Łukasiewicz path: steps in `{-1, 0, 1, ...}` whose partial
/// sums stay nonnegative before time `n` and end at `-1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LukasiewiczPath {
    steps: Vec<i64>,
}

impl LukasiewiczPath {
    pub fn new(steps: Vec<i64>) -> Result<Self, TreeError> {
        if steps.is_empty() {
            return Err(TreeError::InvalidPath("empty step sequence".into()));
        }
        let mut w = 0i64;
        for (i, &s) in steps.iter().enumerate() {
            if s < -1 {
                return Err(TreeError::InvalidPath(format!("step {s} < -1 at index {i}")));
            }
            w += s;
            if i + 1 < steps.len() && w < 0 {
                return Err(TreeError::InvalidPath(format!(
                    "partial sum {w} < 0 at time {}",
                    i + 1
                )));
            }
        }
        if w != -1 {
            return Err(TreeError::InvalidPath(format!("final sum {w} != -1")));
        }
        Ok(LukasiewiczPath { steps })
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Encode a tree as its Łukasiewicz path.
pub fn luka_encode(t: &PlaneTree) -> LukasiewiczPath {
    LukasiewiczPath {
        steps: t.steps(),
    }
}

/// Decode a Łukasiewicz path back to the unique tree it encodes.
pub fn luka_decode(p: &LukasiewiczPath) -> Result<PlaneTree, TreeError> {
    let n = p.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    // stack of (vertex, remaining children to attach)
    let mut stack: Vec<(usize, i64)> = vec![(0, p.steps[0] + 1)];
    for v in 1..n {
        while let Some(&(_, 0)) = stack.last() {
            stack.pop();
        }
        let (parent, rem) = stack
            .last_mut()
            .ok_or_else(|| TreeError::InvalidPath("ran out of open vertices".into()))?;
        children[*parent].push(v);
        *rem -= 1;
        stack.push((v, p.steps[v] + 1));
    }
    Ok(PlaneTree { children })
}

/// Smallest index `i` (with `W_0 = 0`) at which the partial-sum walk of
/// `steps` equals `level`, if any.
pub fn first_hitting_time(steps: &[i64], level: i64) -> Option<usize> {
    let mut w = 0i64;
    if w == level {
        return Some(0);
    }
    for (i, &s) in steps.iter().enumerate() {
        w += s;
        if w == level {
            return Some(i + 1);
        }
    }
    None
}

/// Cyclic shift starting at position `r`: `steps[r..], steps[..r]`.
pub fn cyclic_shift(steps: &[i64], r: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(steps.len());
    out.extend_from_slice(&steps[r..]);
    out.extend_from_slice(&steps[..r]);
    out
}

/// Decomposition of a tree into its unary-free reduced tree plus the count
/// of consecutive single-child ancestors attached above each reduced vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LeafAncestorDecomp {
    pub reduced: PlaneTree,
    pub ancestors: Vec<usize>,
}

/// Remove all single-child vertices; the chain between a kept vertex and its
/// reduced parent (or the original root, for the reduced root) is credited to
/// the kept vertex.
pub fn decompose_unary(t: &PlaneTree) -> LeafAncestorDecomp {
    let n = t.len();
    let keep: Vec<usize> = (0..n).filter(|&u| t.outdegree(u) != 1).collect();
    let index_of: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let mut parent = vec![usize::MAX; n];
    for u in 0..n {
        for &c in t.children(u) {
            parent[c] = u;
        }
    }

    let m = keep.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut ancestors = vec![0usize; m];
    for (i, &u) in keep.iter().enumerate() {
        let mut p = parent[u];
        let mut chain = 0usize;
        while p != usize::MAX && t.outdegree(p) == 1 {
            chain += 1;
            p = parent[p];
        }
        ancestors[i] = chain;
        if p != usize::MAX {
            children[index_of[&p]].push(i);
        }
    }
    LeafAncestorDecomp {
        reduced: PlaneTree { children },
        ancestors,
    }
}

/// Inverse of [`decompose_unary`].
pub fn recompose_unary(d: &LeafAncestorDecomp) -> Result<PlaneTree, TreeError> {
    let m = d.reduced.len();
    if d.ancestors.len() != m {
        return Err(TreeError::ShapeMismatch(format!(
            "ancestors length {} != reduced size {m}",
            d.ancestors.len()
        )));
    }
    let n = m + d.ancestors.iter().sum::<usize>();
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(n);
    // emit in depth-first order: chain above u, then u, then u's subtrees
    fn emit(
        u: usize,
        d: &LeafAncestorDecomp,
        children: &mut Vec<Vec<usize>>,
        parent_slot: Option<usize>,
    ) {
        let mut attach = parent_slot;
        for _ in 0..d.ancestors[u] {
            let idx = children.len();
            children.push(Vec::new());
            if let Some(p) = attach {
                children[p].push(idx);
            }
            attach = Some(idx);
        }
        let idx = children.len();
        children.push(Vec::new());
        if let Some(p) = attach {
            children[p].push(idx);
        }
        for &c in d.reduced.children(u) {
            emit(c, d, children, Some(idx));
        }
    }
    emit(0, d, &mut children, None);
    debug_assert_eq!(children.len(), n);
    Ok(PlaneTree { children })
}

/// Decomposition of a tree into its leafless core plus, per internal corner,
/// the number of grafted leaves (minus one at corners around core leaves,
/// which must carry at least one leaf).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoreLeafDecomp {
    pub core: PlaneTree,
    pub leaf_seq: Vec<usize>,
}

/// Remove all leaves. Corners are listed per core vertex in lexicographic
/// order; within a vertex of core outdegree `c` the `c+1` corners sweep
/// left-to-right starting before the first core child.
pub fn decompose_leaves(t: &PlaneTree) -> Result<CoreLeafDecomp, TreeError> {
    if t.len() == 1 {
        return Err(TreeError::NoInternalNode);
    }
    let keep: Vec<usize> = (0..t.len()).filter(|&u| !t.is_leaf(u)).collect();
    let index_of: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); keep.len()];
    let mut leaf_seq = Vec::with_capacity(2 * keep.len() - 1);
    for (i, &u) in keep.iter().enumerate() {
        let mut run = 0usize;
        let mut corners = Vec::new();
        for &c in t.children(u) {
            if t.is_leaf(c) {
                run += 1;
            } else {
                children[i].push(index_of[&c]);
                corners.push(run);
                run = 0;
            }
        }
        corners.push(run);
        if corners.len() == 1 {
            // core leaf: forced leaf not counted
            debug_assert!(corners[0] >= 1);
            corners[0] -= 1;
        }
        leaf_seq.extend(corners);
    }
    Ok(CoreLeafDecomp {
        core: PlaneTree { children },
        leaf_seq,
    })
}

/// Inverse of [`decompose_leaves`].
pub fn recompose_leaves(d: &CoreLeafDecomp) -> Result<PlaneTree, TreeError> {
    let k = d.core.len();
    if d.leaf_seq.len() != 2 * k - 1 {
        return Err(TreeError::ShapeMismatch(format!(
            "leaf sequence length {} != 2k-1 = {}",
            d.leaf_seq.len(),
            2 * k - 1
        )));
    }
    // corner ranges per core vertex, in lexicographic order
    let mut offset = 0usize;
    let mut corner_of: Vec<(usize, usize)> = Vec::with_capacity(k);
    for u in 0..k {
        let c = d.core.outdegree(u);
        corner_of.push((offset, c + 1));
        offset += c + 1;
    }
    debug_assert_eq!(offset, 2 * k - 1);

    let mut children: Vec<Vec<usize>> = Vec::new();
    fn emit(
        u: usize,
        d: &CoreLeafDecomp,
        corner_of: &[(usize, usize)],
        children: &mut Vec<Vec<usize>>,
    ) -> usize {
        let idx = children.len();
        children.push(Vec::new());
        let (start, ncorners) = corner_of[u];
        let forced = if ncorners == 1 { 1 } else { 0 };
        for j in 0..ncorners {
            let leaves = d.leaf_seq[start + j] + if j == 0 { forced } else { 0 };
            for _ in 0..leaves {
                let l = children.len();
                children.push(Vec::new());
                children[idx].push(l);
            }
            if j < ncorners - 1 {
                let c = d.core.children(u)[j];
                let ci = emit(c, d, corner_of, children);
                children[idx].push(ci);
            }
        }
        idx
    }
    emit(0, d, &corner_of, &mut children);
    // re-index: `emit` pushes in dfs order already
    let t = PlaneTree { children };
    debug_assert!(t.validate().is_ok());
    Ok(t)
}

/// Selection predicate for exhaustive tree enumeration.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct TreeFilter {
    pub leaves: Option<usize>,
    pub internal: Option<usize>,
    pub no_unary: bool,
}

impl TreeFilter {
    pub fn all() -> Self {
        TreeFilter::default()
    }
    pub fn leaves(k: usize) -> Self {
        TreeFilter {
            leaves: Some(k),
            ..Default::default()
        }
    }
    pub fn internal(k: usize) -> Self {
        TreeFilter {
            internal: Some(k),
            ..Default::default()
        }
    }
    pub fn no_unary() -> Self {
        TreeFilter {
            no_unary: true,
            ..Default::default()
        }
    }

    fn matches(&self, t: &PlaneTree) -> bool {
        if let Some(k) = self.leaves {
            if t.leaf_count() != k {
                return false;
            }
        }
        if let Some(k) = self.internal {
            if t.internal_count() != k {
                return false;
            }
        }
        if self.no_unary && t.degree_profile().get(&1).copied().unwrap_or(0) > 0 {
            return false;
        }
        true
    }
}

pub const DEFAULT_ENUM_BOUND: usize = 14;

fn enum_bound() -> usize {
    std::env::var("BGWLAB_MAX_ENUM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUM_BOUND)
}

/// All plane trees with `n` vertices matching `filter`, in lexicographic
/// order of their step sequences.
pub fn enumerate_trees(n: usize, filter: TreeFilter) -> Result<Vec<PlaneTree>, TreeError> {
    let bound = enum_bound();
    if n > bound {
        return Err(TreeError::BoundExceeded {
            requested: n,
            bound,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(n);
    fn rec(
        steps: &mut Vec<i64>,
        w: i64,
        n: usize,
        filter: &TreeFilter,
        out: &mut Vec<PlaneTree>,
    ) {
        let i = steps.len();
        if i == n {
            if w == -1 {
                let p = LukasiewiczPath {
                    steps: steps.clone(),
                };
                let t = luka_decode(&p).expect("generated path is valid");
                if filter.matches(&t) {
                    out.push(t);
                }
            }
            return;
        }
        let rem = (n - i) as i64;
        // after this step, rem-1 steps each >= -1 must reach exactly -1
        for s in -1..=(rem - 2 - w).min(n as i64) {
            let w2 = w + s;
            let last = i + 1 == n;
            if (last && w2 == -1) || (!last && w2 >= 0) {
                steps.push(s);
                rec(steps, w2, n, filter, out);
                steps.pop();
            }
        }
    }
    rec(&mut steps, 0, n, &filter, &mut out);
    Ok(out)
}

/// Number of plane trees with exactly `count_j` vertices of outdegree `j`:
/// `multinomial(v; counts) / v` with `v` the total vertex count, by the
/// cycle lemma. Cross-checked against exhaustive enumeration in tests.
pub fn count_prescribed_degrees(profile: &BTreeMap<usize, usize>) -> Result<BigUint, TreeError> {
    let v: usize = profile.values().sum();
    let edges: usize = profile.iter().map(|(j, c)| j * c).sum();
    if v == 0 || edges != v - 1 {
        return Err(TreeError::InfeasibleProfile(format!(
            "v={v}, sum j*count_j={edges} != v-1"
        )));
    }
    let mut num = factorial(v);
    for &c in profile.values() {
        num /= factorial(c);
    }
    let (q, r) = num.div_rem(&BigUint::from(v));
    debug_assert!(r.is_zero(), "multinomial not divisible by v");
    Ok(q)
}

fn factorial(n: usize) -> BigUint {
    let mut f = BigUint::one();
    for i in 2..=n {
        f *= BigUint::from(i);
    }
    f
}

use num_integer::Integer;

/// `count_prescribed_degrees` as usize, panicking on overflow (test helper).
pub fn count_prescribed_degrees_usize(
    profile: &BTreeMap<usize, usize>,
) -> Result<usize, TreeError> {
    Ok(count_prescribed_degrees(profile)?
        .to_usize()
        .expect("count fits in usize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> PlaneTree {
        s.parse().unwrap()
    }

    #[test]
    fn encode_basic() {
        assert_eq!(luka_encode(&PlaneTree::singleton()).steps(), &[-1]);
        assert_eq!(luka_encode(&PlaneTree::star(2)).steps(), &[1, -1, -1]);
        // partial sums of the cherry: 0,1,0,-1
        let p = luka_encode(&PlaneTree::star(2));
        assert_eq!(first_hitting_time(p.steps(), -1), Some(3));
    }

    #[test]
    fn decode_basic() {
        assert_eq!(t("-1"), PlaneTree::singleton());
        let chain = t("0,0,-1");
        assert_eq!(chain.len(), 3);
        assert_eq!(chain.outdegree(0), 1);
        assert_eq!(chain.outdegree(1), 1);
        assert!(chain.is_leaf(2));
    }

    #[test]
    fn invalid_paths_rejected() {
        assert!(LukasiewiczPath::new(vec![-1, -1]).is_err()); // dips early
        assert!(LukasiewiczPath::new(vec![0, 0]).is_err()); // wrong end
        assert!(LukasiewiczPath::new(vec![-2, 1]).is_err()); // step < -1
        assert!(LukasiewiczPath::new(vec![]).is_err());
    }

    #[test]
    fn hitting_times() {
        assert_eq!(first_hitting_time(&[1, -1, -1], -1), Some(3));
        assert_eq!(first_hitting_time(&[-1], -1), Some(1));
        assert_eq!(first_hitting_time(&[0, 0], -1), None);
        assert_eq!(first_hitting_time(&[2, -1], 0), Some(0));
    }

    #[test]
    fn unary_decomposition_examples() {
        // path tree with 5 vertices
        let chain = t("0,0,0,0,-1");
        let d = decompose_unary(&chain);
        assert_eq!(d.reduced, PlaneTree::singleton());
        assert_eq!(d.ancestors, vec![4]);
        assert_eq!(recompose_unary(&d).unwrap(), chain);

        let cherry = PlaneTree::star(2);
        let d = decompose_unary(&cherry);
        assert_eq!(d.reduced, cherry);
        assert_eq!(d.ancestors, vec![0, 0, 0]);

        // unary root above a cherry
        let d = LeafAncestorDecomp {
            reduced: PlaneTree::star(2),
            ancestors: vec![1, 0, 0],
        };
        assert_eq!(recompose_unary(&d).unwrap(), t("0,1,-1,-1"));

        let d = LeafAncestorDecomp {
            reduced: PlaneTree::singleton(),
            ancestors: vec![0],
        };
        assert_eq!(recompose_unary(&d).unwrap(), PlaneTree::singleton());
    }

    #[test]
    fn unary_recompose_shape_mismatch() {
        let d = LeafAncestorDecomp {
            reduced: PlaneTree::star(2),
            ancestors: vec![0, 0],
        };
        assert!(matches!(
            recompose_unary(&d),
            Err(TreeError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn leaf_decomposition_examples() {
        // star: core is a single vertex, one corner holding n-2 extra leaves
        let star = PlaneTree::star(5);
        let d = decompose_leaves(&star).unwrap();
        assert_eq!(d.core, PlaneTree::singleton());
        assert_eq!(d.leaf_seq, vec![4]);
        assert_eq!(recompose_leaves(&d).unwrap(), star);

        // root -> child -> (2 leaves): core is the 2-vertex path
        let y = t("0,1,-1,-1");
        let d = decompose_leaves(&y).unwrap();
        assert_eq!(d.core, t("0,-1"));
        assert_eq!(d.leaf_seq.len(), 3);
        assert_eq!(d.leaf_seq.iter().sum::<usize>(), 4 - 2 - 1);
        assert_eq!(recompose_leaves(&d).unwrap(), y);

        assert_eq!(
            decompose_leaves(&PlaneTree::singleton()),
            Err(TreeError::NoInternalNode)
        );
    }

    #[test]
    fn leaf_recompose_examples() {
        let d = CoreLeafDecomp {
            core: PlaneTree::singleton(),
            leaf_seq: vec![0],
        };
        assert_eq!(recompose_leaves(&d).unwrap(), PlaneTree::star(1));
        let d = CoreLeafDecomp {
            core: PlaneTree::singleton(),
            leaf_seq: vec![3],
        };
        assert_eq!(recompose_leaves(&d).unwrap(), PlaneTree::star(4));
        let d = CoreLeafDecomp {
            core: PlaneTree::singleton(),
            leaf_seq: vec![0, 0],
        };
        assert!(matches!(
            recompose_leaves(&d),
            Err(TreeError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(1, TreeFilter::all()).unwrap().len(), 1);
        assert_eq!(enumerate_trees(4, TreeFilter::all()).unwrap().len(), 5);
        assert_eq!(enumerate_trees(4, TreeFilter::leaves(2)).unwrap().len(), 3);
        // Catalan numbers up to 9 vertices
        let catalan = [1usize, 1, 2, 5, 14, 42, 132, 429, 1430];
        for (i, &c) in catalan.iter().enumerate() {
            assert_eq!(enumerate_trees(i + 1, TreeFilter::all()).unwrap().len(), c);
        }
        assert!(matches!(
            enumerate_trees(40, TreeFilter::all()),
            Err(TreeError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        let trees = enumerate_trees(6, TreeFilter::all()).unwrap();
        for w in trees.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn round_trips_exhaustive_small() {
        for n in 1..=8 {
            for tree in enumerate_trees(n, TreeFilter::all()).unwrap() {
                assert_eq!(luka_decode(&luka_encode(&tree)).unwrap(), tree);
                let d = decompose_unary(&tree);
                assert_eq!(recompose_unary(&d).unwrap(), tree);
                assert_eq!(
                    d.ancestors.iter().sum::<usize>(),
                    n - d.reduced.len(),
                    "ancestor sum invariant for {tree}"
                );
                if tree.len() > 1 {
                    let d = decompose_leaves(&tree).unwrap();
                    assert_eq!(recompose_leaves(&d).unwrap(), tree);
                    let k = tree.internal_count();
                    assert_eq!(d.leaf_seq.len(), 2 * k - 1);
                    let phi0 = d.core.leaf_count();
                    assert_eq!(d.leaf_seq.iter().sum::<usize>(), n - k - phi0);
                }
                let c_sum: usize = (0..tree.len()).map(|u| tree.outdegree(u)).sum();
                assert_eq!(c_sum, n - 1);
            }
        }
    }

    #[test]
    fn prescribed_degree_counts() {
        let mut p = BTreeMap::new();
        p.insert(0, 2);
        p.insert(2, 1);
        assert_eq!(count_prescribed_degrees_usize(&p).unwrap(), 1);
        let mut p = BTreeMap::new();
        p.insert(0, 3);
        p.insert(2, 2);
        assert_eq!(count_prescribed_degrees_usize(&p).unwrap(), 2);
        let mut p = BTreeMap::new();
        p.insert(0, 1);
        assert_eq!(count_prescribed_degrees_usize(&p).unwrap(), 1);
        let mut p = BTreeMap::new();
        p.insert(0, 2);
        assert!(count_prescribed_degrees(&p).is_err());
    }

    #[test]
    fn prescribed_degree_counts_match_enumeration() {
        // every feasible profile arising from trees with <= 9 vertices
        use std::collections::HashMap;
        let mut by_profile: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for n in 1..=9 {
            for tree in enumerate_trees(n, TreeFilter::all()).unwrap() {
                let prof: Vec<(usize, usize)> =
                    tree.degree_profile().into_iter().collect();
                *by_profile.entry(prof).or_insert(0) += 1;
            }
        }
        for (prof, count) in by_profile {
            let map: BTreeMap<usize, usize> = prof.into_iter().collect();
            assert_eq!(
                count_prescribed_degrees_usize(&map).unwrap(),
                count,
                "profile {map:?}"
            );
        }
    }

    #[test]
    fn display_parse_round_trip() {
        for n in 1..=7 {
            for tree in enumerate_trees(n, TreeFilter::all()).unwrap() {
                let s = tree.to_string();
                assert_eq!(s.parse::<PlaneTree>().unwrap(), tree);
            }
        }
    }

    proptest! {
        #[test]
        fn random_steps_round_trip(raw in proptest::collection::vec(-1i64..=3, 1..20)) {
            if let Ok(p) = LukasiewiczPath::new(raw) {
                let tree = luka_decode(&p).unwrap();
                prop_assert_eq!(luka_encode(&tree), p);
            }
        }

        #[test]
        fn corner_count_invariant(raw in proptest::collection::vec(-1i64..=3, 2..16)) {
            if let Ok(p) = LukasiewiczPath::new(raw) {
                let tree = luka_decode(&p).unwrap();
                if tree.len() > 1 {
                    let k = tree.internal_count();
                    let d = decompose_leaves(&tree).unwrap();
                    prop_assert_eq!(d.leaf_seq.len(), 2 * k - 1);
                }
            }
        }
    }
}
