//! Exhaustive small-instance oracles: conditional laws computed by direct
//! enumeration of every tree in the conditioning class, independent of the
//! series/decomposition machinery they are used to check.

use num_rational::BigRational;
use std::collections::BTreeMap;

use crate::dist::DistError;
use crate::offspring::OffspringWeights;
use crate::scalar::ScaledRat;
use crate::tree::{decompose_leaves, decompose_unary, enumerate_trees, PlaneTree, TreeFilter};

use num_traits::Zero;

/// All trees with `n` vertices together with their product weights
/// `prod_u w(c_u)`.
pub struct WeightedTrees {
    pub n: usize,
    pub trees: Vec<(PlaneTree, ScaledRat)>,
}

impl WeightedTrees {
    pub fn new(d: &OffspringWeights, n: usize) -> Result<Self, DistError> {
        let prefix = d.weight_prefix::<ScaledRat>(n + 1)?;
        let trees = enumerate_trees(n, TreeFilter::all())?
            .into_iter()
            .map(|t| {
                let mut w = ScaledRat::from_rational(BigRational::from_integer(1.into()));
                for u in 0..t.len() {
                    w = w * prefix[t.outdegree(u)].clone();
                }
                (t, w)
            })
            .collect();
        Ok(WeightedTrees { n, trees })
    }

    fn select(&self, keep: impl Fn(&PlaneTree) -> bool) -> Vec<(PlaneTree, ScaledRat)> {
        self.trees
            .iter()
            .filter(|(t, _)| keep(t))
            .cloned()
            .collect()
    }

    /// Total weight of trees with `k` leaves (or `k` internal nodes).
    pub fn total_weight(&self, k: usize, leaves_mode: bool) -> ScaledRat {
        let mut total = ScaledRat::zero();
        for (t, w) in &self.trees {
            let stat = if leaves_mode {
                t.leaf_count()
            } else {
                t.internal_count()
            };
            if stat == k {
                total = total + w.clone();
            }
        }
        total
    }

    /// Conditional law of the whole tree given the conditioning class.
    pub fn conditional_law(
        &self,
        k: usize,
        leaves_mode: bool,
    ) -> Option<BTreeMap<PlaneTree, BigRational>> {
        let sel = self.select(|t| {
            (if leaves_mode {
                t.leaf_count()
            } else {
                t.internal_count()
            }) == k
        });
        normalize(sel)
    }

    /// Conditional law of the reduced tree given the conditioning class.
    pub fn reduced_law(
        &self,
        k: usize,
        leaves_mode: bool,
    ) -> Option<BTreeMap<PlaneTree, BigRational>> {
        let mut groups: BTreeMap<PlaneTree, ScaledRat> = BTreeMap::new();
        for (t, w) in &self.trees {
            let matches = if leaves_mode {
                t.leaf_count() == k
            } else {
                t.internal_count() == k
            };
            if !matches {
                continue;
            }
            let r = if leaves_mode {
                decompose_unary(t).reduced
            } else {
                decompose_leaves(t).expect("internal count >= 1").core
            };
            let e = groups.entry(r).or_insert_with(ScaledRat::zero);
            *e = e.clone() + w.clone();
        }
        normalize(groups.into_iter().collect())
    }

    /// Conditional law of the sorted vector `(outdegree - 1)` of the
    /// internal nodes, given `k` internal nodes.
    pub fn sorted_outdeg_law(&self, k: usize) -> Option<BTreeMap<Vec<u64>, BigRational>> {
        let mut groups: BTreeMap<Vec<u64>, ScaledRat> = BTreeMap::new();
        for (t, w) in &self.trees {
            if t.internal_count() != k {
                continue;
            }
            let mut ks: Vec<u64> = t
                .internal_outdegrees()
                .iter()
                .map(|&c| c as u64 - 1)
                .collect();
            ks.sort_unstable_by(|a, b| b.cmp(a));
            let e = groups.entry(ks).or_insert_with(ScaledRat::zero);
            *e = e.clone() + w.clone();
        }
        normalize(groups.into_iter().collect())
    }
}

fn normalize<K: Ord>(items: Vec<(K, ScaledRat)>) -> Option<BTreeMap<K, BigRational>> {
    let mut total = ScaledRat::zero();
    for (_, w) in &items {
        total = total + w.clone();
    }
    if total.is_zero() {
        return None;
    }
    Some(
        items
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, w)| (k, w.ratio_to(&total)))
            .collect(),
    )
}
