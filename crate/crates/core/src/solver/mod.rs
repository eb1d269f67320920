//! Path-augmentation solver for the unicast capacity.
//!
//! Iteration `k + 1` starts from `k` linearly independent paths, stored as
//! one matching `U^l` of used edges per layer cut, and searches for one more.
//! The partial path is implicit: it ends at the one node whose used outputs
//! outnumber its used inputs. Three moves extend or relocate it:
//!
//! * forward move: add an unused edge `(x, y)` out of the current node when
//!   it raises the rank of `U^l`,
//! * same-layer rewiring: swap the current node's input `x` into `U^l` in
//!   place of some `x_j` that `x` depends on, rematching along an alternating
//!   path, and continue from `x_j`'s node,
//! * backward rewiring: drop a used output `y` of the current node from
//!   `U^{l-1}` together with a removable input `x`, rematching the rest, and
//!   continue from `x`'s node.
//!
//! Inputs carry a type: type 1 inputs compute their dependency set by
//! elimination and may start same-layer rewirings, type 2 inputs (reached by
//! such a rewiring) inherit it in `O(k)` and may not.

mod alternating;
mod search;

use std::collections::BTreeMap;

use thiserror::Error;

pub use alternating::{path_from_output, paths_from_input, AlternatingPath, BipartiteView, PathKind};

use crate::format::EdgeRef;
use crate::linalg::LinalgError;
use crate::network::{EdgeId, LayeredNetwork, NetworkError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Solver switches. The defaults give the exact capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverConfig {
    /// Replace backward rewiring with the older trigger: only after a failed
    /// forward move, drop one used edge into the node just entered and
    /// continue from the dropped edge's transmitter. May undercount.
    pub legacy_backward: bool,
    /// Let each input be the target of at most one same-layer rewiring per
    /// iteration. May undercount.
    pub legacy_same_layer: bool,
    /// Re-check matching, rank and rollback invariants after every state
    /// change and collect the findings in [`Solution::audit`].
    pub audit: bool,
}

/// Per-iteration work counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IterationCounters {
    /// Paths held when the iteration started.
    pub k: usize,
    pub succeeded: bool,
    pub type1_visits: u64,
    pub type2_visits: u64,
    pub forward_moves: u64,
    pub same_layer_rewirings: u64,
    pub backward_rewirings: u64,
    /// Gaussian eliminations (dependency solves and removable-input searches).
    pub eliminations: u64,
    /// Type 2 visits whose inherited dependency set was stale and had to be
    /// recomputed by elimination.
    pub stale_lambda_recomputes: u64,
    pub legacy_phi_calls: u64,
    pub legacy_rank_checks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counters {
    pub iterations: Vec<IterationCounters>,
}

impl Counters {
    pub fn total(&self) -> IterationCounters {
        let mut t = IterationCounters::default();
        for it in &self.iterations {
            t.type1_visits += it.type1_visits;
            t.type2_visits += it.type2_visits;
            t.forward_moves += it.forward_moves;
            t.same_layer_rewirings += it.same_layer_rewirings;
            t.backward_rewirings += it.backward_rewirings;
            t.eliminations += it.eliminations;
            t.stale_lambda_recomputes += it.stale_lambda_recomputes;
            t.legacy_phi_calls += it.legacy_phi_calls;
            t.legacy_rank_checks += it.legacy_rank_checks;
        }
        t.k = self.iterations.last().map_or(0, |it| it.k);
        t
    }

    /// Flat name-to-count map of the totals.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        let t = self.total();
        [
            ("iterations", self.iterations.len() as u64),
            ("type1_visits", t.type1_visits),
            ("type2_visits", t.type2_visits),
            ("forward_moves", t.forward_moves),
            ("same_layer_rewirings", t.same_layer_rewirings),
            ("backward_rewirings", t.backward_rewirings),
            ("eliminations", t.eliminations),
            ("stale_lambda_recomputes", t.stale_lambda_recomputes),
            ("legacy_phi_calls", t.legacy_phi_calls),
            ("legacy_rank_checks", t.legacy_rank_checks),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Findings of an audited run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    /// Layer states checked after a committed change.
    pub committed_checks: u64,
    /// Failed branches whose rollback was compared against a snapshot.
    pub rollback_checks: u64,
    pub violations: Vec<String>,
}

/// A set of S-D paths, each a sequence of one edge per layer cut.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSet {
    paths: Vec<Vec<EdgeId>>,
}

impl PathSet {
    pub fn new(paths: Vec<Vec<EdgeId>>) -> Self {
        PathSet { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Vec<EdgeId>] {
        &self.paths
    }

    /// Distinct edges the paths use in layer cut `l`.
    pub fn layer_edges(&self, l: usize) -> Vec<EdgeId> {
        let mut edges: Vec<EdgeId> = self.paths.iter().filter_map(|p| p.get(l).copied()).collect();
        edges.sort();
        edges.dedup();
        edges
    }

    pub fn to_refs(&self, net: &LayeredNetwork) -> Vec<Vec<EdgeRef>> {
        self.paths
            .iter()
            .map(|p| p.iter().map(|&e| net.edge_ref(e)).collect())
            .collect()
    }

    pub fn from_refs(net: &LayeredNetwork, refs: &[Vec<EdgeRef>]) -> Result<Self, NetworkError> {
        let paths = refs
            .iter()
            .map(|p| p.iter().map(|r| net.resolve_edge(r)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PathSet { paths })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub capacity: usize,
    pub paths: PathSet,
    pub counters: Counters,
    pub audit: Option<AuditReport>,
}

/// Computes the unicast capacity together with a maximum set of linearly
/// independent S-D paths.
pub fn capacity(net: &LayeredNetwork, cfg: SolverConfig) -> Result<Solution, SolverError> {
    search::Search::new(net, cfg).run()
}

#[cfg(test)]
mod tests;
