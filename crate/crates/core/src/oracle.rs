//! Exponential-time ground truth for small networks.
//!
//! [`brute_force_capacity`] evaluates every S-D cut, layer and cross-layer,
//! and returns the smallest cut value. [`max_li_paths`] independently
//! searches for the largest set of linearly independent S-D paths and is
//! only meant for very small fixtures. [`verify_paths`] checks a claimed
//! path set against the definitions.

use std::collections::HashSet;

use thiserror::Error;

use crate::linalg::FMatrix;
use crate::network::{edge_set_rank, Cut, EdgeId, LayeredNetwork, NodeId};
use crate::solver::PathSet;

pub const DEFAULT_ENUMERATION_LIMIT: usize = 22;
pub const PATH_SEARCH_NODE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("network has {found} intermediate nodes; enumeration limit is {limit}")]
    TooManyNodes { found: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub capacity: usize,
    pub argmin_cut: Cut,
    pub cuts_examined: u64,
}

pub fn brute_force_capacity(net: &LayeredNetwork) -> Result<OracleResult, OracleError> {
    brute_force_capacity_with_limit(net, DEFAULT_ENUMERATION_LIMIT)
}

/// Minimum cut value over all `2^(|V| - 2)` cuts. Cut `mask` puts the
/// intermediate nodes whose bit is set (in node order) on the source side;
/// ties resolve to the smallest mask.
pub fn brute_force_capacity_with_limit(net: &LayeredNetwork, limit: usize) -> Result<OracleResult, OracleError> {
    let inner: Vec<NodeId> = (0..net.node_count())
        .map(NodeId)
        .filter(|&n| n != net.source() && n != net.sink())
        .collect();
    if inner.len() > limit.min(63) {
        return Err(OracleError::TooManyNodes {
            found: inner.len(),
            limit,
        });
    }

    // Bit position of each node in the mask; the source is always in,
    // the sink always out.
    let mut bit = vec![None; net.node_count()];
    for (i, &n) in inner.iter().enumerate() {
        bit[n.0] = Some(i);
    }
    let on_source_side = |n: NodeId, mask: u64| -> bool {
        if n == net.source() {
            true
        } else if n == net.sink() {
            false
        } else {
            mask >> bit[n.0].expect("intermediate") & 1 == 1
        }
    };

    let field = net.field();
    let mut row_of = vec![usize::MAX; net.input_count()];
    let mut col_of = vec![usize::MAX; net.output_count()];
    let mut best: Option<(usize, u64)> = None;
    let total: u64 = 1 << inner.len();
    for mask in 0..total {
        let crossing: Vec<usize> = (0..net.edges().len())
            .filter(|&e| {
                let edge = &net.edges()[e];
                on_source_side(edge.from, mask) && !on_source_side(edge.to, mask)
            })
            .collect();
        let (mut rows, mut cols) = (0, 0);
        for &e in &crossing {
            let edge = &net.edges()[e];
            if row_of[edge.input.0] == usize::MAX {
                row_of[edge.input.0] = rows;
                rows += 1;
            }
            if col_of[edge.output.0] == usize::MAX {
                col_of[edge.output.0] = cols;
                cols += 1;
            }
        }
        let mut m = FMatrix::zeros(field, rows, cols);
        for &e in &crossing {
            let edge = &net.edges()[e];
            m.set(row_of[edge.input.0], col_of[edge.output.0], edge.coeff);
        }
        for &e in &crossing {
            let edge = &net.edges()[e];
            row_of[edge.input.0] = usize::MAX;
            col_of[edge.output.0] = usize::MAX;
        }
        let value = m.rank();
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, mask));
            if value == 0 {
                // Nothing can beat zero; later masks only count as examined.
                break;
            }
        }
    }
    let (capacity, mask) = best.expect("at least one cut exists");
    let omega = std::iter::once(net.source()).chain(inner.iter().copied().filter(|&n| on_source_side(n, mask)));
    Ok(OracleResult {
        capacity,
        argmin_cut: Cut::new(net, omega).expect("valid by construction"),
        cuts_examined: total,
    })
}

/// All S-D paths as edge sequences, in lexicographic edge order.
fn all_paths(net: &LayeredNetwork) -> Vec<Vec<EdgeId>> {
    let mut out = Vec::new();
    let mut stack: Vec<(NodeId, Vec<EdgeId>)> = vec![(net.source(), Vec::new())];
    while let Some((node, prefix)) = stack.pop() {
        if node == net.sink() {
            out.push(prefix);
            continue;
        }
        for x in net.node(node).inputs() {
            for &e in net.out_edges(x).iter().rev() {
                let mut p = prefix.clone();
                p.push(e);
                stack.push((net.edge(e).to, p));
            }
        }
    }
    out.sort();
    out
}

/// Largest number of linearly independent S-D paths, by exhaustive search
/// over port-disjoint path subsets. Exponential; limited to tiny networks.
pub fn max_li_paths(net: &LayeredNetwork) -> Result<usize, OracleError> {
    if net.node_count() > PATH_SEARCH_NODE_LIMIT {
        return Err(OracleError::TooManyNodes {
            found: net.node_count(),
            limit: PATH_SEARCH_NODE_LIMIT,
        });
    }
    let paths = all_paths(net);
    let bound = net.min_layer_rank();
    let cuts = net.layer_count() - 1;

    struct Dfs<'a> {
        net: &'a LayeredNetwork,
        paths: &'a [Vec<EdgeId>],
        chosen: Vec<usize>,
        inputs: HashSet<usize>,
        outputs: HashSet<usize>,
        best: usize,
        bound: usize,
        cuts: usize,
    }

    impl Dfs<'_> {
        fn independent(&self) -> bool {
            (0..self.cuts).all(|l| {
                let edges: Vec<EdgeId> = self.chosen.iter().map(|&p| self.paths[p][l]).collect();
                edge_set_rank(self.net, &edges) == edges.len()
            })
        }

        fn go(&mut self, from: usize) {
            if self.best >= self.bound {
                return;
            }
            if self.chosen.len() > self.best && self.independent() {
                self.best = self.chosen.len();
            }
            for p in from..self.paths.len() {
                let path = &self.paths[p];
                let clash = path.iter().any(|&e| {
                    let edge = self.net.edge(e);
                    self.inputs.contains(&edge.input.0) || self.outputs.contains(&edge.output.0)
                });
                if clash {
                    continue;
                }
                for &e in path {
                    let edge = self.net.edge(e);
                    self.inputs.insert(edge.input.0);
                    self.outputs.insert(edge.output.0);
                }
                self.chosen.push(p);
                self.go(p + 1);
                self.chosen.pop();
                for &e in path {
                    let edge = self.net.edge(e);
                    self.inputs.remove(&edge.input.0);
                    self.outputs.remove(&edge.output.0);
                }
            }
        }
    }

    let mut dfs = Dfs {
        net,
        paths: &paths,
        chosen: Vec::new(),
        inputs: HashSet::new(),
        outputs: HashSet::new(),
        best: 0,
        bound,
        cuts,
    };
    dfs.go(0);
    Ok(dfs.best)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathViolation {
    #[error("disconnected path {path} at edge position {position}")]
    DisconnectedPath { path: usize, position: usize },
    #[error("layer cut {layer}: used edges are not a matching (port shared by two edges)")]
    NotAMatching { layer: usize },
    #[error("layer cut {layer}: rank deficit (rank {rank}, {paths} paths)")]
    RankDeficit { layer: usize, rank: usize, paths: usize },
}

/// Checks that every path runs S to D one layer at a time and that in each
/// layer cut the used edges form a matching whose adjacency rank equals the
/// number of paths. Reports the first violation.
pub fn verify_paths(net: &LayeredNetwork, paths: &PathSet) -> Result<(), PathViolation> {
    let cuts = net.layer_count() - 1;
    for (i, path) in paths.paths().iter().enumerate() {
        let mut at = net.source();
        for (pos, &e) in path.iter().enumerate() {
            let edge = net.edge(e);
            if edge.from != at {
                return Err(PathViolation::DisconnectedPath { path: i, position: pos });
            }
            at = edge.to;
        }
        if at != net.sink() || path.len() != cuts {
            return Err(PathViolation::DisconnectedPath {
                path: i,
                position: path.len(),
            });
        }
    }
    for l in 0..cuts {
        let edges = paths.layer_edges(l);
        let inputs: HashSet<_> = edges.iter().map(|&e| net.edge(e).input).collect();
        let outputs: HashSet<_> = edges.iter().map(|&e| net.edge(e).output).collect();
        if inputs.len() != edges.len() || outputs.len() != edges.len() {
            return Err(PathViolation::NotAMatching { layer: l });
        }
        let rank = edge_set_rank(net, &edges);
        if rank != paths.len() {
            return Err(PathViolation::RankDeficit {
                layer: l,
                rank,
                paths: paths.len(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::NetworkFile;
    use crate::network::cut_value;

    fn net(s: &str) -> LayeredNetwork {
        LayeredNetwork::from_file(&NetworkFile::from_json(s).unwrap()).unwrap()
    }

    const CHAIN: &str = r#"{"layers":[[{"id":"S","inputs":1}],[{"id":"A","inputs":1,"outputs":1}],
        [{"id":"B","inputs":1,"outputs":1}],[{"id":"D","outputs":1}]],
        "edges":[{"from":"S","x":0,"to":"A","y":0},{"from":"A","x":0,"to":"B","y":0},{"from":"B","x":0,"to":"D","y":0}]}"#;

    #[test]
    fn edgeless_is_zero() {
        let n =
            net(r#"{"layers":[[{"id":"S","inputs":2}],[{"id":"R","inputs":1,"outputs":1}],[{"id":"D","outputs":2}]]}"#);
        let r = brute_force_capacity(&n).unwrap();
        assert_eq!(r.capacity, 0);
        assert_eq!(cut_value(&n, &r.argmin_cut), 0);
        assert_eq!(max_li_paths(&n).unwrap(), 0);
    }

    #[test]
    fn chain_is_one() {
        let n = net(CHAIN);
        let r = brute_force_capacity(&n).unwrap();
        assert_eq!(r.capacity, 1);
        assert_eq!(r.cuts_examined, 4);
        // smallest mask wins: only S on the source side
        assert_eq!(r.argmin_cut.nodes().collect::<Vec<_>>(), vec![n.source()]);
        assert_eq!(max_li_paths(&n).unwrap(), 1);
    }

    #[test]
    fn all_ones_two_by_two_over_f2() {
        let n = net(r#"{"layers":[[{"id":"S","inputs":2}],[{"id":"D","outputs":2}]],
            "edges":[{"from":"S","x":0,"to":"D","y":0},{"from":"S","x":0,"to":"D","y":1},
                     {"from":"S","x":1,"to":"D","y":0},{"from":"S","x":1,"to":"D","y":1}]}"#);
        assert_eq!(brute_force_capacity(&n).unwrap().capacity, 1);
        assert_eq!(max_li_paths(&n).unwrap(), 1);
    }

    #[test]
    fn size_limit_is_explicit() {
        let n = net(CHAIN);
        assert_eq!(
            brute_force_capacity_with_limit(&n, 1),
            Err(OracleError::TooManyNodes { found: 2, limit: 1 })
        );
    }

    #[test]
    fn verify_catches_each_violation() {
        let n = net(
            r#"{"layers":[[{"id":"S","inputs":2}],[{"id":"A","inputs":2,"outputs":2}],[{"id":"D","outputs":2}]],
            "edges":[{"from":"S","x":0,"to":"A","y":0},{"from":"S","x":1,"to":"A","y":1},
                     {"from":"S","x":1,"to":"A","y":0},
                     {"from":"A","x":0,"to":"D","y":0},{"from":"A","x":1,"to":"D","y":1}]}"#,
        );
        let (e0, e1, e_shared, f0, f1) = (EdgeId(0), EdgeId(1), EdgeId(2), EdgeId(3), EdgeId(4));
        assert_eq!(verify_paths(&n, &PathSet::default()), Ok(()));
        assert_eq!(
            verify_paths(&n, &PathSet::new(vec![vec![e0, f0], vec![e1, f1]])),
            Ok(())
        );
        assert_eq!(
            verify_paths(&n, &PathSet::new(vec![vec![e0]])),
            Err(PathViolation::DisconnectedPath { path: 0, position: 1 })
        );
        assert_eq!(
            verify_paths(&n, &PathSet::new(vec![vec![f0, e0]])),
            Err(PathViolation::DisconnectedPath { path: 0, position: 0 })
        );
        // e1 and e_shared share input x1
        assert_eq!(
            verify_paths(&n, &PathSet::new(vec![vec![e1, f0], vec![e_shared, f1]])),
            Err(PathViolation::NotAMatching { layer: 0 })
        );
        assert_eq!(
            verify_paths(&n, &PathSet::new(vec![vec![e0, f0], vec![e0, f0]])),
            Err(PathViolation::RankDeficit {
                layer: 0,
                rank: 1,
                paths: 2
            })
        );
    }
}
