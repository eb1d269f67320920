//! Alternating paths relative to the matching formed by one layer's used edges.

use std::collections::{BTreeMap, VecDeque};

use crate::network::{InputId, OutputId};

/// Read access to one layer cut: its edges and its current matching.
pub trait BipartiteView {
    /// Outputs joined to `x` by an edge, in ascending order.
    fn neighbours(&self, x: InputId) -> Vec<OutputId>;
    fn input_mate(&self, x: InputId) -> Option<OutputId>;
    fn output_mate(&self, y: OutputId) -> Option<InputId>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// `(x, y1), (x1, y1), (x1, y2), ..., (xm, ym)`: starts unused, ends used,
    /// even edge count.
    InputToInput,
    /// `(x1, y), (x1, y2), (x2, y2), ..., (xm, ym)`: starts and ends used,
    /// odd edge count.
    OutputToInput,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingPath {
    pub kind: PathKind,
    pub edges: Vec<(InputId, OutputId)>,
}

impl AlternatingPath {
    /// The input left unmatched once the path is applied.
    pub fn target(&self) -> InputId {
        self.edges.last().expect("alternating paths are nonempty").0
    }

    fn is_used_position(&self, i: usize) -> bool {
        match self.kind {
            PathKind::InputToInput => i % 2 == 1,
            PathKind::OutputToInput => i.is_multiple_of(2),
        }
    }

    /// Edges currently in the matching; applying the path removes them.
    pub fn used_edges(&self) -> Vec<(InputId, OutputId)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.is_used_position(i))
            .map(|(_, &e)| e)
            .collect()
    }

    /// Edges outside the matching; applying the path adds them.
    pub fn unused_edges(&self) -> Vec<(InputId, OutputId)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| !self.is_used_position(i))
            .map(|(_, &e)| e)
            .collect()
    }
}

/// Breadth-first search over inputs, stepping along an unused edge and then
/// the reached output's used edge. `parent[x] = (prev, y)` records the step
/// `prev -> y -> x`.
fn bfs_inputs<V: BipartiteView>(view: &V, root: InputId) -> BTreeMap<InputId, Option<(InputId, OutputId)>> {
    let mut parent: BTreeMap<InputId, Option<(InputId, OutputId)>> = BTreeMap::new();
    let mut queue = VecDeque::from([root]);
    parent.insert(root, None);
    while let Some(x) = queue.pop_front() {
        let own = view.input_mate(x);
        for y in view.neighbours(x) {
            if Some(y) == own {
                continue;
            }
            let Some(next) = view.output_mate(y) else {
                continue;
            };
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, Some((x, y)));
            queue.push_back(next);
        }
    }
    parent
}

fn unwind(
    parent: &BTreeMap<InputId, Option<(InputId, OutputId)>>,
    target: InputId,
) -> Option<Vec<(InputId, OutputId)>> {
    let mut rev = Vec::new();
    let mut cur = target;
    while let Some((prev, y)) = *parent.get(&cur)? {
        rev.push((cur, y));
        rev.push((prev, y));
        cur = prev;
    }
    rev.reverse();
    Some(rev)
}

/// Alternating paths from the unmatched input `source` to each of `targets`
/// (all matched), found with one breadth-first search.
///
/// Returns the first target that cannot be reached as the error.
pub fn paths_from_input<V: BipartiteView>(
    view: &V,
    source: InputId,
    targets: &[InputId],
) -> Result<BTreeMap<InputId, AlternatingPath>, InputId> {
    debug_assert!(view.input_mate(source).is_none());
    if targets.is_empty() {
        return Ok(BTreeMap::new());
    }
    let parent = bfs_inputs(view, source);
    let mut out = BTreeMap::new();
    for &t in targets {
        if t == source {
            return Err(t);
        }
        let edges = unwind(&parent, t).ok_or(t)?;
        out.insert(
            t,
            AlternatingPath {
                kind: PathKind::InputToInput,
                edges,
            },
        );
    }
    Ok(out)
}

/// Alternating path from the matched output `y` to the matched input
/// `target`, starting with `y`'s used edge.
pub fn path_from_output<V: BipartiteView>(view: &V, y: OutputId, target: InputId) -> Option<AlternatingPath> {
    let first = view.output_mate(y)?;
    let parent = bfs_inputs(view, first);
    let mut edges = unwind(&parent, target)?;
    edges.insert(0, (first, y));
    Some(AlternatingPath {
        kind: PathKind::OutputToInput,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adjacency lists plus a matching, all indices local.
    struct Toy {
        adj: Vec<Vec<usize>>,
        mate_in: Vec<Option<usize>>,
        mate_out: Vec<Option<usize>>,
    }

    impl Toy {
        fn new(adj: Vec<Vec<usize>>, outputs: usize, matching: &[(usize, usize)]) -> Self {
            let mut t = Toy {
                mate_in: vec![None; adj.len()],
                mate_out: vec![None; outputs],
                adj,
            };
            for &(x, y) in matching {
                t.mate_in[x] = Some(y);
                t.mate_out[y] = Some(x);
            }
            t
        }

        fn apply(&mut self, p: &AlternatingPath) {
            for (x, y) in p.used_edges() {
                self.mate_in[x.0] = None;
                self.mate_out[y.0] = None;
            }
            for (x, y) in p.unused_edges() {
                assert!(self.mate_in[x.0].is_none() && self.mate_out[y.0].is_none());
                self.mate_in[x.0] = Some(y.0);
                self.mate_out[y.0] = Some(x.0);
            }
        }
    }

    impl BipartiteView for Toy {
        fn neighbours(&self, x: InputId) -> Vec<OutputId> {
            self.adj[x.0].iter().map(|&y| OutputId(y)).collect()
        }
        fn input_mate(&self, x: InputId) -> Option<OutputId> {
            self.mate_in[x.0].map(OutputId)
        }
        fn output_mate(&self, y: OutputId) -> Option<InputId> {
            self.mate_out[y.0].map(InputId)
        }
    }

    fn e(x: usize, y: usize) -> (InputId, OutputId) {
        (InputId(x), OutputId(y))
    }

    #[test]
    fn direct_two_edge_path() {
        let t = Toy::new(vec![vec![0], vec![0]], 1, &[(1, 0)]);
        let paths = paths_from_input(&t, InputId(0), &[InputId(1)]).unwrap();
        assert_eq!(paths[&InputId(1)].edges, vec![e(0, 0), e(1, 0)]);
        assert!(paths_from_input(&t, InputId(0), &[]).unwrap().is_empty());
    }

    #[test]
    fn longer_input_path_keeps_matching_size() {
        // x0 - y0 = x1 - y1 = x2, where = is a used edge
        let mut t = Toy::new(vec![vec![0], vec![0, 1], vec![1]], 2, &[(1, 0), (2, 1)]);
        let paths = paths_from_input(&t, InputId(0), &[InputId(1), InputId(2)]).unwrap();
        let p = &paths[&InputId(2)];
        assert_eq!(p.kind, PathKind::InputToInput);
        assert_eq!(p.edges, vec![e(0, 0), e(1, 0), e(1, 1), e(2, 1)]);
        assert_eq!(p.target(), InputId(2));
        t.apply(p);
        assert_eq!(t.mate_in, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn unreachable_target_is_reported() {
        let t = Toy::new(vec![vec![0], vec![1]], 2, &[(1, 1)]);
        assert_eq!(paths_from_input(&t, InputId(0), &[InputId(1)]), Err(InputId(1)));
    }

    #[test]
    fn output_path_of_length_one_frees_the_edge() {
        let mut t = Toy::new(vec![vec![0]], 1, &[(0, 0)]);
        let p = path_from_output(&t, OutputId(0), InputId(0)).unwrap();
        assert_eq!(p.kind, PathKind::OutputToInput);
        assert_eq!(p.edges, vec![e(0, 0)]);
        t.apply(&p);
        assert_eq!(t.mate_in, vec![None]);
    }

    #[test]
    fn output_path_of_length_three() {
        // used (x1, y1), (x0, y0); x1 also reaches y0. Dropping y1 frees x0.
        let mut t = Toy::new(vec![vec![0], vec![0, 1]], 2, &[(0, 0), (1, 1)]);
        let p = path_from_output(&t, OutputId(1), InputId(0)).unwrap();
        assert_eq!(p.edges, vec![e(1, 1), e(1, 0), e(0, 0)]);
        t.apply(&p);
        assert_eq!(t.mate_in, vec![None, Some(0)]);
        assert_eq!(t.mate_out, vec![Some(1), None]);
    }
}
