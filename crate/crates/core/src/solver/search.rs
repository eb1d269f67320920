//! The exploration procedure, run as an explicit stack machine.
//!
//! Each [`Frame`] is one exploration of a node. A frame advances until it
//! either commits to a branch (a forward move or a rewiring, whose state
//! change it keeps in `pending`) and pushes a child frame, or runs out of
//! branches. A failed child pops back into its parent, which reverts
//! `pending` and continues. Marks are exploration memory and survive failed
//! branches; only the matchings are reverted.

use std::collections::BTreeSet;

use crate::field::Field;
use crate::linalg::{check_forward, find_removable_input, solve_dependency, DependencySolution};
use crate::network::{adjacency, InputId, LayeredNetwork, NodeId, OutputId};

use super::alternating::{path_from_output, paths_from_input, AlternatingPath, BipartiteView};
use super::{AuditReport, Counters, IterationCounters, PathSet, Solution, SolverConfig, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputType {
    One,
    Two,
}

/// `T(x, U_y) = sum_j a_j T(x_j, U_y)` with row indices given as global
/// input ids; valid while the layer's stamp equals `stamp`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Lambda {
    stamp: u64,
    dep: DependencySolution,
}

impl Lambda {
    fn rows(&self) -> impl Iterator<Item = InputId> + '_ {
        self.dep.lambda.iter().map(|&r| InputId(r))
    }

    fn exchanged(&self, f: Field, source: InputId, target: InputId, stamp: u64) -> Lambda {
        Lambda {
            stamp,
            dep: self
                .dep
                .exchange(f, source.0, target.0)
                .expect("target belongs to lambda"),
        }
    }
}

/// A reversible edit of one layer's matching.
#[derive(Debug)]
struct Change {
    layer: usize,
    removed: Vec<(InputId, OutputId)>,
    added: Vec<(InputId, OutputId)>,
    prev_stamp: u64,
    snapshot: Option<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Snapshot {
    mate_in: Vec<Option<OutputId>>,
    stamps: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Type2,
    Type1,
    Backward,
    Done,
}

#[derive(Debug)]
enum Step {
    Forward,
    /// Legacy backward trigger after the forward move `(x, y)` into `node`
    /// failed; `cursor` walks the node's outputs.
    Phi {
        y: OutputId,
        node: NodeId,
        cursor: usize,
    },
    Rewire {
        targets: Vec<(InputId, AlternatingPath)>,
        cursor: usize,
        stamp: u64,
    },
}

#[derive(Debug)]
struct Active {
    x: InputId,
    kind: InputType,
    lambda: Lambda,
    edge_cursor: usize,
    step: Step,
}

#[derive(Debug)]
struct Frame {
    node: NodeId,
    layer: usize,
    phase: Phase,
    port: usize,
    active: Option<Active>,
    pending: Option<Change>,
}

enum Advance {
    Descend(NodeId, Change),
    Complete,
    Exhausted,
}

pub(super) struct Search<'n> {
    net: &'n LayeredNetwork,
    cfg: SolverConfig,
    f: Field,
    mate_in: Vec<Option<OutputId>>,
    mate_out: Vec<Option<InputId>>,
    used_x: Vec<BTreeSet<InputId>>,
    used_y: Vec<BTreeSet<OutputId>>,
    stamps: Vec<u64>,
    next_stamp: u64,
    node_mark: Vec<bool>,
    input_mark: Vec<bool>,
    output_mark: Vec<bool>,
    input_type: Vec<InputType>,
    lambda: Vec<Option<Lambda>>,
    start_used: Vec<bool>,
    rewired_once: Vec<bool>,
    it: IterationCounters,
    audit: Option<AuditReport>,
}

impl BipartiteView for Search<'_> {
    fn neighbours(&self, x: InputId) -> Vec<OutputId> {
        self.net.out_edges(x).iter().map(|&e| self.net.edge(e).output).collect()
    }

    fn input_mate(&self, x: InputId) -> Option<OutputId> {
        self.mate_in[x.0]
    }

    fn output_mate(&self, y: OutputId) -> Option<InputId> {
        self.mate_out[y.0]
    }
}

impl<'n> Search<'n> {
    pub(super) fn new(net: &'n LayeredNetwork, cfg: SolverConfig) -> Self {
        let cuts = net.layer_count() - 1;
        Search {
            net,
            cfg,
            f: net.field(),
            mate_in: vec![None; net.input_count()],
            mate_out: vec![None; net.output_count()],
            used_x: vec![BTreeSet::new(); cuts],
            used_y: vec![BTreeSet::new(); cuts],
            stamps: vec![0; cuts],
            next_stamp: 1,
            node_mark: vec![false; net.node_count()],
            input_mark: vec![false; net.input_count()],
            output_mark: vec![false; net.output_count()],
            input_type: vec![InputType::One; net.input_count()],
            lambda: vec![None; net.input_count()],
            start_used: vec![false; net.output_count()],
            rewired_once: vec![false; net.input_count()],
            it: IterationCounters::default(),
            audit: cfg.audit.then(AuditReport::default),
        }
    }

    pub(super) fn run(mut self) -> Result<Solution, SolverError> {
        let mut counters = Counters::default();
        let mut k = 0;
        loop {
            self.begin_iteration(k);
            let ok = self.explore(self.net.source())?;
            self.it.succeeded = ok;
            counters.iterations.push(self.it);
            if !ok {
                break;
            }
            k += 1;
            if let Some(bad) = self.used_x.iter().position(|u| u.len() != k) {
                return Err(SolverError::Internal(format!(
                    "layer cut {bad} holds {} edges after iteration {k}",
                    self.used_x[bad].len()
                )));
            }
        }
        let paths = self.extract_paths()?;
        Ok(Solution {
            capacity: k,
            paths,
            counters,
            audit: self.audit,
        })
    }

    fn begin_iteration(&mut self, k: usize) {
        self.node_mark.fill(false);
        self.input_mark.fill(false);
        self.output_mark.fill(false);
        self.input_type.fill(InputType::One);
        self.rewired_once.fill(false);
        for (s, m) in self.start_used.iter_mut().zip(&self.mate_out) {
            *s = m.is_some();
        }
        self.it = IterationCounters {
            k,
            ..Default::default()
        };
    }

    /// Tries to complete the partial path from `start`.
    pub(super) fn explore(&mut self, start: NodeId) -> Result<bool, SolverError> {
        if start == self.net.sink() {
            return Ok(true);
        }
        let mut stack = vec![self.enter(start)];
        let mut child_failed = false;
        while let Some(top) = stack.last_mut() {
            if child_failed {
                let change = top.pending.take().expect("a failed child has a pending change");
                self.revert(change);
                child_failed = false;
            }
            match self.advance(top)? {
                Advance::Descend(node, change) => {
                    top.pending = Some(change);
                    let frame = self.enter(node);
                    stack.push(frame);
                }
                Advance::Complete => return Ok(true),
                Advance::Exhausted => {
                    stack.pop();
                    child_failed = true;
                }
            }
        }
        Ok(false)
    }

    fn enter(&mut self, node: NodeId) -> Frame {
        self.node_mark[node.0] = true;
        Frame {
            node,
            layer: self.net.node(node).layer,
            phase: Phase::Type2,
            port: 0,
            active: None,
            pending: None,
        }
    }

    fn advance(&mut self, fr: &mut Frame) -> Result<Advance, SolverError> {
        loop {
            if let Some(active) = fr.active.as_mut() {
                if let Some(out) = self.advance_input(fr.layer, active)? {
                    return Ok(out);
                }
                fr.active = None;
                continue;
            }
            match fr.phase {
                Phase::Type2 | Phase::Type1 => {
                    let wanted = if fr.phase == Phase::Type2 {
                        InputType::Two
                    } else {
                        InputType::One
                    };
                    if let Some(active) = self.next_input(fr, wanted)? {
                        fr.active = Some(active);
                    } else {
                        fr.phase = if wanted == InputType::Two {
                            Phase::Type1
                        } else {
                            Phase::Backward
                        };
                        fr.port = 0;
                    }
                }
                Phase::Backward => {
                    if let Some(out) = self.next_backward(fr)? {
                        return Ok(out);
                    }
                    fr.phase = Phase::Done;
                }
                Phase::Done => return Ok(Advance::Exhausted),
            }
        }
    }

    /// Finds, marks and prepares the next unmarked unused input of the
    /// wanted type.
    fn next_input(&mut self, fr: &mut Frame, wanted: InputType) -> Result<Option<Active>, SolverError> {
        let node = self.net.node(fr.node);
        while fr.port < node.input_count() {
            let x = self.net.input_id(fr.node, fr.port).expect("port in range");
            fr.port += 1;
            if self.mate_in[x.0].is_some() || self.input_mark[x.0] || self.input_type[x.0] != wanted {
                continue;
            }
            self.input_mark[x.0] = true;
            let lambda = match wanted {
                InputType::One => {
                    self.it.type1_visits += 1;
                    self.fresh_lambda(x, fr.layer)?
                }
                InputType::Two => {
                    self.it.type2_visits += 1;
                    match &self.lambda[x.0] {
                        Some(l) if l.stamp == self.stamps[fr.layer] => l.clone(),
                        _ => {
                            self.it.stale_lambda_recomputes += 1;
                            self.fresh_lambda(x, fr.layer)?
                        }
                    }
                }
            };
            return Ok(Some(Active {
                x,
                kind: wanted,
                lambda,
                edge_cursor: 0,
                step: Step::Forward,
            }));
        }
        Ok(None)
    }

    fn sorted_used(&self, layer: usize) -> (Vec<InputId>, Vec<OutputId>) {
        (
            self.used_x[layer].iter().copied().collect(),
            self.used_y[layer].iter().copied().collect(),
        )
    }

    fn fresh_lambda(&mut self, x: InputId, layer: usize) -> Result<Lambda, SolverError> {
        self.it.eliminations += 1;
        let (xs, ys) = self.sorted_used(layer);
        let basis = adjacency(self.net, &xs, &ys).map_err(|e| SolverError::Internal(e.to_string()))?;
        let target: Vec<u32> = ys.iter().map(|&y| self.net.coeff(x, y)).collect();
        let mut dep = solve_dependency(&basis, &target)?
            .ok_or_else(|| SolverError::Internal(format!("used matrix of layer cut {layer} is not full rank")))?;
        for r in &mut dep.lambda {
            *r = xs[*r].0;
        }
        let lambda = Lambda {
            stamp: self.stamps[layer],
            dep,
        };
        self.lambda[x.0] = Some(lambda.clone());
        Ok(lambda)
    }

    fn advance_input(&mut self, layer: usize, a: &mut Active) -> Result<Option<Advance>, SolverError> {
        loop {
            match &mut a.step {
                Step::Forward => {
                    if let Some(out) = self.next_forward(layer, a)? {
                        return Ok(Some(out));
                    }
                    if a.kind == InputType::Two {
                        return Ok(None);
                    }
                    let targets = self.rewiring_targets(a)?;
                    a.step = Step::Rewire {
                        targets,
                        cursor: 0,
                        stamp: self.stamps[layer],
                    };
                }
                Step::Phi { y, node, cursor } => {
                    let (y, node) = (*y, *node);
                    if let Some(out) = self.next_phi(layer, a.x, y, node, cursor)? {
                        return Ok(Some(out));
                    }
                    a.step = Step::Forward;
                }
                Step::Rewire { targets, cursor, stamp } => {
                    debug_assert_eq!(*stamp, self.stamps[layer]);
                    while let Some((xj, path)) = targets.get(*cursor) {
                        *cursor += 1;
                        if self.cfg.legacy_same_layer {
                            if self.rewired_once[xj.0] {
                                continue;
                            }
                            self.rewired_once[xj.0] = true;
                        }
                        let xj = *xj;
                        self.it.same_layer_rewirings += 1;
                        self.input_mark[xj.0] = false;
                        self.input_type[xj.0] = InputType::Two;
                        let change = self.apply(layer, path.used_edges(), path.unused_edges());
                        let inherited = a.lambda.exchanged(self.f, a.x, xj, self.stamps[layer]);
                        self.lambda[xj.0] = Some(inherited);
                        return Ok(Some(Advance::Descend(self.net.input_node(xj), change)));
                    }
                    return Ok(None);
                }
            }
        }
    }

    fn next_forward(&mut self, layer: usize, a: &mut Active) -> Result<Option<Advance>, SolverError> {
        let edges = self.net.out_edges(a.x);
        while let Some(&e) = edges.get(a.edge_cursor) {
            a.edge_cursor += 1;
            let edge = self.net.edge(e);
            let (y, to) = (edge.output, edge.to);
            if self.mate_out[y.0].is_some() || self.node_mark[to.0] {
                continue;
            }
            let col: Vec<u32> = a.lambda.rows().map(|r| self.net.coeff(r, y)).collect();
            if !check_forward(self.f, &a.lambda.dep, &col, edge.coeff) {
                continue;
            }
            self.it.forward_moves += 1;
            let change = self.apply(layer, Vec::new(), vec![(a.x, y)]);
            if to == self.net.sink() {
                return Ok(Some(Advance::Complete));
            }
            if self.cfg.legacy_backward {
                a.step = Step::Phi { y, node: to, cursor: 0 };
            }
            return Ok(Some(Advance::Descend(to, change)));
        }
        Ok(None)
    }

    fn rewiring_targets(&self, a: &Active) -> Result<Vec<(InputId, AlternatingPath)>, SolverError> {
        let rows: Vec<InputId> = a.lambda.rows().collect();
        let mut paths = paths_from_input(self, a.x, &rows).map_err(|missing| {
            SolverError::Internal(format!(
                "no alternating path from input {} to dependent input {}",
                a.x.0, missing.0
            ))
        })?;
        Ok(rows
            .into_iter()
            .map(|r| (r, paths.remove(&r).expect("every target has a path")))
            .collect())
    }

    /// Legacy trigger: after the forward move `(x, y)` into `node` failed, try
    /// handing each used edge into `node` back to its transmitter.
    fn next_phi(
        &mut self,
        layer: usize,
        x: InputId,
        y: OutputId,
        node: NodeId,
        cursor: &mut usize,
    ) -> Result<Option<Advance>, SolverError> {
        let n_out = self.net.node(node).output_count();
        while *cursor < n_out {
            let yk = self.net.output_id(node, *cursor).expect("port in range");
            *cursor += 1;
            let Some(xk) = self.mate_out[yk.0] else {
                continue;
            };
            if self.output_mark[yk.0] || self.mate_in[x.0].is_some() || self.mate_out[y.0].is_some() {
                continue;
            }
            self.output_mark[yk.0] = true;
            self.it.legacy_rank_checks += 1;
            let mut xs: Vec<InputId> = self.used_x[layer].iter().copied().filter(|&u| u != xk).collect();
            xs.push(x);
            let mut ys: Vec<OutputId> = self.used_y[layer].iter().copied().filter(|&u| u != yk).collect();
            ys.push(y);
            let m = adjacency(self.net, &xs, &ys).map_err(|e| SolverError::Internal(e.to_string()))?;
            if m.rank() < xs.len() {
                continue;
            }
            self.it.legacy_phi_calls += 1;
            self.input_mark[xk.0] = false;
            self.input_type[xk.0] = InputType::One;
            let change = self.apply(layer, vec![(xk, yk)], vec![(x, y)]);
            return Ok(Some(Advance::Descend(self.net.input_node(xk), change)));
        }
        Ok(None)
    }

    fn next_backward(&mut self, fr: &mut Frame) -> Result<Option<Advance>, SolverError> {
        if self.cfg.legacy_backward || fr.layer == 0 {
            return Ok(None);
        }
        let layer = fr.layer - 1;
        let n_out = self.net.node(fr.node).output_count();
        while fr.port < n_out {
            let y = self.net.output_id(fr.node, fr.port).expect("port in range");
            fr.port += 1;
            if self.output_mark[y.0] || !self.start_used[y.0] || self.mate_out[y.0].is_none() {
                continue;
            }
            self.output_mark[y.0] = true;
            self.it.backward_rewirings += 1;
            self.it.eliminations += 1;
            let (xs, ys) = self.sorted_used(layer);
            let m = adjacency(self.net, &xs, &ys).map_err(|e| SolverError::Internal(e.to_string()))?;
            let col = ys.binary_search(&y).expect("y is used");
            let x = xs[find_removable_input(&m, col)?];
            let path = path_from_output(self, y, x).ok_or_else(|| {
                SolverError::Internal(format!("no alternating path from output {} to input {}", y.0, x.0))
            })?;
            self.input_mark[x.0] = false;
            self.input_type[x.0] = InputType::One;
            let change = self.apply(layer, path.used_edges(), path.unused_edges());
            return Ok(Some(Advance::Descend(self.net.input_node(x), change)));
        }
        Ok(None)
    }

    fn toggle(&mut self, layer: usize, removed: &[(InputId, OutputId)], added: &[(InputId, OutputId)]) {
        for &(x, y) in removed {
            debug_assert_eq!(self.mate_in[x.0], Some(y));
            self.mate_in[x.0] = None;
            self.mate_out[y.0] = None;
            self.used_x[layer].remove(&x);
            self.used_y[layer].remove(&y);
        }
        for &(x, y) in added {
            debug_assert!(self.mate_in[x.0].is_none() && self.mate_out[y.0].is_none());
            self.mate_in[x.0] = Some(y);
            self.mate_out[y.0] = Some(x);
            self.used_x[layer].insert(x);
            self.used_y[layer].insert(y);
        }
    }

    fn apply(&mut self, layer: usize, removed: Vec<(InputId, OutputId)>, added: Vec<(InputId, OutputId)>) -> Change {
        let snapshot = self.audit.is_some().then(|| self.snapshot());
        self.toggle(layer, &removed, &added);
        let prev_stamp = self.stamps[layer];
        self.stamps[layer] = self.next_stamp;
        self.next_stamp += 1;
        if self.audit.is_some() {
            self.audit_layer(layer);
        }
        Change {
            layer,
            removed,
            added,
            prev_stamp,
            snapshot,
        }
    }

    fn revert(&mut self, change: Change) {
        self.toggle(change.layer, &change.added, &change.removed);
        self.stamps[change.layer] = change.prev_stamp;
        if let Some(before) = change.snapshot {
            let now = self.snapshot();
            let audit = self.audit.as_mut().expect("snapshots only taken when auditing");
            audit.rollback_checks += 1;
            if now != before {
                audit.violations.push(format!(
                    "rollback on layer cut {} did not restore the state",
                    change.layer
                ));
            }
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            mate_in: self.mate_in.clone(),
            stamps: self.stamps.clone(),
        }
    }

    fn audit_layer(&mut self, layer: usize) {
        let mut problems = Vec::new();
        for &x in &self.used_x[layer] {
            match self.mate_in[x.0] {
                Some(y) if self.mate_out[y.0] == Some(x) && self.used_y[layer].contains(&y) => {
                    if self.net.find_edge(x, y).is_none() {
                        problems.push(format!("used pair ({}, {}) is not an edge", x.0, y.0));
                    }
                }
                _ => problems.push(format!("input {} is not consistently matched", x.0)),
            }
        }
        if self.used_x[layer].len() != self.used_y[layer].len() {
            problems.push("used input and output counts differ".to_string());
        }
        let (xs, ys) = self.sorted_used(layer);
        let rank = adjacency(self.net, &xs, &ys).map(|m| m.rank()).unwrap_or(0);
        if rank != xs.len() {
            problems.push(format!("rank {rank} below matching size {}", xs.len()));
        }
        let audit = self.audit.as_mut().expect("auditing");
        audit.committed_checks += 1;
        audit
            .violations
            .extend(problems.into_iter().map(|p| format!("layer cut {layer}: {p}")));
    }

    /// Splits the per-layer matchings into S-D paths by pairing, at every
    /// relay, each used output with one used input (both in ascending order).
    fn extract_paths(&self) -> Result<PathSet, SolverError> {
        let net = self.net;
        let mut next_input = vec![0usize; net.node_count()];
        let used_inputs: Vec<Vec<InputId>> = net
            .nodes()
            .iter()
            .map(|n| n.inputs().filter(|x| self.mate_in[x.0].is_some()).collect())
            .collect();
        let mut paths = Vec::new();
        for &start in &used_inputs[net.source().0] {
            let mut path = Vec::with_capacity(net.layer_count() - 1);
            let mut x = start;
            loop {
                let y = self.mate_in[x.0].expect("used input");
                path.push(net.find_edge(x, y).expect("used pairs are edges"));
                let node = net.output_node(y);
                if node == net.sink() {
                    break;
                }
                let i = next_input[node.0];
                x = *used_inputs[node.0].get(i).ok_or_else(|| {
                    SolverError::Internal(format!(
                        "node {} has more used outputs than inputs",
                        net.node(node).name
                    ))
                })?;
                next_input[node.0] += 1;
            }
            paths.push(path);
        }
        Ok(PathSet::new(paths))
    }
}
