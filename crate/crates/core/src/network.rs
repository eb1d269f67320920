//! Layered deterministic relay networks.
//!
//! A node transmits on its *inputs* (signal levels `x`) and receives on its
//! *outputs* (levels `y`). Edges run from an input of a layer-`l` node to an
//! output of a layer-`l + 1` node and carry a nonzero F_p coefficient. Every
//! input and output gets a dense global id at load time; ids ascend with
//! (node index, port index), and node indices ascend layer by layer in file
//! order. Layers are numbered from zero, so layer cut `l` consists of the
//! edges leaving layer-`l` inputs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::field::Field;
use crate::format::{EdgeDecl, EdgeRef, NetworkFile, NodeDecl};
use crate::linalg::FMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutputId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// A violated structural rule, with its location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("field modulus {0} is not a supported prime")]
    InvalidField(u64),
    #[error("network needs at least 2 layers, found {0}")]
    TooFewLayers(usize),
    #[error("layer {layer} must contain exactly one node, found {found}")]
    TerminalLayerSize { layer: usize, found: usize },
    #[error("source node {0:?} must have no outputs")]
    SourceHasOutputs(String),
    #[error("destination node {0:?} must have no inputs")]
    SinkHasInputs(String),
    #[error("empty layer {0}")]
    EmptyLayer(usize),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("edge {edge}: unknown node {node:?}")]
    UnknownNode { edge: usize, node: String },
    #[error("edge {edge}: non-adjacent layers ({from_layer} -> {to_layer})")]
    NonAdjacentLayers {
        edge: usize,
        from_layer: usize,
        to_layer: usize,
    },
    #[error("edge {edge}: input {index} out of range for node {node:?} ({ports} inputs)")]
    InputOutOfRange {
        edge: usize,
        node: String,
        index: usize,
        ports: usize,
    },
    #[error("edge {edge}: output {index} out of range for node {node:?} ({ports} outputs)")]
    OutputOutOfRange {
        edge: usize,
        node: String,
        index: usize,
        ports: usize,
    },
    #[error("edge {edge}: coefficient {coeff} is not a nonzero element of F_{p}")]
    BadCoefficient { edge: usize, coeff: i64, p: u64 },
    #[error("edge {edge}: duplicate edge (first declared as edge {first})")]
    DuplicateEdge { edge: usize, first: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("invalid network: {}", join_errors(.0))]
    Invalid(Vec<StructuralError>),
    #[error("unknown input port {0}")]
    UnknownInput(usize),
    #[error("unknown output port {0}")]
    UnknownOutput(usize),
    #[error("unknown edge {0:?}")]
    UnknownEdge(EdgeRef),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
}

fn join_errors(errs: &[StructuralError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub layer: usize,
    first_input: usize,
    n_inputs: usize,
    first_output: usize,
    n_outputs: usize,
}

impl Node {
    pub fn inputs(&self) -> impl Iterator<Item = InputId> + Clone {
        (self.first_input..self.first_input + self.n_inputs).map(InputId)
    }

    pub fn outputs(&self) -> impl Iterator<Item = OutputId> + Clone {
        (self.first_output..self.first_output + self.n_outputs).map(OutputId)
    }

    pub fn input_count(&self) -> usize {
        self.n_inputs
    }

    pub fn output_count(&self) -> usize {
        self.n_outputs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub input_index: usize,
    pub to: NodeId,
    pub output_index: usize,
    pub coeff: u32,
    pub input: InputId,
    pub output: OutputId,
}

/// Size measures used in complexity statements and bench output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkStats {
    /// Number of layers.
    pub layers: usize,
    /// Largest layer.
    pub max_nodes_per_layer: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub edges: usize,
    /// Most outgoing edges from any single input.
    pub max_out_degree: usize,
    /// Most inputs on any single node.
    pub max_node_inputs: usize,
}

/// A validated, immutable layered network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredNetwork {
    field: Field,
    nodes: Vec<Node>,
    layers: Vec<Vec<NodeId>>,
    edges: Vec<Edge>,
    input_node: Vec<NodeId>,
    output_node: Vec<NodeId>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    by_name: HashMap<String, NodeId>,
}

/// Checks every structural rule and reports all violations.
pub fn validate(file: &NetworkFile) -> Result<(), Vec<StructuralError>> {
    let mut errs = Vec::new();
    let field = Field::new(file.field).ok();
    if field.is_none() {
        errs.push(StructuralError::InvalidField(file.field));
    }
    let n_layers = file.layers.len();
    if n_layers < 2 {
        errs.push(StructuralError::TooFewLayers(n_layers));
    } else {
        for l in [0, n_layers - 1] {
            if file.layers[l].len() != 1 {
                errs.push(StructuralError::TerminalLayerSize {
                    layer: l,
                    found: file.layers[l].len(),
                });
            }
        }
        for s in &file.layers[0] {
            if s.outputs != 0 {
                errs.push(StructuralError::SourceHasOutputs(s.id.clone()));
            }
        }
        for d in &file.layers[n_layers - 1] {
            if d.inputs != 0 {
                errs.push(StructuralError::SinkHasInputs(d.id.clone()));
            }
        }
        for (l, layer) in file.layers.iter().enumerate().skip(1).take(n_layers - 2) {
            if layer.is_empty() {
                errs.push(StructuralError::EmptyLayer(l));
            }
        }
    }

    let mut nodes: HashMap<&str, (usize, &NodeDecl)> = HashMap::new();
    for (l, layer) in file.layers.iter().enumerate() {
        for n in layer {
            if nodes.insert(n.id.as_str(), (l, n)).is_some() {
                errs.push(StructuralError::DuplicateNode(n.id.clone()));
            }
        }
    }

    let mut seen: HashMap<(&str, usize, &str, usize), usize> = HashMap::new();
    for (i, e) in file.edges.iter().enumerate() {
        let from = nodes.get(e.from.as_str());
        let to = nodes.get(e.to.as_str());
        if from.is_none() {
            errs.push(StructuralError::UnknownNode {
                edge: i,
                node: e.from.clone(),
            });
        }
        if to.is_none() {
            errs.push(StructuralError::UnknownNode {
                edge: i,
                node: e.to.clone(),
            });
        }
        if let (Some(&(fl, fnode)), Some(&(tl, tnode))) = (from, to) {
            if fl + 1 != tl {
                errs.push(StructuralError::NonAdjacentLayers {
                    edge: i,
                    from_layer: fl,
                    to_layer: tl,
                });
            }
            if e.x >= fnode.inputs {
                errs.push(StructuralError::InputOutOfRange {
                    edge: i,
                    node: e.from.clone(),
                    index: e.x,
                    ports: fnode.inputs,
                });
            }
            if e.y >= tnode.outputs {
                errs.push(StructuralError::OutputOutOfRange {
                    edge: i,
                    node: e.to.clone(),
                    index: e.y,
                    ports: tnode.outputs,
                });
            }
        }
        if let Some(f) = field {
            if e.coeff <= 0 || e.coeff >= f.modulus() as i64 {
                errs.push(StructuralError::BadCoefficient {
                    edge: i,
                    coeff: e.coeff,
                    p: file.field,
                });
            }
        }
        if let Some(&first) = seen.get(&(e.from.as_str(), e.x, e.to.as_str(), e.y)) {
            errs.push(StructuralError::DuplicateEdge { edge: i, first });
        } else {
            seen.insert((e.from.as_str(), e.x, e.to.as_str(), e.y), i);
        }
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

impl TryFrom<&NetworkFile> for LayeredNetwork {
    type Error = NetworkError;

    fn try_from(file: &NetworkFile) -> Result<Self, Self::Error> {
        LayeredNetwork::from_file(file)
    }
}

impl LayeredNetwork {
    pub fn from_file(file: &NetworkFile) -> Result<Self, NetworkError> {
        validate(file).map_err(NetworkError::Invalid)?;
        let field = Field::new(file.field).expect("validated");

        let mut nodes = Vec::new();
        let mut layers = Vec::with_capacity(file.layers.len());
        let mut by_name = HashMap::new();
        let (mut n_in, mut n_out) = (0, 0);
        let mut input_node = Vec::new();
        let mut output_node = Vec::new();
        for (l, layer) in file.layers.iter().enumerate() {
            let mut ids = Vec::with_capacity(layer.len());
            for decl in layer {
                let id = NodeId(nodes.len());
                nodes.push(Node {
                    name: decl.id.clone(),
                    layer: l,
                    first_input: n_in,
                    n_inputs: decl.inputs,
                    first_output: n_out,
                    n_outputs: decl.outputs,
                });
                n_in += decl.inputs;
                n_out += decl.outputs;
                input_node.extend(std::iter::repeat_n(id, decl.inputs));
                output_node.extend(std::iter::repeat_n(id, decl.outputs));
                by_name.insert(decl.id.clone(), id);
                ids.push(id);
            }
            layers.push(ids);
        }

        let mut edges = Vec::with_capacity(file.edges.len());
        let mut out_edges = vec![Vec::new(); n_in];
        let mut in_edges = vec![Vec::new(); n_out];
        for e in &file.edges {
            let from = by_name[&e.from];
            let to = by_name[&e.to];
            let input = InputId(nodes[from.0].first_input + e.x);
            let output = OutputId(nodes[to.0].first_output + e.y);
            let id = EdgeId(edges.len());
            edges.push(Edge {
                from,
                input_index: e.x,
                to,
                output_index: e.y,
                coeff: e.coeff as u32,
                input,
                output,
            });
            out_edges[input.0].push(id);
            in_edges[output.0].push(id);
        }
        for list in &mut out_edges {
            list.sort_by_key(|e| edges[e.0].output);
        }
        for list in &mut in_edges {
            list.sort_by_key(|e| edges[e.0].input);
        }

        Ok(LayeredNetwork {
            field,
            nodes,
            layers,
            edges,
            input_node,
            output_node,
            out_edges,
            in_edges,
            by_name,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, crate::Error> {
        let file = NetworkFile::from_json(s)?;
        Ok(Self::from_file(&file)?)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            field: self.field.modulus() as u64,
            layers: self
                .layers
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|&n| {
                            let node = &self.nodes[n.0];
                            NodeDecl {
                                id: node.name.clone(),
                                inputs: node.n_inputs,
                                outputs: node.n_outputs,
                            }
                        })
                        .collect()
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDecl {
                    from: self.nodes[e.from.0].name.clone(),
                    x: e.input_index,
                    to: self.nodes[e.to.0].name.clone(),
                    y: e.output_index,
                    coeff: e.coeff as i64,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn source(&self) -> NodeId {
        self.layers[0][0]
    }

    pub fn sink(&self) -> NodeId {
        self.layers[self.layers.len() - 1][0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn input_count(&self) -> usize {
        self.input_node.len()
    }

    pub fn output_count(&self) -> usize {
        self.output_node.len()
    }

    /// Global id of input port `index` of `node`.
    pub fn input_id(&self, node: NodeId, index: usize) -> Option<InputId> {
        let n = self.nodes.get(node.0)?;
        (index < n.n_inputs).then_some(InputId(n.first_input + index))
    }

    pub fn output_id(&self, node: NodeId, index: usize) -> Option<OutputId> {
        let n = self.nodes.get(node.0)?;
        (index < n.n_outputs).then_some(OutputId(n.first_output + index))
    }

    pub fn input_node(&self, x: InputId) -> NodeId {
        self.input_node[x.0]
    }

    pub fn output_node(&self, y: OutputId) -> NodeId {
        self.output_node[y.0]
    }

    pub fn input_layer(&self, x: InputId) -> usize {
        self.nodes[self.input_node[x.0].0].layer
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    /// Edges leaving `x`, ordered by output id.
    pub fn out_edges(&self, x: InputId) -> &[EdgeId] {
        &self.out_edges[x.0]
    }

    /// Edges entering `y`, ordered by input id.
    pub fn in_edges(&self, y: OutputId) -> &[EdgeId] {
        &self.in_edges[y.0]
    }

    pub fn find_edge(&self, x: InputId, y: OutputId) -> Option<EdgeId> {
        let list = &self.out_edges[x.0];
        list.binary_search_by_key(&y, |e| self.edges[e.0].output)
            .ok()
            .map(|i| list[i])
    }

    /// `T(x, y)`: the edge coefficient, or zero when there is no edge.
    pub fn coeff(&self, x: InputId, y: OutputId) -> u32 {
        self.find_edge(x, y).map_or(0, |e| self.edges[e.0].coeff)
    }

    pub fn edge_ref(&self, e: EdgeId) -> EdgeRef {
        let e = &self.edges[e.0];
        EdgeRef {
            from: self.nodes[e.from.0].name.clone(),
            x: e.input_index,
            to: self.nodes[e.to.0].name.clone(),
            y: e.output_index,
        }
    }

    pub fn resolve_edge(&self, r: &EdgeRef) -> Result<EdgeId, NetworkError> {
        let unknown = || NetworkError::UnknownEdge(r.clone());
        let from = self.node_by_name(&r.from).ok_or_else(unknown)?;
        let to = self.node_by_name(&r.to).ok_or_else(unknown)?;
        let x = self.input_id(from, r.x).ok_or_else(unknown)?;
        let y = self.output_id(to, r.y).ok_or_else(unknown)?;
        self.find_edge(x, y).ok_or_else(unknown)
    }

    pub fn stats(&self) -> NetworkStats {
        NetworkStats {
            layers: self.layers.len(),
            max_nodes_per_layer: self.layers.iter().map(Vec::len).max().unwrap_or(0),
            inputs: self.input_count(),
            outputs: self.output_count(),
            edges: self.edges.len(),
            max_out_degree: self.out_edges.iter().map(Vec::len).max().unwrap_or(0),
            max_node_inputs: self.nodes.iter().map(|n| n.n_inputs).max().unwrap_or(0),
        }
    }

    /// Rank of the full adjacency matrix of layer cut `l`.
    pub fn layer_rank(&self, l: usize) -> usize {
        let xs: Vec<InputId> = self.layers[l].iter().flat_map(|&n| self.nodes[n.0].inputs()).collect();
        let ys: Vec<OutputId> = self.layers[l + 1]
            .iter()
            .flat_map(|&n| self.nodes[n.0].outputs())
            .collect();
        adjacency(self, &xs, &ys).expect("ports exist").rank()
    }

    /// Minimum over layer cuts of the full-layer adjacency rank; an upper
    /// bound on the capacity.
    pub fn min_layer_rank(&self) -> usize {
        (0..self.layers.len() - 1)
            .map(|l| self.layer_rank(l))
            .min()
            .unwrap_or(0)
    }
}

/// `T(xs, ys)`: rows follow `xs`, columns follow `ys`.
pub fn adjacency(net: &LayeredNetwork, xs: &[InputId], ys: &[OutputId]) -> Result<FMatrix, NetworkError> {
    if let Some(x) = xs.iter().find(|x| x.0 >= net.input_count()) {
        return Err(NetworkError::UnknownInput(x.0));
    }
    if let Some(y) = ys.iter().find(|y| y.0 >= net.output_count()) {
        return Err(NetworkError::UnknownOutput(y.0));
    }
    let mut m = FMatrix::zeros(net.field(), xs.len(), ys.len());
    let col: HashMap<OutputId, usize> = ys.iter().enumerate().map(|(j, &y)| (y, j)).collect();
    for (i, &x) in xs.iter().enumerate() {
        for &e in net.out_edges(x) {
            let edge = net.edge(e);
            if let Some(&j) = col.get(&edge.output) {
                m.set(i, j, edge.coeff);
            }
        }
    }
    Ok(m)
}

/// Rank of `T(E)` for an edge set: the adjacency matrix over the distinct
/// inputs and distinct outputs the edges touch.
pub fn edge_set_rank(net: &LayeredNetwork, edges: &[EdgeId]) -> usize {
    let xs: BTreeSet<InputId> = edges.iter().map(|e| net.edge(*e).input).collect();
    let ys: BTreeSet<OutputId> = edges.iter().map(|e| net.edge(*e).output).collect();
    let xs: Vec<_> = xs.into_iter().collect();
    let ys: Vec<_> = ys.into_iter().collect();
    adjacency(net, &xs, &ys).expect("edge ports exist").rank()
}

/// A source-side node set: contains S, excludes D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    omega: BTreeSet<NodeId>,
}

impl Cut {
    pub fn new(net: &LayeredNetwork, omega: impl IntoIterator<Item = NodeId>) -> Result<Self, NetworkError> {
        let omega: BTreeSet<NodeId> = omega.into_iter().collect();
        if let Some(n) = omega.iter().find(|n| n.0 >= net.node_count()) {
            return Err(NetworkError::InvalidCut(format!("unknown node index {}", n.0)));
        }
        if !omega.contains(&net.source()) {
            return Err(NetworkError::InvalidCut("source must be on the source side".into()));
        }
        if omega.contains(&net.sink()) {
            return Err(NetworkError::InvalidCut(
                "destination must not be on the source side".into(),
            ));
        }
        Ok(Cut { omega })
    }

    /// The layer cut separating layers `..=l` from the rest.
    pub fn layer(net: &LayeredNetwork, l: usize) -> Result<Self, NetworkError> {
        Cut::new(net, net.layers().iter().take(l + 1).flatten().copied())
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.omega.contains(&n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.omega.iter().copied()
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.omega.iter().map(|n| n.0.to_string()).collect();
        write!(f, "{{{}}}", ids.join(", "))
    }
}

/// Edges from a node in omega to a node outside it.
pub fn cut_edges(net: &LayeredNetwork, cut: &Cut) -> Vec<EdgeId> {
    (0..net.edges().len())
        .map(EdgeId)
        .filter(|&e| {
            let edge = net.edge(e);
            cut.contains(edge.from) && !cut.contains(edge.to)
        })
        .collect()
}

/// Rank over F_p of the crossing edges' adjacency matrix.
pub fn cut_value(net: &LayeredNetwork, cut: &Cut) -> usize {
    edge_set_rank(net, &cut_edges(net, cut))
}

/// Node names of a cut's source side, in node order.
pub fn cut_names(net: &LayeredNetwork, cut: &Cut) -> Vec<String> {
    cut.nodes().map(|n| net.node(n).name.clone()).collect()
}
