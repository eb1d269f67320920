//! Graphviz rendering, layers left to right.

use std::collections::HashMap;
use std::fmt::Write;

use detflow::network::EdgeId;
use detflow::solver::PathSet;
use detflow::LayeredNetwork;

const PALETTE: [&str; 8] = [
    "red",
    "blue",
    "forestgreen",
    "darkorange",
    "purple",
    "brown",
    "deeppink",
    "teal",
];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn render(net: &LayeredNetwork, paths: Option<&PathSet>) -> String {
    let mut colour: HashMap<EdgeId, usize> = HashMap::new();
    if let Some(ps) = paths {
        for (i, path) in ps.paths().iter().enumerate() {
            for &e in path {
                colour.entry(e).or_insert(i);
            }
        }
    }
    let binary = net.field().modulus() == 2;

    let mut out = String::new();
    out.push_str("digraph network {\n  rankdir=LR;\n  node [shape=box];\n");
    for (l, layer) in net.layers().iter().enumerate() {
        let names: Vec<String> = layer.iter().map(|&n| quote(&net.node(n).name)).collect();
        writeln!(out, "  subgraph layer_{l} {{ rank=same; {}; }}", names.join("; ")).unwrap();
    }
    for (i, edge) in net.edges().iter().enumerate() {
        let mut attrs = format!("label=\"x{}/y{}", edge.input_index, edge.output_index);
        if !binary {
            write!(attrs, " *{}", edge.coeff).unwrap();
        }
        attrs.push('"');
        if let Some(&p) = colour.get(&EdgeId(i)) {
            write!(attrs, ", color={}, penwidth=2", PALETTE[p % PALETTE.len()]).unwrap();
        }
        writeln!(
            out,
            "  {} -> {} [{attrs}];",
            quote(&net.node(edge.from).name),
            quote(&net.node(edge.to).name)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
