//! Timing harness: one CSV row per generated network.

use std::time::Instant;

use detflow::builder::{random_network, BuildError, GenParams};
use detflow::{capacity, SolverConfig};

pub const HEADER: &str = "seed,L,M,V_x,E,p,C,wall_ns,eliminations,type1_visits,type2_visits,backward_rewirings";

pub struct Plan {
    /// Layer counts.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub nodes: usize,
    pub levels: usize,
    pub density: f64,
    pub field: u64,
    /// Trial `i` (counted across all sizes) uses `seed + i`.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub seed: u64,
    pub layers: usize,
    pub max_nodes: usize,
    pub inputs: usize,
    pub edges: usize,
    pub field: u64,
    pub capacity: usize,
    pub wall_ns: u128,
    pub eliminations: u64,
    pub type1_visits: u64,
    pub type2_visits: u64,
    pub backward_rewirings: u64,
}

fn params(plan: &Plan, layers: usize, seed: u64) -> GenParams {
    GenParams {
        layers,
        max_nodes_per_layer: plan.nodes,
        max_levels_per_node: plan.levels,
        edge_density: plan.density,
        field: plan.field,
        seed,
    }
}

pub fn run(plan: &Plan) -> Result<Vec<Row>, BuildError> {
    for &l in &plan.sizes {
        params(plan, l, plan.seed).validate()?;
    }
    let mut rows = Vec::new();
    let mut i = 0u64;
    for &l in &plan.sizes {
        for _ in 0..plan.trials {
            let seed = plan.seed.wrapping_add(i);
            i += 1;
            let net = random_network(&params(plan, l, seed))?;
            let start = Instant::now();
            let sol = capacity(&net, SolverConfig::default()).expect("generated networks are valid");
            let wall_ns = start.elapsed().as_nanos();
            let stats = net.stats();
            let t = sol.counters.total();
            rows.push(Row {
                seed,
                layers: l,
                max_nodes: stats.max_nodes_per_layer,
                inputs: stats.inputs,
                edges: stats.edges,
                field: plan.field,
                capacity: sol.capacity,
                wall_ns,
                eliminations: t.eliminations,
                type1_visits: t.type1_visits,
                type2_visits: t.type2_visits,
                backward_rewirings: t.backward_rewirings,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.layers,
            r.max_nodes,
            r.inputs,
            r.edges,
            r.field,
            r.capacity,
            r.wall_ns,
            r.eliminations,
            r.type1_visits,
            r.type2_visits,
            r.backward_rewirings
        ));
    }
    out
}
