//! Network construction: the SNR-to-levels reduction, gain-described
//! networks, and seeded random networks for fuzzing.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::Field;
use crate::format::{EdgeDecl, NetworkFile, NodeDecl};
use crate::network::{LayeredNetwork, NetworkError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("SNR must be positive and finite, got {0}")]
    InvalidSnr(f64),
    #[error("no level count given for node {0:?}")]
    MissingLevels(String),
    #[error("link {from:?} -> {to:?} references an unknown node")]
    UnknownNode { from: String, to: String },
    #[error("link {from:?} -> {to:?} does not join consecutive layers")]
    NonConsecutive { from: String, to: String },
    #[error("link {from:?} -> {to:?} needs {levels} levels but an endpoint has only {available}")]
    LevelOverflow {
        from: String,
        to: String,
        levels: usize,
        available: usize,
    },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Number of signal levels above the noise floor for a point-to-point link:
/// `ceil(log2(snr) / 2)`, floored at zero.
pub fn levels_from_snr(snr: f64) -> Result<usize, BuildError> {
    if snr.is_nan() || snr <= 0.0 || snr.is_infinite() {
        return Err(BuildError::InvalidSnr(snr));
    }
    let n = (0.5 * snr.log2()).ceil();
    Ok(if n <= 0.0 { 0 } else { n as usize })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainLink {
    pub from: String,
    pub to: String,
    /// Levels the receiver sees above noise on this link.
    pub levels: usize,
}

/// Layered node labels plus per-link level counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GainSpec {
    pub layers: Vec<Vec<String>>,
    pub links: Vec<GainLink>,
}

/// Builds the deterministic network for a gain description.
///
/// Each node gets `levels[node]` signal levels, indexed from the most
/// significant (port 0). A link with `n` levels wires transmitter level `q`
/// to receiver level `q` for `q < n`, all with coefficient 1. Receivers sum
/// whatever lands on the same level.
pub fn build_from_gains(
    spec: &GainSpec,
    levels: &BTreeMap<String, usize>,
    field: Field,
) -> Result<LayeredNetwork, BuildError> {
    let last = spec.layers.len().saturating_sub(1);
    let mut layer_of = HashMap::new();
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (l, names) in spec.layers.iter().enumerate() {
        let mut decls = Vec::with_capacity(names.len());
        for name in names {
            let q = *levels
                .get(name)
                .ok_or_else(|| BuildError::MissingLevels(name.clone()))?;
            layer_of.insert(name.as_str(), (l, q));
            decls.push(NodeDecl {
                id: name.clone(),
                inputs: if l == last { 0 } else { q },
                outputs: if l == 0 { 0 } else { q },
            });
        }
        layers.push(decls);
    }

    let mut edges = Vec::new();
    for link in &spec.links {
        let (Some(&(fl, fq)), Some(&(tl, tq))) = (layer_of.get(link.from.as_str()), layer_of.get(link.to.as_str()))
        else {
            return Err(BuildError::UnknownNode {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        };
        if fl + 1 != tl {
            return Err(BuildError::NonConsecutive {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        }
        let available = fq.min(tq);
        if link.levels > available {
            return Err(BuildError::LevelOverflow {
                from: link.from.clone(),
                to: link.to.clone(),
                levels: link.levels,
                available,
            });
        }
        edges.extend((0..link.levels).map(|q| EdgeDecl {
            from: link.from.clone(),
            x: q,
            to: link.to.clone(),
            y: q,
            coeff: 1,
        }));
    }

    let file = NetworkFile {
        field: field.modulus() as u64,
        layers,
        edges,
    };
    Ok(LayeredNetwork::from_file(&file)?)
}

/// Parameters for [`random_network`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub layers: usize,
    pub max_nodes_per_layer: usize,
    pub max_levels_per_node: usize,
    pub edge_density: f64,
    pub field: u64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            layers: 4,
            max_nodes_per_layer: 3,
            max_levels_per_node: 3,
            edge_density: 0.5,
            field: 2,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<Field, BuildError> {
        if self.layers < 2 {
            return Err(BuildError::InvalidParams(format!(
                "need at least 2 layers, got {}",
                self.layers
            )));
        }
        if self.max_nodes_per_layer == 0 || self.max_levels_per_node == 0 {
            return Err(BuildError::InvalidParams(
                "node and level bounds must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return Err(BuildError::InvalidParams(format!(
                "density {} not in [0, 1]",
                self.edge_density
            )));
        }
        Field::new(self.field).map_err(|e| BuildError::InvalidParams(e.to_string()))
    }
}

/// Seeded random layered network.
///
/// The generator is ChaCha8 seeded from `params.seed`; the same parameters
/// always give the same network within a release. Intermediate layers get
/// `1..=max_nodes_per_layer` nodes, every node `1..=max_levels_per_node`
/// levels, and each input/output pair between adjacent layers becomes an edge
/// with probability `edge_density`, carrying a uniform nonzero coefficient.
pub fn random_network(params: &GenParams) -> Result<LayeredNetwork, BuildError> {
    let field = params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let last = params.layers - 1;

    let mut layers: Vec<Vec<NodeDecl>> = Vec::with_capacity(params.layers);
    for l in 0..params.layers {
        let count = if l == 0 || l == last {
            1
        } else {
            rng.gen_range(1..=params.max_nodes_per_layer)
        };
        let layer = (0..count)
            .map(|i| {
                let q = rng.gen_range(1..=params.max_levels_per_node);
                let id = match l {
                    0 => "S".to_string(),
                    _ if l == last => "D".to_string(),
                    _ => format!("n{l}_{i}"),
                };
                NodeDecl {
                    id,
                    inputs: if l == last { 0 } else { q },
                    outputs: if l == 0 { 0 } else { q },
                }
            })
            .collect();
        layers.push(layer);
    }

    let mut edges = Vec::new();
    for l in 0..last {
        for tx in &layers[l] {
            for x in 0..tx.inputs {
                for rx in &layers[l + 1] {
                    for y in 0..rx.outputs {
                        if rng.gen_bool(params.edge_density) {
                            let coeff = rng.gen_range(1..field.modulus()) as i64;
                            edges.push(EdgeDecl {
                                from: tx.id.clone(),
                                x,
                                to: rx.id.clone(),
                                y,
                                coeff,
                            });
                        }
                    }
                }
            }
        }
    }

    let file = NetworkFile {
        field: params.field,
        layers,
        edges,
    };
    Ok(LayeredNetwork::from_file(&file)?)
}
