//! JSON file formats: network descriptions and solver/oracle results.
//!
//! Field order in every struct is the serialized order, so output is
//! byte-stable for a given value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

fn default_field() -> u64 {
    2
}

fn default_coeff() -> i64 {
    1
}

/// Unvalidated network description as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default = "default_field")]
    pub field: u64,
    pub layers: Vec<Vec<NodeDecl>>,
    #[serde(default)]
    pub edges: Vec<EdgeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub id: String,
    #[serde(default)]
    pub inputs: usize,
    #[serde(default)]
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub from: String,
    pub x: usize,
    pub to: String,
    pub y: usize,
    #[serde(default = "default_coeff")]
    pub coeff: i64,
}

/// Identifies an edge by its endpoint ports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRef {
    pub from: String,
    pub x: usize,
    pub to: String,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResultFile {
    pub capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<Vec<EdgeRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counters: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmin_cut: Option<Vec<String>>,
}

impl NetworkFile {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network file serialization is infallible")
    }
}

impl ResultFile {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serialization is infallible")
    }
}
