//! JSON documents read and written by the command-line tool.

use std::io::Read;

use centroaffine::{EdgeSeq, NodeSeq, Vec2, Vec3};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::Failure;

/// A spatial polygon with optional field and origin.
///
/// With `indexing = "edge"` slot `k` holds the value at `k+½`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonDocument {
    pub n: usize,
    pub nodes: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 3]>,
    #[serde(default = "node_tag")]
    pub indexing: String,
}

/// A planar polygon `x` with planar field `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarDocument {
    pub n: usize,
    pub x: Vec<[f64; 2]>,
    pub u: Vec<[f64; 2]>,
    #[serde(default = "node_tag")]
    pub indexing: String,
}

fn node_tag() -> String {
    "node".to_string()
}

fn check_tag(tag: &str) -> Result<(), Failure> {
    match tag {
        "node" | "edge" => Ok(()),
        other => Err(Failure::input(format!("indexing must be \"node\" or \"edge\", got {other:?}"))),
    }
}

fn check_len(what: &str, got: usize, n: usize) -> Result<(), Failure> {
    if got != n {
        return Err(Failure::input(format!("{what} length {got} does not match n = {n}")));
    }
    Ok(())
}

fn check_finite<'a>(what: &str, mut values: impl Iterator<Item = &'a f64>) -> Result<(), Failure> {
    if values.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::input(format!("{what} contains a non-finite entry")))
    }
}

impl PolygonDocument {
    pub fn validate(&self) -> Result<(), Failure> {
        check_tag(&self.indexing)?;
        if self.n < 3 {
            return Err(Failure::input(format!("n must be at least 3, got {}", self.n)));
        }
        check_len("nodes", self.nodes.len(), self.n)?;
        check_finite("nodes", self.nodes.iter().flatten())?;
        if let Some(field) = &self.field {
            check_len("field", field.len(), self.n)?;
            check_finite("field", field.iter().flatten())?;
        }
        if let Some(origin) = &self.origin {
            check_finite("origin", origin.iter())?;
        }
        Ok(())
    }

    pub fn from_framed(nodes: &NodeSeq<Vec3>, field: Option<&NodeSeq<Vec3>>, origin: Vec3, indexing: &str) -> Self {
        PolygonDocument {
            n: nodes.n(),
            nodes: nodes.iter().map(|p| p.to_array()).collect(),
            field: field.map(|f| f.iter().map(|p| p.to_array()).collect()),
            origin: (origin != Vec3::ZERO).then(|| origin.to_array()),
            indexing: indexing.to_string(),
        }
    }

    pub fn node_seq(&self) -> NodeSeq<Vec3> {
        NodeSeq::new(self.nodes.iter().map(|a| Vec3::from_array(*a)).collect()).expect("validated length")
    }

    pub fn edge_seq(&self) -> EdgeSeq<Vec3> {
        self.node_seq().into_edges()
    }

    pub fn field_seq(&self) -> Option<NodeSeq<Vec3>> {
        self.field
            .as_ref()
            .map(|f| NodeSeq::new(f.iter().map(|a| Vec3::from_array(*a)).collect()).expect("validated length"))
    }

    pub fn origin_vec(&self) -> Vec3 {
        self.origin.map(Vec3::from_array).unwrap_or(Vec3::ZERO)
    }
}

impl PlanarDocument {
    pub fn validate(&self) -> Result<(), Failure> {
        check_tag(&self.indexing)?;
        if self.n < 3 {
            return Err(Failure::input(format!("n must be at least 3, got {}", self.n)));
        }
        check_len("x", self.x.len(), self.n)?;
        check_len("u", self.u.len(), self.n)?;
        check_finite("x", self.x.iter().flatten())?;
        check_finite("u", self.u.iter().flatten())
    }

    pub fn from_pair(x: &NodeSeq<Vec2>, u: &NodeSeq<Vec2>) -> Self {
        PlanarDocument {
            n: x.n(),
            x: x.iter().map(|p| p.to_array()).collect(),
            u: u.iter().map(|p| p.to_array()).collect(),
            indexing: node_tag(),
        }
    }

    pub fn seqs(&self) -> (NodeSeq<Vec2>, NodeSeq<Vec2>) {
        let conv = |v: &[[f64; 2]]| NodeSeq::new(v.iter().map(|a| Vec2::from_array(*a)).collect()).expect("validated length");
        (conv(&self.x), conv(&self.u))
    }
}

/// Reads a whole file, or standard input for `-`.
pub fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::input(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("reading {path}: {e}")))?;
    }
    Ok(text)
}

pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input(format!("malformed document: {e}")))
}

/// `{"indexing": tag, "values": [...]}`.
pub fn tagged<T: Serialize>(tag: &str, values: &[T]) -> Value {
    json!({ "indexing": tag, "values": values })
}

/// Pretty JSON with sorted keys (serde_json maps are ordered by key) and
/// negative zeros written as `0.0`.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut value = serde_json::to_value(value).expect("documents serialize");
    clear_negative_zeros(&mut value);
    serde_json::to_string_pretty(&value).expect("values serialize")
}

fn clear_negative_zeros(value: &mut Value) {
    match value {
        Value::Number(x) if x.as_f64() == Some(0.0) && x.is_f64() => *value = json!(0.0),
        Value::Array(items) => items.iter_mut().for_each(clear_negative_zeros),
        Value::Object(map) => map.values_mut().for_each(clear_negative_zeros),
        _ => {}
    }
}
