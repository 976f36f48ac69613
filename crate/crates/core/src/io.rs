//! JSON document formats for instances and matchings.
//!
//! ```json
//! {"m": 2, "n": 1, "k": 1,
//!  "weights": [[0.5], [0.25]],
//!  "clusters": [0, 0],
//!  "bounds": {"L_lo": 0, "L_hi": 1, "R_lo": [1], "R_hi": [2]}}
//! ```
//!
//! Bounds may be a scalar (broadcast to every node of that side) or a
//! per-node array. Matchings are `{"edges": [[i, j], ...]}` sorted by `(i, j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::instance::{DegreeBounds, Instance, Matching};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BoundSpec {
    Scalar(usize),
    PerNode(Vec<usize>),
}

impl BoundSpec {
    fn broadcast(self, len: usize) -> Vec<usize> {
        match self {
            BoundSpec::Scalar(v) => vec![v; len],
            BoundSpec::PerNode(v) => v,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDoc {
    #[serde(rename = "L_lo")]
    l_lo: BoundSpec,
    #[serde(rename = "L_hi")]
    l_hi: BoundSpec,
    #[serde(rename = "R_lo")]
    r_lo: BoundSpec,
    #[serde(rename = "R_hi")]
    r_hi: BoundSpec,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    m: usize,
    n: usize,
    k: usize,
    weights: Vec<Vec<f64>>,
    clusters: Vec<usize>,
    bounds: BoundsDoc,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses an instance document.
pub fn load_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(parse_error)?;
    let mut v = Vec::new();
    if doc.weights.len() != doc.m {
        v.push(Violation {
            field: "weights".into(),
            message: format!("expected {} rows, found {}", doc.m, doc.weights.len()),
        });
    }
    for (i, row) in doc.weights.iter().enumerate() {
        if row.len() != doc.n {
            v.push(Violation {
                field: format!("weights[{i}]"),
                message: format!("expected {} entries, found {}", doc.n, row.len()),
            });
        }
    }
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    let bounds = DegreeBounds {
        l_lo: doc.bounds.l_lo.broadcast(doc.m),
        l_hi: doc.bounds.l_hi.broadcast(doc.m),
        r_lo: doc.bounds.r_lo.broadcast(doc.n),
        r_hi: doc.bounds.r_hi.broadcast(doc.n),
    };
    let flat = doc.weights.into_iter().flatten().collect();
    Instance::from_flat(doc.m, doc.n, flat, doc.clusters, doc.k, bounds)
}

/// Serialises an instance with per-node bounds and shortest round-trip
/// decimal weights.
pub fn save_instance<T: Scalar>(inst: &Instance<T>) -> String {
    let b = inst.bounds();
    let doc = InstanceDoc {
        m: inst.m(),
        n: inst.n(),
        k: inst.k(),
        weights: (0..inst.m())
            .map(|i| inst.row(i).iter().map(|w| w.as_f64()).collect())
            .collect(),
        clusters: inst.clusters().to_vec(),
        bounds: BoundsDoc {
            l_lo: BoundSpec::PerNode(b.l_lo.clone()),
            l_hi: BoundSpec::PerNode(b.l_hi.clone()),
            r_lo: BoundSpec::PerNode(b.r_lo.clone()),
            r_hi: BoundSpec::PerNode(b.r_hi.clone()),
        },
    };
    serde_json::to_string_pretty(&doc).expect("instance document serialises")
}

/// Parses a matching document. Extra top-level fields are ignored, so a
/// solver report file can be read back as a matching.
pub fn load_matching(text: &str) -> Result<Matching> {
    serde_json::from_str(text).map_err(parse_error)
}

pub fn save_matching(matching: &Matching) -> String {
    serde_json::to_string(matching).expect("matching serialises")
}
