//! Text document formats: decomposition documents and witness documents.
//!
//! A decomposition document is JSON with top-level fields `m` and `classes`;
//! each class is an array of cycles and each cycle an array of vertex tokens
//! `x<i>` / `y<i>` with the closing arc implied. Cycles are written in
//! canonical rotation. This format is the lingua franca of the `construct`,
//! `verify`, and `search` commands.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circulant::DifferencePartition;
use crate::model::{Decomposition, DirectedCycle, Modulus, ResolutionClass, Side, Vertex};
use crate::witness::{Witness, WitnessPath};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no classes")]
    NoClasses,
    #[error("invalid modulus {0}")]
    BadModulus(u32),
    #[error("malformed vertex token `{0}`")]
    BadToken(String),
    #[error("vertex token `{0}` index out of range for m={1}")]
    IndexOutOfRange(String, u32),
    #[error("repeated vertex {0} in cycle")]
    RepeatedVertex(String),
    #[error("cycle with fewer than 2 vertices")]
    ShortCycle,
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("invalid residue {0} for m={1}")]
    BadResidue(u32, u32),
    #[error("unknown side `{0}`")]
    BadSide(String),
    #[error("path needs at least 2 vertices")]
    ShortPath,
    #[error("path endpoints do not match declared from/to")]
    PathEndpointMismatch,
}

#[derive(Serialize, Deserialize)]
struct DecompositionDoc {
    m: u32,
    classes: Vec<Vec<Vec<String>>>,
}

/// Serialize a decomposition with all cycles in canonical rotation.
pub fn serialize_decomposition(d: &Decomposition) -> String {
    let canon = d.canonical();
    let doc = DecompositionDoc {
        m: canon.modulus.m(),
        classes: canon
            .classes
            .iter()
            .map(|class| {
                class
                    .cycles
                    .iter()
                    .map(|c| c.vertices().iter().map(|v| v.token()).collect())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("decomposition serializes")
}

/// Parse a decomposition document, validating tokens, index ranges, and
/// per-cycle vertex distinctness. Semantic certification is the verifier's
/// job, not the parser's.
pub fn parse_decomposition(text: &str) -> Result<Decomposition, ParseError> {
    let doc: DecompositionDoc = serde_json::from_str(text)?;
    let modulus = Modulus::new(doc.m).map_err(|_| ParseError::BadModulus(doc.m))?;
    if doc.classes.is_empty() {
        return Err(ParseError::NoClasses);
    }
    let mut classes = Vec::with_capacity(doc.classes.len());
    for (ci, class) in doc.classes.iter().enumerate() {
        if class.is_empty() {
            return Err(ParseError::EmptyClass(ci));
        }
        let mut cycles = Vec::with_capacity(class.len());
        for cyc in class {
            let mut vertices = Vec::with_capacity(cyc.len());
            for token in cyc {
                let v = Vertex::from_token(token, modulus).ok_or_else(|| {
                    // Distinguish an out-of-range index from a malformed token.
                    if let Some(rest) = token.strip_prefix(['x', 'y']) {
                        if rest.parse::<u32>().is_ok() && !(rest.len() > 1 && rest.starts_with('0'))
                        {
                            return ParseError::IndexOutOfRange(token.clone(), doc.m);
                        }
                    }
                    ParseError::BadToken(token.clone())
                })?;
                vertices.push(v);
            }
            let cycle = DirectedCycle::new(vertices).map_err(|e| match e {
                crate::model::ModelError::RepeatedCycleVertex(v) => {
                    ParseError::RepeatedVertex(v.token())
                }
                _ => ParseError::ShortCycle,
            })?;
            cycles.push(cycle);
        }
        classes.push(ResolutionClass::new(cycles));
    }
    Ok(Decomposition::new(modulus, classes))
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    singletons: Vec<u32>,
    quads: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
struct PathDoc {
    from: u32,
    to: u32,
    vertices: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct WitnessDoc {
    m: u32,
    side: String,
    s: Vec<u32>,
    partition: PartitionDoc,
    paths: Vec<PathDoc>,
    cycles: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<u32>,
}

pub fn serialize_witness(w: &Witness) -> String {
    let doc = WitnessDoc {
        m: w.m.m(),
        side: w.side.to_string(),
        s: w.s.iter().copied().collect(),
        partition: PartitionDoc {
            singletons: w.partition.singletons.iter().copied().collect(),
            quads: w.partition.quads.iter().map(|&(a, b)| [a, b]).collect(),
        },
        paths: w
            .paths
            .iter()
            .map(|p| PathDoc { from: p.from, to: p.to, vertices: p.vertices.clone() })
            .collect(),
        cycles: w.cycles.clone(),
        q: w.q,
    };
    serde_json::to_string_pretty(&doc).expect("witness serializes")
}

pub fn parse_witness(text: &str) -> Result<Witness, ParseError> {
    let doc: WitnessDoc = serde_json::from_str(text)?;
    let m = Modulus::new(doc.m).map_err(|_| ParseError::BadModulus(doc.m))?;
    let side = match doc.side.as_str() {
        "X" => Side::X,
        "Y" => Side::Y,
        other => return Err(ParseError::BadSide(other.to_string())),
    };
    let check = |r: u32| -> Result<u32, ParseError> {
        if r >= m.m() {
            Err(ParseError::BadResidue(r, m.m()))
        } else {
            Ok(r)
        }
    };
    let mut s = std::collections::BTreeSet::new();
    for r in doc.s {
        s.insert(check(r)?);
    }
    let mut partition = DifferencePartition::default();
    for r in doc.partition.singletons {
        partition.singletons.insert(check(r)?);
    }
    for [a, b] in doc.partition.quads {
        partition.quads.insert((check(a)?, check(b)?));
    }
    let mut paths = Vec::new();
    for p in doc.paths {
        if p.vertices.len() < 2 {
            return Err(ParseError::ShortPath);
        }
        for &v in &p.vertices {
            check(v)?;
        }
        if p.vertices[0] != p.from || *p.vertices.last().unwrap() != p.to {
            return Err(ParseError::PathEndpointMismatch);
        }
        paths.push(WitnessPath { from: p.from, to: p.to, vertices: p.vertices });
    }
    for c in &doc.cycles {
        for &v in c {
            check(v)?;
        }
    }
    Ok(Witness { m, side, s, partition, paths, cycles: doc.cycles, q: doc.q })
}
