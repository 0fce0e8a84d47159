//! Domain model: side-tagged vertices, arcs, difference classes, directed
//! paths and cycles, resolution classes, and whole decompositions.
//!
//! The vertex set of the host digraph is split into two sides of `m` vertices
//! each, `x_0..x_{m-1}` and `y_0..y_{m-1}`, with all subscripts evaluated
//! modulo `m`. Every arc carries a computable difference class (pure left,
//! pure right, or one of the two mixed orientations), which is the currency
//! of every construction in this crate.
//!
//! All types here are immutable values and every operation is pure.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("m must be odd and at least 5, got {0}")]
    InvalidModulus(u64),
    #[error("a directed cycle needs at least 2 distinct vertices")]
    CycleTooShort,
    #[error("repeated vertex {0} in cycle")]
    RepeatedCycleVertex(Vertex),
    #[error("a directed path needs at least 1 arc")]
    PathTooShort,
    #[error("repeated vertex {0} in path")]
    RepeatedPathVertex(Vertex),
    #[error("arc endpoints must differ")]
    LoopArc,
}

/// Odd modulus `m >= 5` with `k = (m-1)/2`, so `m = 2k+1`.
///
/// All index arithmetic is funneled through this type; no raw residue
/// escapes unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Modulus {
    m: u32,
}

impl Modulus {
    pub fn new(m: u32) -> Result<Self, ModelError> {
        if m < 5 || m % 2 == 0 {
            return Err(ModelError::InvalidModulus(m as u64));
        }
        Ok(Modulus { m })
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn k(&self) -> u32 {
        (self.m - 1) / 2
    }

    /// Reduce an arbitrary integer into `0..m`.
    #[inline]
    pub fn reduce(&self, i: i64) -> u32 {
        let m = self.m as i64;
        (((i % m) + m) % m) as u32
    }

    #[inline]
    pub fn x(&self, i: i64) -> Vertex {
        Vertex::new(Side::X, self.reduce(i))
    }

    #[inline]
    pub fn y(&self, i: i64) -> Vertex {
        Vertex::new(Side::Y, self.reduce(i))
    }

    #[inline]
    pub fn vertex(&self, side: Side, i: i64) -> Vertex {
        Vertex::new(side, self.reduce(i))
    }

    /// Multiplicative inverse of 2, which is `k+1` since `2(k+1) = m+1`.
    #[inline]
    pub fn inv2(&self) -> u32 {
        self.k() + 1
    }

    /// All `2m` vertices in canonical order (side X first).
    pub fn all_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let m = self.m;
        (0..m)
            .map(|i| Vertex::new(Side::X, i))
            .chain((0..m).map(|i| Vertex::new(Side::Y, i)))
    }

    /// Number of arcs of the complete symmetric digraph on `2m` vertices.
    pub fn total_arcs(&self) -> u64 {
        let n = 2 * self.m as u64;
        n * (n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::X => write!(f, "X"),
            Side::Y => write!(f, "Y"),
        }
    }
}

/// A side-tagged vertex `x_i` or `y_i`.
///
/// Total order: all of X before all of Y, indices ascending. The derived
/// order relies on the field order below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub side: Side,
    pub index: u32,
}

impl Vertex {
    pub fn new(side: Side, index: u32) -> Self {
        Vertex { side, index }
    }

    /// Token form used in documents: `x3`, `y17`.
    pub fn token(&self) -> String {
        match self.side {
            Side::X => format!("x{}", self.index),
            Side::Y => format!("y{}", self.index),
        }
    }

    pub fn from_token(token: &str, m: Modulus) -> Option<Vertex> {
        let side = match token.as_bytes().first()? {
            b'x' => Side::X,
            b'y' => Side::Y,
            _ => return None,
        };
        let digits = &token[1..];
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        let index: u32 = digits.parse().ok()?;
        if index >= m.m() {
            return None;
        }
        Some(Vertex::new(side, index))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

/// A directed arc between two distinct vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub tail: Vertex,
    pub head: Vertex,
}

impl Arc {
    pub fn new(tail: Vertex, head: Vertex) -> Result<Self, ModelError> {
        if tail == head {
            return Err(ModelError::LoopArc);
        }
        Ok(Arc { tail, head })
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.tail, self.head)
    }
}

/// The four difference families. Mixed differences are tracked separately
/// per orientation so that every family is a free `Z_m`-action on its arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DifferenceFamily {
    PureLeft,
    PureRight,
    MixedXY,
    MixedYX,
}

/// Family plus residue; `d != 0` for pure families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DifferenceClass {
    pub family: DifferenceFamily,
    pub d: u32,
}

/// The difference class of an arc: family from the side pattern of
/// (tail, head), and `d = head.index - tail.index (mod m)`.
pub fn arc_difference(a: Arc, m: Modulus) -> DifferenceClass {
    let family = match (a.tail.side, a.head.side) {
        (Side::X, Side::X) => DifferenceFamily::PureLeft,
        (Side::Y, Side::Y) => DifferenceFamily::PureRight,
        (Side::X, Side::Y) => DifferenceFamily::MixedXY,
        (Side::Y, Side::X) => DifferenceFamily::MixedYX,
    };
    let d = m.reduce(a.head.index as i64 - a.tail.index as i64);
    DifferenceClass { family, d }
}

/// A directed path: at least one arc, all vertices distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedPath {
    vertices: Vec<Vertex>,
}

impl DirectedPath {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, ModelError> {
        if vertices.len() < 2 {
            return Err(ModelError::PathTooShort);
        }
        if let Some(v) = first_repeat(&vertices) {
            return Err(ModelError::RepeatedPathVertex(v));
        }
        Ok(DirectedPath { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn source(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn target(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    /// Number of arcs.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.vertices
            .windows(2)
            .map(|w| Arc { tail: w[0], head: w[1] })
    }
}

/// A directed cycle given by its vertex sequence; the closing arc from the
/// last vertex back to the first is implied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedCycle {
    vertices: Vec<Vertex>,
}

impl DirectedCycle {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, ModelError> {
        if vertices.len() < 2 {
            return Err(ModelError::CycleTooShort);
        }
        if let Some(v) = first_repeat(&vertices) {
            return Err(ModelError::RepeatedCycleVertex(v));
        }
        Ok(DirectedCycle { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Cycle length = number of vertices = number of arcs.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All arcs including the closing one.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Arc {
            tail: self.vertices[i],
            head: self.vertices[(i + 1) % n],
        })
    }

    /// Rotation starting at the minimum vertex. Arc set unchanged; idempotent.
    pub fn canonical(&self) -> DirectedCycle {
        let pos = self
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| **v)
            .map(|(i, _)| i)
            .unwrap();
        let mut rotated = Vec::with_capacity(self.vertices.len());
        rotated.extend_from_slice(&self.vertices[pos..]);
        rotated.extend_from_slice(&self.vertices[..pos]);
        DirectedCycle { vertices: rotated }
    }
}

/// See [`DirectedCycle::canonical`].
pub fn canonical_cycle(c: &DirectedCycle) -> DirectedCycle {
    c.canonical()
}

fn first_repeat(vertices: &[Vertex]) -> Option<Vertex> {
    let mut seen = std::collections::HashSet::new();
    for &v in vertices {
        if !seen.insert(v) {
            return Some(v);
        }
    }
    None
}

/// A set of cycles intended to partition the full vertex set.
///
/// The partition property itself is certified by the verifier, not enforced
/// here; this type is the document model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionClass {
    pub cycles: Vec<DirectedCycle>,
}

impl ResolutionClass {
    pub fn new(cycles: Vec<DirectedCycle>) -> Self {
        ResolutionClass { cycles }
    }

    /// Cycles canonicalized and sorted.
    pub fn canonical(&self) -> ResolutionClass {
        let mut cycles: Vec<DirectedCycle> = self.cycles.iter().map(|c| c.canonical()).collect();
        cycles.sort();
        ResolutionClass { cycles }
    }
}

/// A sequence of resolution classes meant to cover every arc of the complete
/// symmetric digraph on `2m` vertices exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub modulus: Modulus,
    pub classes: Vec<ResolutionClass>,
}

impl Decomposition {
    pub fn new(modulus: Modulus, classes: Vec<ResolutionClass>) -> Self {
        Decomposition { modulus, classes }
    }

    pub fn canonical(&self) -> Decomposition {
        Decomposition {
            modulus: self.modulus,
            classes: self.classes.iter().map(|c| c.canonical()).collect(),
        }
    }

    pub fn all_arcs(&self) -> Vec<Arc> {
        let mut arcs = Vec::new();
        for class in &self.classes {
            for cycle in &class.cycles {
                arcs.extend(cycle.arcs());
            }
        }
        arcs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn modulus_rejects_even_and_small() {
        assert!(Modulus::new(4).is_err());
        assert!(Modulus::new(3).is_err());
        assert!(Modulus::new(6).is_err());
        assert!(Modulus::new(5).is_ok());
        assert_eq!(m(9).k(), 4);
        assert_eq!(m(9).inv2(), 5);
    }

    #[test]
    fn arc_difference_examples() {
        let m9 = m(9);
        // (x_1 -> x_0): pure left, -1 mod 9 = 8.
        let a = Arc::new(m9.x(1), m9.x(0)).unwrap();
        assert_eq!(
            arc_difference(a, m9),
            DifferenceClass { family: DifferenceFamily::PureLeft, d: 8 }
        );
        // (x_3 -> y_2): mixed X->Y, difference 8.
        let a = Arc::new(m9.x(3), m9.y(2)).unwrap();
        assert_eq!(
            arc_difference(a, m9),
            DifferenceClass { family: DifferenceFamily::MixedXY, d: 8 }
        );
        // (y_2 -> x_7) at m=11: mixed Y->X, difference 5.
        let m11 = m(11);
        let a = Arc::new(m11.y(2), m11.x(7)).unwrap();
        assert_eq!(
            arc_difference(a, m11),
            DifferenceClass { family: DifferenceFamily::MixedYX, d: 5 }
        );
    }

    #[test]
    fn arc_difference_reconstructs_head() {
        // Re-adding d to the tail index within the head's side gives the head.
        let mm = m(9);
        for s1 in [Side::X, Side::Y] {
            for s2 in [Side::X, Side::Y] {
                for i in 0..9 {
                    for j in 0..9 {
                        let tail = Vertex::new(s1, i);
                        let head = Vertex::new(s2, j);
                        if tail == head {
                            continue;
                        }
                        let dc = arc_difference(Arc::new(tail, head).unwrap(), mm);
                        let rebuilt = mm.vertex(head.side, tail.index as i64 + dc.d as i64);
                        assert_eq!(rebuilt, head);
                    }
                }
            }
        }
    }

    #[test]
    fn difference_families_partition_all_arcs() {
        // 2 pure families x (m-1) differences x m arcs
        //   + 2 mixed families x m differences x m arcs = 4m^2 - 2m.
        let mm = m(7);
        let mut count = 0u64;
        let mut per_family = std::collections::HashMap::new();
        for u in mm.all_vertices() {
            for v in mm.all_vertices() {
                if u == v {
                    continue;
                }
                let dc = arc_difference(Arc::new(u, v).unwrap(), mm);
                match dc.family {
                    DifferenceFamily::PureLeft | DifferenceFamily::PureRight => {
                        assert_ne!(dc.d, 0)
                    }
                    _ => {}
                }
                *per_family.entry((dc.family, dc.d)).or_insert(0u64) += 1;
                count += 1;
            }
        }
        assert_eq!(count, mm.total_arcs());
        assert_eq!(count, 4 * 49 - 14);
        // Every (family, difference) class has exactly m arcs.
        for (_, n) in per_family {
            assert_eq!(n, 7);
        }
    }

    #[test]
    fn canonical_cycle_examples() {
        let mm = m(5);
        let c = DirectedCycle::new(vec![mm.x(2), mm.x(0), mm.x(1)]).unwrap();
        assert_eq!(c.canonical().vertices(), &[mm.x(0), mm.x(1), mm.x(2)]);

        let c = DirectedCycle::new(vec![mm.y(4), mm.x(0), mm.y(1)]).unwrap();
        assert_eq!(c.canonical().vertices(), &[mm.x(0), mm.y(1), mm.y(4)]);

        // Idempotence.
        let canon = c.canonical();
        assert_eq!(canon.canonical(), canon);
    }

    #[test]
    fn canonical_cycle_preserves_arc_set() {
        let mm = m(7);
        let c = DirectedCycle::new(vec![mm.y(3), mm.x(1), mm.y(0), mm.x(5)]).unwrap();
        let mut a: Vec<Arc> = c.arcs().collect();
        let mut b: Vec<Arc> = c.canonical().arcs().collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_rejects_repeats_and_short() {
        let mm = m(5);
        assert_eq!(
            DirectedCycle::new(vec![mm.x(0)]).unwrap_err(),
            ModelError::CycleTooShort
        );
        assert!(matches!(
            DirectedCycle::new(vec![mm.x(0), mm.x(1), mm.x(0)]).unwrap_err(),
            ModelError::RepeatedCycleVertex(_)
        ));
    }

    #[test]
    fn vertex_tokens_roundtrip() {
        let mm = m(17);
        for v in mm.all_vertices() {
            assert_eq!(Vertex::from_token(&v.token(), mm), Some(v));
        }
        assert_eq!(Vertex::from_token("x17", mm), None);
        assert_eq!(Vertex::from_token("z3", mm), None);
        assert_eq!(Vertex::from_token("x", mm), None);
        assert_eq!(Vertex::from_token("x03", mm), None);
    }
}
