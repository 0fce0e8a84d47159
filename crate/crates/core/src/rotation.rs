//! The rotation construction: two base m-cycles, the m classes obtained by
//! rotating them, and the structure of the 2m mixed arcs left over.
//!
//! Base cycles:
//!
//! ```text
//! C_0  = x_0 y_0 x_1 y_1 … x_k x_0
//! C_0' = y_k x_{k+1} y_{k+1} … y_{2k} y_k
//! ```
//!
//! Class `R_i` shifts X-indices of both by `i` and Y-indices by `2i`. The m
//! classes consume all pure arcs of difference `k+1` on both sides and every
//! mixed arc except `(x_{k+i}, y_{k+2i})` and `(y_{2k+2i}, x_i)` for
//! `i ∈ Z_m`. Those leftovers form one 2m-cycle when `m ≢ 0 (mod 3)` and
//! three 2m/3-cycles otherwise.

use thiserror::Error;

use crate::model::{Arc, DirectedCycle, Modulus, ResolutionClass, Side, Vertex};

#[derive(Debug, Error)]
pub enum RotationError {
    #[error("leftover trace did not close after {0} arcs")]
    TraceBroken(usize),
}

/// Result of developing the base cycles around `Z_m`.
#[derive(Debug, Clone)]
pub struct RotationOutput {
    /// `R_0 .. R_{m-1}`, each `{C_i, C_i'}`.
    pub classes: Vec<ResolutionClass>,
    /// The 2m mixed arcs not used by any class, in trace-friendly order:
    /// `(x_{k+i}, y_{k+2i})` then `(y_{2k+2i}, x_i)` for each `i`.
    pub leftover: Vec<Arc>,
    /// The one pure difference consumed on both sides: `k+1`.
    pub used_pure: u32,
}

/// The two vertex-disjoint base m-cycles that jointly span all 2m vertices.
pub fn base_cycles(m: Modulus) -> (DirectedCycle, DirectedCycle) {
    let k = m.k() as i64;
    let mut c0 = Vec::with_capacity(m.m() as usize);
    for j in 0..k {
        c0.push(m.x(j));
        c0.push(m.y(j));
    }
    c0.push(m.x(k));
    let mut c0p = Vec::with_capacity(m.m() as usize);
    c0p.push(m.y(k));
    for j in (k + 1)..=(2 * k) {
        c0p.push(m.x(j));
        c0p.push(m.y(j));
    }
    (
        DirectedCycle::new(c0).expect("base cycle is simple"),
        DirectedCycle::new(c0p).expect("base cycle is simple"),
    )
}

fn shift(c: &DirectedCycle, m: Modulus, i: i64) -> DirectedCycle {
    let vertices = c
        .vertices()
        .iter()
        .map(|v| match v.side {
            Side::X => m.x(v.index as i64 + i),
            Side::Y => m.y(v.index as i64 + 2 * i),
        })
        .collect();
    DirectedCycle::new(vertices).expect("shift preserves simplicity")
}

/// Develop the base cycles into the m rotation classes and report the
/// leftover mixed arcs.
pub fn rotation_classes(m: Modulus) -> RotationOutput {
    let (c0, c0p) = base_cycles(m);
    let classes = (0..m.m() as i64)
        .map(|i| ResolutionClass::new(vec![shift(&c0, m, i), shift(&c0p, m, i)]))
        .collect();
    let k = m.k() as i64;
    let mut leftover = Vec::with_capacity(2 * m.m() as usize);
    for i in 0..m.m() as i64 {
        leftover.push(Arc::new(m.x(k + i), m.y(k + 2 * i)).unwrap());
    }
    for i in 0..m.m() as i64 {
        leftover.push(Arc::new(m.y(2 * k + 2 * i), m.x(i)).unwrap());
    }
    RotationOutput { classes, leftover, used_pure: m.k() + 1 }
}

/// What the leftover arcs trace out.
#[derive(Debug, Clone)]
pub enum LeftoverStructure {
    /// `m ≢ 0 (mod 3)`: a single 2m-cycle, reported starting at `y_k`.
    Single(DirectedCycle),
    /// `m ≡ 0 (mod 3)`: three vertex-disjoint 2m/3-cycles rooted at
    /// `x_0`, `x_1`, `x_2`.
    Triple([DirectedCycle; 3]),
}

/// Unique leftover arc out of `v`.
///
/// From `x_j` the head is `y_{2j-k}`; from `y_j` it is `x_{(j+1)/2}` with
/// the halving done mod m.
pub fn leftover_successor(m: Modulus, v: Vertex) -> Vertex {
    let k = m.k() as i64;
    match v.side {
        Side::X => m.y(2 * v.index as i64 - k),
        Side::Y => m.x((v.index as i64 + 1) * m.inv2() as i64),
    }
}

fn trace_from(m: Modulus, start: Vertex) -> Result<DirectedCycle, RotationError> {
    let mut vertices = vec![start];
    let mut v = leftover_successor(m, start);
    while v != start {
        if vertices.len() > 2 * m.m() as usize {
            return Err(RotationError::TraceBroken(vertices.len()));
        }
        vertices.push(v);
        v = leftover_successor(m, v);
    }
    DirectedCycle::new(vertices).map_err(|_| RotationError::TraceBroken(0))
}

/// Trace the leftover arcs into their cycle structure. The dichotomy on
/// `m mod 3` is observed from the trace, not assumed.
pub fn leftover_structure(m: Modulus) -> Result<LeftoverStructure, RotationError> {
    let single = trace_from(m, m.y(m.k() as i64))?;
    if single.len() == 2 * m.m() as usize {
        return Ok(LeftoverStructure::Single(single));
    }
    let c1 = trace_from(m, m.x(0))?;
    let c2 = trace_from(m, m.x(1))?;
    let c3 = trace_from(m, m.x(2))?;
    let expected = (2 * m.m() / 3) as usize;
    if c1.len() != expected || c2.len() != expected || c3.len() != expected {
        return Err(RotationError::TraceBroken(c1.len()));
    }
    Ok(LeftoverStructure::Triple([c1, c2, c3]))
}
