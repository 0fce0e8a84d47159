//! Construction, search, and certification of resolvable decompositions of
//! the complete symmetric digraph `K*_{2m}` (odd `m ≥ 5`) into directed
//! m-cycles.
//!
//! The pipeline: develop two base cycles around `Z_m` ([`rotation`]), splice
//! the leftover mixed arcs into two further resolution classes using
//! parameter tables ([`params`]) and per-side witnesses ([`witness`],
//! [`dataset`]), and finish with pairs of circulant Hamiltonian cycles
//! ([`circulant`]). Everything emitted is certified by an independent
//! checker ([`verifier`]) that recomputes coverage from raw vertex
//! sequences. A backtracking engine ([`search`]) regenerates witnesses from
//! scratch.

pub mod assembly;
pub mod circulant;
pub mod dataset;
pub mod document;
pub mod model;
pub mod params;
pub mod rotation;
pub mod search;
pub mod verifier;
pub mod witness;

pub use model::{Arc, Decomposition, DirectedCycle, DirectedPath, Modulus, Side, Vertex};
