//! Witness bundles and the condition systems they certify.
//!
//! A witness fixes, for one side of one modulus: a connection set `S`, a
//! partition of the complement certifying that the complementary circulant
//! decomposes into m-cycles, and a constrained decomposition of `C(m;S)`
//! (with designated arcs removed and possibly adjoined) into m-cycles plus
//! required paths. [`derive_spec`] produces the condition system for a given
//! modulus; the search engine in [`crate::search`] hunts for witnesses and
//! the verifier certifies them.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circulant::{gcd, validate_partition, DifferencePartition, DifferenceSet};
use crate::model::{Modulus, Side};
use crate::params::{params_b_raw, params_nonzero, ParamsError};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("no condition system for m={0}")]
    OutOfScope(u32),
    #[error("no condition system for m={0} on side {1}")]
    NoSuchSide(u32, Side),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// A required path: fixed endpoints, possibly symbolic length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathReq {
    pub source: u32,
    pub target: u32,
    pub length: PathLen,
}

/// Path lengths may be stated in one free parameter `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLen {
    Fixed(u32),
    /// Exactly `q`.
    FreeQ,
    /// `c - q` for the stored constant `c`.
    ComplementQ(u32),
}

impl PathLen {
    pub fn resolve(&self, q: Option<u32>) -> Option<u32> {
        match (self, q) {
            (PathLen::Fixed(n), _) => Some(*n),
            (PathLen::FreeQ, Some(q)) => Some(q),
            (PathLen::ComplementQ(c), Some(q)) => c.checked_sub(q),
            _ => None,
        }
    }
}

/// The condition system for one side of one modulus: membership constraints
/// on `S`, arcs deleted from / adjoined to `C(m;S)`, and the required paths.
#[derive(Debug, Clone)]
pub struct ConditionSpec {
    pub m: Modulus,
    pub side: Side,
    /// Differences that must not lie in `S`.
    pub forbidden: BTreeSet<u32>,
    /// Differences that must lie in `S`.
    pub required: BTreeSet<u32>,
    /// Arcs deleted from `C(m;S)`; their differences are all required.
    pub removed: Vec<(u32, u32)>,
    /// Arcs adjoined; their differences are all forbidden.
    pub added: Vec<(u32, u32)>,
    pub required_paths: Vec<PathReq>,
    /// Range of the free parameter `q`, when any path length is symbolic.
    pub q_range: Option<(u32, u32)>,
}

impl ConditionSpec {
    /// Total length of the required paths once `q` is resolved.
    pub fn total_path_len(&self, q: Option<u32>) -> Option<u32> {
        self.required_paths.iter().map(|p| p.length.resolve(q)).sum()
    }

    /// Number of m-cycles a witness with `|S| = card` must provide, or None
    /// if the arc count cannot balance.
    pub fn cycle_count(&self, card: u32, q: Option<u32>) -> Option<u32> {
        let m = self.m.m() as i64;
        let arcs = m * card as i64 - self.removed.len() as i64 + self.added.len() as i64
            - self.total_path_len(q)? as i64;
        if arcs < 0 || arcs % m != 0 {
            return None;
        }
        Some((arcs / m) as u32)
    }
}

/// The condition systems attached to a modulus: one per side that needs a
/// computer-searched witness.
#[derive(Debug, Clone, Default)]
pub struct DerivedSpecs {
    pub x: Option<ConditionSpec>,
    pub y: Option<ConditionSpec>,
}

impl DerivedSpecs {
    pub fn for_side(&self, side: Side) -> Option<&ConditionSpec> {
        match side {
            Side::X => self.x.as_ref(),
            Side::Y => self.y.as_ref(),
        }
    }
}

/// Derive the condition system(s) for `m`:
/// a single Y-side system for `m ≢ 0 (mod 3)` (`m ≥ 7`, `m ≠ 11`), X and Y
/// systems for `m ≡ 0 (mod 3)` (`m ≥ 15`), and the special systems for
/// `m = 9` and `m = 11`.
pub fn derive_spec(m: Modulus) -> Result<DerivedSpecs, SpecError> {
    match m.m() {
        9 => Ok(special_specs_9(m)),
        11 => Ok(special_specs_11(m)),
        v if v % 3 != 0 && v >= 7 => {
            let p = params_nonzero(m)?;
            let spec = ConditionSpec {
                m,
                side: Side::Y,
                forbidden: BTreeSet::from([m.k() + 1]),
                required: BTreeSet::from([p.d1y, p.d2y]),
                removed: vec![p.a1(), p.a2()],
                added: vec![],
                required_paths: vec![
                    PathReq { source: p.s1, target: p.t1, length: PathLen::Fixed(p.r1) },
                    PathReq { source: p.s2, target: p.t2, length: PathLen::Fixed(p.r2) },
                ],
                q_range: None,
            };
            Ok(DerivedSpecs { x: None, y: Some(spec) })
        }
        v if v % 3 == 0 && v >= 15 => {
            let p = params_b_raw(m)?;
            crate::params::params_zero(m)?;
            let x = ConditionSpec {
                m,
                side: Side::X,
                forbidden: BTreeSet::from([m.k() + 1, p.dx]),
                required: BTreeSet::from([p.d1x, p.d2x]),
                removed: p.b_x().to_vec(),
                added: p.c().to_vec(),
                required_paths: vec![],
                q_range: None,
            };
            let third = m.m() / 3;
            let y = ConditionSpec {
                m,
                side: Side::Y,
                forbidden: BTreeSet::from([m.k() + 1]),
                required: BTreeSet::from([p.d1y, p.d2y]),
                removed: p.b_y().to_vec(),
                required_paths: vec![
                    PathReq {
                        source: p.s1,
                        target: m.reduce(-1),
                        length: PathLen::Fixed(2 * third - 1),
                    },
                    PathReq { source: p.s2, target: 3, length: PathLen::FreeQ },
                    PathReq { source: p.s3, target: 1, length: PathLen::ComplementQ(third - 2) },
                ],
                added: vec![],
                q_range: Some((1, third - 3)),
            };
            Ok(DerivedSpecs { x: Some(x), y: Some(y) })
        }
        v => Err(SpecError::OutOfScope(v)),
    }
}

/// The `m = 9` systems. The parameter table still applies, but the path
/// requirements are bespoke: three short X-paths into `x_{t_i}` and three
/// Y-paths with lengths 1, 2, 3.
fn special_specs_9(m: Modulus) -> DerivedSpecs {
    let p = params_b_raw(m).expect("9 is in branch B");
    let x = ConditionSpec {
        m,
        side: Side::X,
        forbidden: BTreeSet::from([m.k() + 1]),
        required: BTreeSet::from([p.d1x, p.d2x]),
        removed: p.b_x().to_vec(),
        added: vec![],
        required_paths: vec![
            PathReq { source: 1, target: p.t1, length: PathLen::Fixed(1) },
            PathReq { source: 2, target: p.t2, length: PathLen::Fixed(1) },
            PathReq { source: 0, target: p.t3, length: PathLen::Fixed(4) },
        ],
        q_range: None,
    };
    let y = ConditionSpec {
        m,
        side: Side::Y,
        forbidden: BTreeSet::from([m.k() + 1]),
        required: BTreeSet::from([p.d1y, p.d2y]),
        removed: p.b_y().to_vec(),
        added: vec![],
        required_paths: vec![
            PathReq { source: p.s1, target: 3, length: PathLen::Fixed(1) },
            PathReq { source: p.s2, target: 1, length: PathLen::Fixed(2) },
            PathReq { source: p.s3, target: m.reduce(-1), length: PathLen::Fixed(3) },
        ],
        q_range: None,
    };
    DerivedSpecs { x: Some(x), y: Some(y) }
}

/// The `m = 11` system: the witness lives on side X, with the long paths of
/// the leftover split carried by the Y side instead.
fn special_specs_11(m: Modulus) -> DerivedSpecs {
    let x = ConditionSpec {
        m,
        side: Side::X,
        forbidden: BTreeSet::from([6]),
        required: BTreeSet::from([3, 10]),
        removed: vec![(6, 5), (4, 7)],
        added: vec![],
        required_paths: vec![
            PathReq { source: 5, target: 6, length: PathLen::Fixed(2) },
            PathReq { source: 7, target: 4, length: PathLen::Fixed(7) },
        ],
        q_range: None,
    };
    DerivedSpecs { x: Some(x), y: None }
}

/// One side's witness: the set `S`, the complement partition, the required
/// paths, the m-cycles, and the chosen `q` when the system is symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub m: Modulus,
    pub side: Side,
    pub s: BTreeSet<u32>,
    pub partition: DifferencePartition,
    pub paths: Vec<WitnessPath>,
    pub cycles: Vec<Vec<u32>>,
    pub q: Option<u32>,
}

/// A path on one side, stored with both endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPath {
    pub from: u32,
    pub to: u32,
    pub vertices: Vec<u32>,
}

impl WitnessPath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Partition `target` into singleton cells (coprime residues) and quad
/// cells `{±d_i, ±d_j}` with `gcd(d_i, d_j, m) = 1`.
///
/// Residues sharing a factor with m can only live in quads, and only in
/// `±`-pairs, so the search matches those pairs first — against each other
/// when the gcd condition allows, otherwise against a coprime `±`-pair —
/// and leaves every unmatched coprime residue as a singleton. Deterministic:
/// pairs are processed and partners tried in ascending order. Returns None
/// if no partition exists.
pub fn find_complement_partition(m: Modulus, target: &DifferenceSet) -> Option<DifferencePartition> {
    let elems = target.elems();
    let neg = |d: u32| m.reduce(-(d as i64));
    // ±-pairs of non-coprime residues, by ascending representative.
    let mut hard: Vec<(u32, u32)> = Vec::new();
    for &d in elems {
        if gcd(d, m.m()) != 1 {
            let nd = neg(d);
            if !elems.contains(&nd) {
                return None; // a quad needs both signs present
            }
            if d < nd {
                hard.push((d, nd));
            }
        }
    }
    // Coprime ±-pairs fully inside the target, usable as quad partners.
    let soft: Vec<(u32, u32)> = elems
        .iter()
        .copied()
        .filter(|&d| gcd(d, m.m()) == 1 && d < neg(d) && elems.contains(&neg(d)))
        .map(|d| (d, neg(d)))
        .collect();

    let mut quads: Vec<(u32, u32)> = Vec::new();
    let mut hard_used = vec![false; hard.len()];
    let mut soft_used = vec![false; soft.len()];
    if !match_hard_pairs(m, &hard, &soft, &mut hard_used, &mut soft_used, &mut quads) {
        return None;
    }

    let mut partition = DifferencePartition::default();
    for &(a, b) in &quads {
        partition.quads.insert(DifferencePartition::quad_key(m, a, b));
    }
    let in_quads: BTreeSet<u32> =
        quads.iter().flat_map(|&(a, b)| [a, neg(a), b, neg(b)]).collect();
    for &d in elems {
        if !in_quads.contains(&d) {
            partition.singletons.insert(d);
        }
    }
    debug_assert!(validate_partition(m, target, &partition).is_empty());
    Some(partition)
}

fn match_hard_pairs(
    m: Modulus,
    hard: &[(u32, u32)],
    soft: &[(u32, u32)],
    hard_used: &mut [bool],
    soft_used: &mut [bool],
    quads: &mut Vec<(u32, u32)>,
) -> bool {
    let Some(i) = hard_used.iter().position(|&u| !u) else {
        return true;
    };
    hard_used[i] = true;
    let a = hard[i].0;
    for j in (i + 1)..hard.len() {
        if hard_used[j] || gcd(gcd(a, hard[j].0), m.m()) != 1 {
            continue;
        }
        hard_used[j] = true;
        quads.push((a, hard[j].0));
        if match_hard_pairs(m, hard, soft, hard_used, soft_used, quads) {
            return true;
        }
        quads.pop();
        hard_used[j] = false;
    }
    for (j, &(e, _)) in soft.iter().enumerate() {
        if soft_used[j] {
            continue;
        }
        soft_used[j] = true;
        quads.push((a, e));
        if match_hard_pairs(m, hard, soft, hard_used, soft_used, quads) {
            return true;
        }
        quads.pop();
        soft_used[j] = false;
    }
    hard_used[i] = false;
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn set(mm: Modulus, elems: impl IntoIterator<Item = u32>) -> DifferenceSet {
        DifferenceSet::new(mm, elems).unwrap()
    }

    #[test]
    fn derive_spec_m11() {
        let specs = derive_spec(m(11)).unwrap();
        assert!(specs.y.is_none());
        let x = specs.x.unwrap();
        assert_eq!(x.forbidden, BTreeSet::from([6]));
        assert_eq!(x.required, BTreeSet::from([3, 10]));
        assert_eq!(x.removed, vec![(6, 5), (4, 7)]);
        assert_eq!(
            x.required_paths,
            vec![
                PathReq { source: 5, target: 6, length: PathLen::Fixed(2) },
                PathReq { source: 7, target: 4, length: PathLen::Fixed(7) },
            ]
        );
    }

    #[test]
    fn derive_spec_m7() {
        let specs = derive_spec(m(7)).unwrap();
        let y = specs.y.unwrap();
        assert_eq!(y.forbidden, BTreeSet::from([4]));
        assert_eq!(y.required, BTreeSet::from([3, 6]));
        assert_eq!(y.removed, vec![(2, 5), (4, 3)]);
        assert_eq!(
            y.required_paths,
            vec![
                PathReq { source: 5, target: 2, length: PathLen::Fixed(2) },
                PathReq { source: 3, target: 4, length: PathLen::Fixed(3) },
            ]
        );
    }

    #[test]
    fn derive_spec_m15_both_sides() {
        let specs = derive_spec(m(15)).unwrap();
        let x = specs.x.unwrap();
        assert_eq!(x.forbidden, BTreeSet::from([8, 6]));
        assert_eq!(x.required, BTreeSet::from([7, 4]));
        assert_eq!(x.removed, vec![(9, 1), (10, 2), (11, 0)]);
        assert_eq!(x.added, vec![(9, 0), (10, 1), (11, 2)]);
        assert!(x.required_paths.is_empty());

        let y = specs.y.unwrap();
        assert_eq!(y.forbidden, BTreeSet::from([8]));
        assert_eq!(y.required, BTreeSet::from([10, 1]));
        assert_eq!(y.removed, vec![(1, 11), (3, 13), (14, 0)]);
        assert_eq!(y.q_range, Some((1, 2)));
        assert_eq!(
            y.required_paths,
            vec![
                PathReq { source: 11, target: 14, length: PathLen::Fixed(9) },
                PathReq { source: 13, target: 3, length: PathLen::FreeQ },
                PathReq { source: 0, target: 1, length: PathLen::ComplementQ(3) },
            ]
        );
    }

    #[test]
    fn derive_spec_m9() {
        let specs = derive_spec(m(9)).unwrap();
        let x = specs.x.unwrap();
        assert_eq!(x.forbidden, BTreeSet::from([5]));
        assert_eq!(x.required, BTreeSet::from([4, 7]));
        assert_eq!(x.removed, vec![(3, 1), (4, 2), (5, 0)]);
        let y = specs.y.unwrap();
        assert_eq!(y.required, BTreeSet::from([1, 7]));
        assert_eq!(y.removed, vec![(1, 2), (3, 4), (8, 6)]);
        assert_eq!(
            y.required_paths,
            vec![
                PathReq { source: 2, target: 3, length: PathLen::Fixed(1) },
                PathReq { source: 4, target: 1, length: PathLen::Fixed(2) },
                PathReq { source: 6, target: 8, length: PathLen::Fixed(3) },
            ]
        );
    }

    #[test]
    fn derive_spec_rejects_m5() {
        assert!(derive_spec(m(5)).is_err());
    }

    #[test]
    fn partition_prime_m_is_all_singletons() {
        let mm = m(13);
        let t = set(mm, [2, 3, 9, 11]);
        let p = find_complement_partition(mm, &t).unwrap();
        assert!(p.quads.is_empty());
        assert_eq!(p.singletons, t.elems().clone());
    }

    #[test]
    fn partition_m9_two_coprime_singletons() {
        let mm = m(9);
        let t = set(mm, [2, 8]);
        let p = find_complement_partition(mm, &t).unwrap();
        assert!(p.quads.is_empty());
        assert_eq!(p.singletons, BTreeSet::from([2, 8]));
    }

    #[test]
    fn partition_m35_handles_all_multiples() {
        let mm = m(35);
        let excluded = BTreeSet::from([1, 24, 27, 18]);
        let t = DifferenceSet::full_without(mm, &excluded);
        let p = find_complement_partition(mm, &t).unwrap();
        assert!(validate_partition(mm, &t, &p).is_empty());
        // every non-coprime residue sits in some quad
        assert!(p.singletons.iter().all(|&d| gcd(d, 35) == 1));
    }

    #[test]
    fn partition_infeasible_without_negated_mate() {
        // 5 is in the set but -5 = 20 is not, so no quad can cover it.
        let mm = m(25);
        let t = set(mm, [5, 1, 2, 3]);
        assert!(find_complement_partition(mm, &t).is_none());
    }

    #[test]
    fn partition_x_side_sets_for_composite_nonzero_branch() {
        // The assembler needs partitions of Z_m^* minus {k+1, d}.
        for (mv, d) in [(25u32, 23u32), (35, 23), (49, 44)] {
            let mm = m(mv);
            let excluded = BTreeSet::from([mm.k() + 1, d]);
            let t = DifferenceSet::full_without(mm, &excluded);
            let p = find_complement_partition(mm, &t).unwrap();
            assert!(validate_partition(mm, &t, &p).is_empty(), "m={mv}");
        }
    }
}
