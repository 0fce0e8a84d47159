//! Assemblers: rotation output plus witnesses in, complete resolvable
//! decomposition out.
//!
//! Every branch produces `2m - 1` classes: the m rotation classes, one
//! class splicing the odd leftover pieces with pure linking arcs, one class
//! splicing the even pieces with arithmetic paths and witness paths, and
//! `m - 3` classes pairing a spanning X-cycle with a spanning Y-cycle.
//!
//! Witnesses are inputs, never side effects: assemblers do not invoke the
//! witness search. [`construct`] wires in the stored corpus.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circulant::{decompose_circulant, CirculantError, DifferenceSet, QuadCache};
use crate::dataset::{self, DatasetError, EntryPayload};
use crate::model::{
    Decomposition, DirectedCycle, DirectedPath, ModelError, Modulus, ResolutionClass, Side, Vertex,
};
use crate::params::{params_nonzero, params_zero, ParamsA, ParamsB, ParamsError};
use crate::rotation::{leftover_structure, rotation_classes, LeftoverStructure, RotationError};
use crate::verifier::{verify_witness, WitnessReport};
use crate::witness::{derive_spec, find_complement_partition, SpecError, Witness};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("m must be odd")]
    EvenModulus,
    #[error("m={0} is out of scope for this assembler")]
    WrongBranch(u32),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Circulant(#[from] CirculantError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("witness rejected:\n{0}")]
    WitnessRejected(WitnessReport),
    #[error("witness is for m={0} side {1}, expected m={2} side {3}")]
    WitnessMismatch(u32, Side, u32, Side),
    #[error("no partition found for the left-side complement")]
    NoSidePartition,
    #[error("leftover split mismatch: expected {expected} at piece {piece}, traced {actual}")]
    LeftoverMismatch { piece: usize, expected: Vertex, actual: Vertex },
    #[error("cycle pairing needs equal counts, got {0} vs {1}")]
    PairCountMismatch(usize, usize),
    #[error("assembled cycle is invalid: {0}")]
    BadCycle(#[from] ModelError),
}

/// Splice paths into a single cycle. Consecutive pieces either overlap in
/// one vertex (shared endpoint) or are joined by an implied linking arc;
/// same rule for the closing junction.
fn splice(pieces: &[&DirectedPath]) -> Result<DirectedCycle, AssemblyError> {
    let mut vertices: Vec<Vertex> = Vec::new();
    for piece in pieces {
        if vertices.last() == Some(&piece.source()) {
            vertices.extend_from_slice(&piece.vertices()[1..]);
        } else {
            vertices.extend_from_slice(piece.vertices());
        }
    }
    if vertices.len() > 1 && vertices.first() == vertices.last() {
        vertices.pop();
    }
    Ok(DirectedCycle::new(vertices)?)
}

fn side_path(m: Modulus, side: Side, residues: &[u32]) -> Result<DirectedPath, AssemblyError> {
    let vertices = residues.iter().map(|&r| m.vertex(side, r as i64)).collect();
    Ok(DirectedPath::new(vertices)?)
}

fn side_cycle(m: Modulus, side: Side, residues: &[u32]) -> Result<DirectedCycle, AssemblyError> {
    let vertices = residues.iter().map(|&r| m.vertex(side, r as i64)).collect();
    Ok(DirectedCycle::new(vertices)?)
}

/// Walk `steps` arcs of pure difference `d` on one side, starting at `from`.
fn arithmetic_path(
    m: Modulus,
    side: Side,
    from: u32,
    d: u32,
    steps: u32,
) -> Result<DirectedPath, AssemblyError> {
    let mut vertices = Vec::with_capacity(steps as usize + 1);
    let mut v = from as i64;
    for _ in 0..=steps {
        vertices.push(m.vertex(side, v));
        v += d as i64;
    }
    Ok(DirectedPath::new(vertices)?)
}

fn check_witness(
    spec_m: Modulus,
    side: Side,
    w: &Witness,
) -> Result<(), AssemblyError> {
    if w.m != spec_m || w.side != side {
        return Err(AssemblyError::WitnessMismatch(w.m.m(), w.side, spec_m.m(), side));
    }
    let specs = derive_spec(spec_m)?;
    let spec = specs.for_side(side).ok_or(SpecError::NoSuchSide(spec_m.m(), side))?;
    let report = verify_witness(spec, w);
    if !report.pass() {
        return Err(AssemblyError::WitnessRejected(report));
    }
    Ok(())
}

/// Pair spanning one-side cycles positionally into two-cycle classes, both
/// lists sorted by canonical form first so the pairing is reproducible.
pub fn pair_into_classes(
    x_cycles: Vec<DirectedCycle>,
    y_cycles: Vec<DirectedCycle>,
) -> Result<Vec<ResolutionClass>, AssemblyError> {
    if x_cycles.len() != y_cycles.len() {
        return Err(AssemblyError::PairCountMismatch(x_cycles.len(), y_cycles.len()));
    }
    let sort = |mut v: Vec<DirectedCycle>| {
        v.sort_by_key(|c| c.canonical().vertices().to_vec());
        v
    };
    Ok(sort(x_cycles)
        .into_iter()
        .zip(sort(y_cycles))
        .map(|(x, y)| ResolutionClass::new(vec![x, y]))
        .collect())
}

/// The spanning cycles a witness contributes on its side: its own m-cycles
/// plus the decomposition of the complementary circulant it certifies.
fn witness_side_cycles(
    w: &Witness,
    forbidden: &BTreeSet<u32>,
    cache: &QuadCache,
) -> Result<Vec<DirectedCycle>, AssemblyError> {
    let m = w.m;
    let mut cycles: Vec<DirectedCycle> = Vec::new();
    for c in &w.cycles {
        cycles.push(side_cycle(m, w.side, c)?);
    }
    for c in decompose_circulant(m, &w.partition, cache)? {
        cycles.push(side_cycle(m, w.side, &c)?);
    }
    // forbidden differences are consumed elsewhere in the construction
    debug_assert!(forbidden.iter().all(|d| !w.s.contains(d)));
    Ok(cycles)
}

/// Split the traced leftover 2m-cycle (rooted at `y_k`) into the eight
/// pieces `P_1..P_8` with lengths `(m-1, 1, 1, 1, m-5, 1, 1, 1)` and verify
/// each junction against the parameter table.
pub fn split_leftover_nonzero(
    m: Modulus,
    p: &ParamsA,
) -> Result<[DirectedPath; 8], AssemblyError> {
    let LeftoverStructure::Single(cycle) = leftover_structure(m)? else {
        return Err(AssemblyError::WrongBranch(m.m()));
    };
    let expected_ends = [
        m.y(p.t2 as i64),
        m.x(p.s1p as i64),
        m.y(p.t1 as i64),
        m.x(p.s2p as i64),
        m.x(p.t2p as i64),
        m.y(p.s1 as i64),
        m.x(p.t1p as i64),
        m.y(p.s2 as i64),
    ];
    split_cycle(m, &cycle, m.y(p.s2 as i64), &expected_ends)
}

fn split_cycle(
    m: Modulus,
    cycle: &DirectedCycle,
    root: Vertex,
    expected_ends: &[Vertex; 8],
) -> Result<[DirectedPath; 8], AssemblyError> {
    let mv = m.m() as usize;
    let lengths = [mv - 1, 1, 1, 1, mv - 5, 1, 1, 1];
    let vs = cycle.vertices();
    let start = vs.iter().position(|&v| v == root).ok_or(AssemblyError::LeftoverMismatch {
        piece: 0,
        expected: root,
        actual: vs[0],
    })?;
    let at = |i: usize| vs[(start + i) % vs.len()];
    let mut pieces = Vec::with_capacity(8);
    let mut offset = 0usize;
    for (pi, (&len, &expected)) in lengths.iter().zip(expected_ends).enumerate() {
        let vertices: Vec<Vertex> = (0..=len).map(|j| at(offset + j)).collect();
        let actual = *vertices.last().unwrap();
        if actual != expected {
            return Err(AssemblyError::LeftoverMismatch { piece: pi + 1, expected, actual });
        }
        pieces.push(DirectedPath::new(vertices)?);
        offset += len;
    }
    Ok(pieces.try_into().expect("eight pieces"))
}

/// Assembler for odd `m ≢ 0 (mod 3)`, `m ≥ 7`, `m ≠ 11`, fed by a Y-side
/// witness.
pub fn assemble_nonzero(
    m: Modulus,
    w: &Witness,
    cache: &QuadCache,
) -> Result<Decomposition, AssemblyError> {
    if m.m() % 3 == 0 || m.m() < 7 || m.m() == 11 {
        return Err(AssemblyError::WrongBranch(m.m()));
    }
    check_witness(m, Side::Y, w)?;
    let p = params_nonzero(m)?;
    let rot = rotation_classes(m);
    let mut classes = rot.classes;

    let [p1, p2, p3, p4, p5, p6, p7, p8] = split_leftover_nonzero(m, &p)?;

    // R_m: odd pieces plus four pure linking arcs (two of difference d on
    // the left, a_1 and a_2 on the right).
    classes.push(ResolutionClass::new(vec![
        splice(&[&p1])?,
        splice(&[&p5, &p3, &p7])?,
    ]));

    // R_{m+1}: even pieces, the two arithmetic paths of difference d, and
    // the witness paths Q_1, Q_2.
    let q1p = arithmetic_path(m, Side::X, p.s1p, p.d, p.r1)?;
    let q2p = arithmetic_path(m, Side::X, p.s2p, p.d, p.r2)?;
    let q1 = side_path(m, Side::Y, &w.paths[0].vertices)?;
    let q2 = side_path(m, Side::Y, &w.paths[1].vertices)?;
    classes.push(ResolutionClass::new(vec![
        splice(&[&p2, &q1p, &p8, &q2])?,
        splice(&[&p4, &q2p, &p6, &q1])?,
    ]));

    // Pairing classes: the left side has used exactly differences k+1 and d.
    let x_excluded = BTreeSet::from([m.k() + 1, p.d]);
    let x_target = DifferenceSet::full_without(m, &x_excluded);
    let x_partition =
        find_complement_partition(m, &x_target).ok_or(AssemblyError::NoSidePartition)?;
    let mut x_cycles = Vec::new();
    for c in decompose_circulant(m, &x_partition, cache)? {
        x_cycles.push(side_cycle(m, Side::X, &c)?);
    }
    let y_cycles = witness_side_cycles(w, &BTreeSet::from([m.k() + 1]), cache)?;
    classes.extend(pair_into_classes(x_cycles, y_cycles)?);

    Ok(Decomposition::new(m, classes))
}

/// Assembler for odd `m ≡ 0 (mod 3)`, `m ≥ 15`, fed by X- and Y-side
/// witnesses.
pub fn assemble_zero(
    m: Modulus,
    wx: &Witness,
    wy: &Witness,
    cache: &QuadCache,
) -> Result<Decomposition, AssemblyError> {
    if m.m() % 3 != 0 || m.m() < 15 {
        return Err(AssemblyError::WrongBranch(m.m()));
    }
    check_witness(m, Side::X, wx)?;
    check_witness(m, Side::Y, wy)?;
    let p = params_zero(m)?;
    let rot = rotation_classes(m);
    let mut classes = rot.classes;

    let (px, py) = split_leftover_zero(m, &p)?;

    // R_m: the six leftover pieces plus the six pure linking arcs b_i.
    classes.push(ResolutionClass::new(vec![
        splice(&[&px[0], &px[1], &px[2]])?,
        splice(&[&py[0], &py[2], &py[1]])?,
    ]));

    // R_{m+1}: arithmetic paths of difference -t_1 on the left, witness
    // paths on the right, glued by the six remaining mixed arcs.
    let third = m.m() / 3;
    let q1p = arithmetic_path(m, Side::X, 0, p.dx, third - 1)?;
    let q2p = arithmetic_path(m, Side::X, 1, p.dx, third - 1)?;
    let q3p = arithmetic_path(m, Side::X, 2, p.dx, third - 1)?;
    let q1 = side_path(m, Side::Y, &wy.paths[0].vertices)?;
    let q2 = side_path(m, Side::Y, &wy.paths[1].vertices)?;
    let q3 = side_path(m, Side::Y, &wy.paths[2].vertices)?;
    classes.push(ResolutionClass::new(vec![
        splice(&[&q1p, &q1])?,
        splice(&[&q2p, &q2, &q3p, &q3])?,
    ]));

    let x_cycles = witness_side_cycles(wx, &BTreeSet::from([m.k() + 1, p.dx]), cache)?;
    let y_cycles = witness_side_cycles(wy, &BTreeSet::from([m.k() + 1]), cache)?;
    classes.extend(pair_into_classes(x_cycles, y_cycles)?);

    Ok(Decomposition::new(m, classes))
}

/// Split the three traced leftover cycles into `P_i^X` (from `x_{i-1}` to
/// `x_{t_i}`) and `P_i^Y` (from `y_{s_i}` to `y_{2i-3}`), each of length
/// `m/3 - 1`, verifying junctions against the parameter table.
fn split_leftover_zero(
    m: Modulus,
    p: &ParamsB,
) -> Result<(Vec<DirectedPath>, Vec<DirectedPath>), AssemblyError> {
    let LeftoverStructure::Triple(cycles) = leftover_structure(m)? else {
        return Err(AssemblyError::WrongBranch(m.m()));
    };
    let third = (m.m() / 3) as usize;
    let ts = [p.t1, p.t2, p.t3];
    let ss = [p.s1, p.s2, p.s3];
    let mut px = Vec::with_capacity(3);
    let mut py = Vec::with_capacity(3);
    for (i, cycle) in cycles.iter().enumerate() {
        let vs = cycle.vertices();
        let check = |piece: usize, expected: Vertex, actual: Vertex| {
            if actual == expected {
                Ok(())
            } else {
                Err(AssemblyError::LeftoverMismatch { piece, expected, actual })
            }
        };
        let x_part: Vec<Vertex> = vs[..third].to_vec();
        check(1, m.x(i as i64), x_part[0])?;
        check(1, m.x(ts[i] as i64), *x_part.last().unwrap())?;
        let y_part: Vec<Vertex> = vs[third..].to_vec();
        check(2, m.y(ss[i] as i64), y_part[0])?;
        check(2, m.y(2 * i as i64 - 1), *y_part.last().unwrap())?;
        px.push(DirectedPath::new(x_part)?);
        py.push(DirectedPath::new(y_part)?);
    }
    Ok((px, py))
}

/// The `m = 9` assembler: same leftover split as the general divisible
/// branch, but the second spliced class draws its left-side paths from the
/// X witness instead of arithmetic paths.
fn assemble_special_9(
    m: Modulus,
    wx: &Witness,
    wy: &Witness,
    cache: &QuadCache,
) -> Result<Decomposition, AssemblyError> {
    check_witness(m, Side::X, wx)?;
    check_witness(m, Side::Y, wy)?;
    let p = crate::params::params_b_raw(m)?;
    let rot = rotation_classes(m);
    let mut classes = rot.classes;

    let (px, py) = split_leftover_zero(m, &p)?;
    classes.push(ResolutionClass::new(vec![
        splice(&[&px[0], &px[1], &px[2]])?,
        splice(&[&py[0], &py[2], &py[1]])?,
    ]));

    // R_10 = { Q_1' x_3 y_2 Q_1 y_3 x_2 Q_2' x_4 y_4 Q_2 y_1 x_1,
    //          Q_3' x_5 y_6 Q_3 y_8 x_0 }
    let q1p = side_path(m, Side::X, &wx.paths[0].vertices)?;
    let q2p = side_path(m, Side::X, &wx.paths[1].vertices)?;
    let q3p = side_path(m, Side::X, &wx.paths[2].vertices)?;
    let q1 = side_path(m, Side::Y, &wy.paths[0].vertices)?;
    let q2 = side_path(m, Side::Y, &wy.paths[1].vertices)?;
    let q3 = side_path(m, Side::Y, &wy.paths[2].vertices)?;
    classes.push(ResolutionClass::new(vec![
        splice(&[&q1p, &q1, &q2p, &q2])?,
        splice(&[&q3p, &q3])?,
    ]));

    let x_cycles = witness_side_cycles(wx, &BTreeSet::from([m.k() + 1]), cache)?;
    let y_cycles = witness_side_cycles(wy, &BTreeSet::from([m.k() + 1]), cache)?;
    classes.extend(pair_into_classes(x_cycles, y_cycles)?);

    Ok(Decomposition::new(m, classes))
}

/// The `m = 11` assembler: the leftover 22-cycle splits with the long
/// pieces on swapped sides, the arithmetic paths run on the right side
/// (pure difference 5), and the witness lives on the left.
fn assemble_special_11(
    m: Modulus,
    wx: &Witness,
    cache: &QuadCache,
) -> Result<Decomposition, AssemblyError> {
    check_witness(m, Side::X, wx)?;
    let rot = rotation_classes(m);
    let mut classes = rot.classes;

    let LeftoverStructure::Single(cycle) = leftover_structure(m)? else {
        return Err(AssemblyError::WrongBranch(m.m()));
    };
    // P_1 = x_5 … x_6 (length 10), P_5 = y_3 … y_2 (length 6), rest arcs.
    let expected_ends = [
        m.x(6),
        m.y(7),
        m.x(4),
        m.y(3),
        m.y(2),
        m.x(7),
        m.y(9),
        m.x(5),
    ];
    let [p1, p2, p3, p4, p5, p6, p7, p8] = split_cycle(m, &cycle, m.x(5), &expected_ends)?;

    // R_11 = { P_1 x_6 x_5, P_3 x_4 x_7 P_7 y_9 y_3 P_5 y_2 y_7 }
    classes.push(ResolutionClass::new(vec![
        splice(&[&p1])?,
        splice(&[&p3, &p7, &p5])?,
    ]));

    // The unused arcs of pure right difference 5 form the (y_3,y_2)-path
    // Q_1' of length 2 and the (y_7,y_9)-path Q_2' of length 7.
    let q1p = arithmetic_path(m, Side::Y, 3, 5, 2)?;
    let q2p = arithmetic_path(m, Side::Y, 7, 5, 7)?;
    let q1 = side_path(m, Side::X, &wx.paths[1].vertices)?; // (x_7,x_4), length 7
    let q2 = side_path(m, Side::X, &wx.paths[0].vertices)?; // (x_5,x_6), length 2

    // R_12 = { P_2 Q_2' P_8 Q_2, P_4 Q_1' P_6 Q_1 }
    classes.push(ResolutionClass::new(vec![
        splice(&[&p2, &q2p, &p8, &q2])?,
        splice(&[&p4, &q1p, &p6, &q1])?,
    ]));

    let x_cycles = witness_side_cycles(wx, &BTreeSet::from([6]), cache)?;
    // The right side retains exactly the differences {±1, ±2, ±3, ±4}.
    let y_excluded = BTreeSet::from([5, 6]);
    let y_target = DifferenceSet::full_without(m, &y_excluded);
    let y_partition =
        find_complement_partition(m, &y_target).ok_or(AssemblyError::NoSidePartition)?;
    let mut y_cycles = Vec::new();
    for c in decompose_circulant(m, &y_partition, cache)? {
        y_cycles.push(side_cycle(m, Side::Y, &c)?);
    }
    classes.extend(pair_into_classes(x_cycles, y_cycles)?);

    Ok(Decomposition::new(m, classes))
}

/// Dispatch on `m ∈ {5, 9, 11}` with witnesses drawn from the stored corpus.
pub fn assemble_special(m: Modulus, cache: &QuadCache) -> Result<Decomposition, AssemblyError> {
    let entry = dataset::load(m)?;
    match (m.m(), &entry.payload) {
        (5, EntryPayload::Decomposition(d)) => Ok(d.clone()),
        (9, EntryPayload::Pair { x, y }) => {
            assemble_special_9(m, &x.witness, &y.witness, cache)
        }
        (11, EntryPayload::Single(w)) => assemble_special_11(m, &w.witness, cache),
        _ => Err(AssemblyError::WrongBranch(m.m())),
    }
}

/// Build the full decomposition for any supported odd m, using the stored
/// witnesses.
pub fn construct(m: Modulus, cache: &QuadCache) -> Result<Decomposition, AssemblyError> {
    match m.m() {
        5 | 9 | 11 => assemble_special(m, cache),
        v if v % 3 != 0 => {
            let entry = dataset::load(m)?;
            let EntryPayload::Single(w) = &entry.payload else {
                return Err(AssemblyError::WrongBranch(v));
            };
            assemble_nonzero(m, &w.witness, cache)
        }
        _ => {
            let entry = dataset::load(m)?;
            let EntryPayload::Pair { x, y } = &entry.payload else {
                return Err(AssemblyError::WrongBranch(m.m()));
            };
            assemble_zero(m, &x.witness, &y.witness, cache)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::verify_decomposition;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn split_nonzero_m7_matches_params() {
        let mm = m(7);
        let p = params_nonzero(mm).unwrap();
        let pieces = split_leftover_nonzero(mm, &p).unwrap();
        assert_eq!(pieces[0].len(), 6);
        assert_eq!(pieces[0].source(), mm.y(3));
        assert_eq!(pieces[0].target(), mm.y(4));
        assert_eq!(pieces[4].len(), 2);
        let total: usize = pieces.iter().map(|p| p.len()).sum();
        assert_eq!(total, 14);
    }

    #[test]
    fn split_nonzero_lengths_sum_to_2m() {
        for mv in [7u32, 13, 17, 19, 23, 25] {
            let mm = m(mv);
            let p = params_nonzero(mm).unwrap();
            let pieces = split_leftover_nonzero(mm, &p).unwrap();
            let total: usize = pieces.iter().map(|p| p.len()).sum();
            assert_eq!(total as u32, 2 * mv);
        }
    }

    #[test]
    fn pair_into_classes_examples() {
        let mm = m(5);
        let xc: Vec<DirectedCycle> = (0..4)
            .map(|i| {
                DirectedCycle::new(
                    (0..5).map(|j| mm.x((j * (i + 1)) as i64)).collect::<Vec<_>>(),
                )
                .unwrap()
            })
            .collect();
        let yc: Vec<DirectedCycle> = (0..4)
            .map(|i| {
                DirectedCycle::new(
                    (0..5).map(|j| mm.y((j * (i + 1)) as i64)).collect::<Vec<_>>(),
                )
                .unwrap()
            })
            .collect();
        assert_eq!(pair_into_classes(xc.clone(), yc.clone()).unwrap().len(), 4);
        assert_eq!(pair_into_classes(vec![], vec![]).unwrap().len(), 0);
        assert!(matches!(
            pair_into_classes(xc[..3].to_vec(), yc),
            Err(AssemblyError::PairCountMismatch(3, 4))
        ));
    }

    #[test]
    fn construct_m5_is_the_stored_table() {
        let cache = QuadCache::in_memory();
        let d = construct(m(5), &cache).unwrap();
        assert_eq!(d.classes.len(), 9);
        assert!(verify_decomposition(&d).pass());
    }

    #[test]
    fn construct_small_cases_pass_verifier() {
        let cache = QuadCache::in_memory();
        for mv in [7u32, 9, 11, 13, 15] {
            let d = construct(m(mv), &cache).unwrap();
            assert_eq!(d.classes.len() as u32, 2 * mv - 1, "m={mv}");
            let report = verify_decomposition(&d);
            assert!(report.pass(), "m={mv}:\n{report}");
        }
    }

    #[test]
    fn assemble_nonzero_rejects_wrong_branch() {
        let cache = QuadCache::in_memory();
        let entry = dataset::load(m(9)).unwrap();
        let EntryPayload::Pair { y, .. } = &entry.payload else { panic!() };
        assert!(matches!(
            assemble_nonzero(m(9), &y.witness, &cache),
            Err(AssemblyError::WrongBranch(9))
        ));
    }

    #[test]
    fn assemble_rejects_mutated_witness() {
        let cache = QuadCache::in_memory();
        let entry = dataset::load(m(7)).unwrap();
        let EntryPayload::Single(w) = &entry.payload else { panic!() };
        let mut bad = w.witness.clone();
        bad.cycles[0].swap(0, 1);
        assert!(matches!(
            assemble_nonzero(m(7), &bad, &cache),
            Err(AssemblyError::WitnessRejected(_))
        ));
    }
}
