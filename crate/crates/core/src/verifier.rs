//! Independent certification of decompositions, witnesses, and parameter
//! tables.
//!
//! Nothing here consults construction code: differences, coverage, and
//! disjointness are recomputed from raw vertex sequences, and arc coverage
//! is an exact multiset comparison (sort and scan), so duplicates are
//! detected exactly. Violations are data, not errors; an empty report is a
//! PASS.

use std::collections::BTreeSet;
use std::fmt;

use crate::circulant::{validate_partition, DifferenceSet, PartitionViolation};
use crate::model::{Decomposition, Modulus, Side, Vertex};
use crate::params::{
    params_a_raw, params_a_violations, params_b_raw, params_b_violations, ParamsError,
};
use crate::witness::{ConditionSpec, Witness};

/// A verification report: PASS iff no violations.
#[derive(Debug, Clone)]
pub struct Report<V> {
    pub violations: Vec<V>,
}

impl<V> Report<V> {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<V: fmt::Display> fmt::Display for Report<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            writeln!(f, "PASS")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            writeln!(f, "FAIL ({} violations)", self.violations.len())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompViolation {
    WrongClassCount { expected: usize, actual: usize },
    WrongCycleLength { class: usize, cycle: usize, len: usize },
    RepeatedVertex { class: usize, cycle: usize, vertex: Vertex },
    IndexOutOfRange { class: usize, cycle: usize, vertex: Vertex },
    ClassMissingVertex { class: usize, vertex: Vertex },
    ClassRepeatsVertex { class: usize, vertex: Vertex },
    DuplicateArc { tail: Vertex, head: Vertex, count: usize },
    MissingArc { tail: Vertex, head: Vertex },
    LoopArc { class: usize, cycle: usize, vertex: Vertex },
}

impl fmt::Display for DecompViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DecompViolation::*;
        match self {
            WrongClassCount { expected, actual } => {
                write!(f, "expected {expected} classes, found {actual}")
            }
            WrongCycleLength { class, cycle, len } => {
                write!(f, "class {class} cycle {cycle}: length {len} is not m")
            }
            RepeatedVertex { class, cycle, vertex } => {
                write!(f, "class {class} cycle {cycle}: vertex {vertex} repeated")
            }
            IndexOutOfRange { class, cycle, vertex } => {
                write!(f, "class {class} cycle {cycle}: vertex {vertex} out of range")
            }
            ClassMissingVertex { class, vertex } => {
                write!(f, "class {class}: vertex {vertex} not covered")
            }
            ClassRepeatsVertex { class, vertex } => {
                write!(f, "class {class}: vertex {vertex} covered twice")
            }
            DuplicateArc { tail, head, count } => {
                write!(f, "arc ({tail},{head}) used {count} times")
            }
            MissingArc { tail, head } => write!(f, "arc ({tail},{head}) never used"),
            LoopArc { class, cycle, vertex } => {
                write!(f, "class {class} cycle {cycle}: loop at {vertex}")
            }
        }
    }
}

pub type DecompReport = Report<DecompViolation>;

/// Certify a decomposition document.
pub fn verify_decomposition(d: &Decomposition) -> DecompReport {
    let classes: Vec<Vec<Vec<Vertex>>> = d
        .classes
        .iter()
        .map(|c| c.cycles.iter().map(|cy| cy.vertices().to_vec()).collect())
        .collect();
    verify_raw_decomposition(d.modulus, &classes)
}

/// Certify raw vertex sequences: every cycle a directed m-cycle with
/// distinct in-range vertices, every class an exact partition of the 2m
/// vertices, 2m-1 classes, and the arc multiset equal to that of the
/// complete symmetric digraph, each arc exactly once. Takes completely
/// untrusted input; nothing is assumed about the sequences.
pub fn verify_raw_decomposition(m: Modulus, classes: &[Vec<Vec<Vertex>>]) -> DecompReport {
    let mut violations = Vec::new();
    let expected_classes = (2 * m.m() - 1) as usize;
    if classes.len() != expected_classes {
        violations.push(DecompViolation::WrongClassCount {
            expected: expected_classes,
            actual: classes.len(),
        });
    }

    let mut arcs: Vec<(Vertex, Vertex)> = Vec::with_capacity(m.total_arcs() as usize);
    for (ci, class) in classes.iter().enumerate() {
        let mut covered: Vec<Vertex> = Vec::with_capacity(2 * m.m() as usize);
        for (yi, cycle) in class.iter().enumerate() {
            if cycle.len() != m.m() as usize {
                violations.push(DecompViolation::WrongCycleLength {
                    class: ci,
                    cycle: yi,
                    len: cycle.len(),
                });
            }
            let mut seen = BTreeSet::new();
            for &v in cycle {
                if v.index >= m.m() {
                    violations.push(DecompViolation::IndexOutOfRange {
                        class: ci,
                        cycle: yi,
                        vertex: v,
                    });
                }
                if !seen.insert(v) {
                    violations.push(DecompViolation::RepeatedVertex {
                        class: ci,
                        cycle: yi,
                        vertex: v,
                    });
                }
                covered.push(v);
            }
            let n = cycle.len();
            for i in 0..n {
                let tail = cycle[i];
                let head = cycle[(i + 1) % n];
                if tail == head {
                    violations.push(DecompViolation::LoopArc {
                        class: ci,
                        cycle: yi,
                        vertex: tail,
                    });
                } else {
                    arcs.push((tail, head));
                }
            }
        }
        // Each class must cover every vertex exactly once.
        covered.sort();
        let mut prev: Option<Vertex> = None;
        for &v in &covered {
            if prev == Some(v) {
                violations.push(DecompViolation::ClassRepeatsVertex { class: ci, vertex: v });
            }
            prev = Some(v);
        }
        let have: BTreeSet<Vertex> = covered.into_iter().collect();
        for v in m.all_vertices() {
            if !have.contains(&v) {
                violations.push(DecompViolation::ClassMissingVertex { class: ci, vertex: v });
            }
        }
    }

    // Exact multiset comparison against all arcs of the host digraph.
    let mut expected: Vec<(Vertex, Vertex)> = Vec::with_capacity(m.total_arcs() as usize);
    for u in m.all_vertices() {
        for v in m.all_vertices() {
            if u != v {
                expected.push((u, v));
            }
        }
    }
    arcs.sort();
    expected.sort();
    let (mut i, mut j) = (0usize, 0usize);
    while i < arcs.len() || j < expected.len() {
        match (arcs.get(i), expected.get(j)) {
            (Some(&a), Some(&e)) if a == e => {
                let mut count = 0;
                while i < arcs.len() && arcs[i] == a {
                    i += 1;
                    count += 1;
                }
                j += 1;
                if count > 1 {
                    violations.push(DecompViolation::DuplicateArc {
                        tail: a.0,
                        head: a.1,
                        count,
                    });
                }
            }
            (Some(&a), Some(&e)) if a < e => {
                // Out-of-range endpoints land here; count and move on.
                let mut count = 0;
                while i < arcs.len() && arcs[i] == a {
                    i += 1;
                    count += 1;
                }
                violations.push(DecompViolation::DuplicateArc { tail: a.0, head: a.1, count });
            }
            (_, Some(&e)) => {
                violations.push(DecompViolation::MissingArc { tail: e.0, head: e.1 });
                j += 1;
            }
            (Some(&a), None) => {
                let mut count = 0;
                while i < arcs.len() && arcs[i] == a {
                    i += 1;
                    count += 1;
                }
                violations.push(DecompViolation::DuplicateArc { tail: a.0, head: a.1, count });
            }
            (None, None) => unreachable!(),
        }
    }

    DecompReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessViolation {
    ModulusMismatch { spec: u32, witness: u32 },
    SideMismatch { spec: Side, witness: Side },
    ForbiddenInS { d: u32 },
    RequiredNotInS { d: u32 },
    ResidueOutOfRange { r: u32 },
    Partition(PartitionViolation),
    QMissing,
    QOutOfRange { q: u32, lo: u32, hi: u32 },
    PathCountMismatch { expected: usize, actual: usize },
    PathEndpointMismatch { path: usize, expected: (u32, u32), actual: (u32, u32) },
    PathLengthMismatch { path: usize, expected: u32, actual: usize },
    PathRepeatsVertex { path: usize, vertex: u32 },
    PathsShareVertex { vertex: u32 },
    CycleWrongLength { cycle: usize, len: usize },
    CycleRepeatsVertex { cycle: usize, vertex: u32 },
    DuplicateArc { tail: u32, head: u32 },
    UncoveredArc { tail: u32, head: u32 },
    ForeignArc { tail: u32, head: u32 },
}

impl fmt::Display for WitnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WitnessViolation::*;
        match self {
            ModulusMismatch { spec, witness } => {
                write!(f, "spec is for m={spec}, witness for m={witness}")
            }
            SideMismatch { spec, witness } => {
                write!(f, "spec is for side {spec}, witness for side {witness}")
            }
            ForbiddenInS { d } => write!(f, "forbidden difference {d} lies in S"),
            RequiredNotInS { d } => write!(f, "required difference {d} missing from S"),
            ResidueOutOfRange { r } => write!(f, "residue {r} out of range"),
            Partition(p) => write!(f, "complement partition: {p}"),
            QMissing => write!(f, "spec has symbolic path lengths but witness declares no q"),
            QOutOfRange { q, lo, hi } => write!(f, "q = {q} outside {{{lo},…,{hi}}}"),
            PathCountMismatch { expected, actual } => {
                write!(f, "expected {expected} paths, found {actual}")
            }
            PathEndpointMismatch { path, expected, actual } => write!(
                f,
                "path {path}: expected ({},{}) endpoints, found ({},{})",
                expected.0, expected.1, actual.0, actual.1
            ),
            PathLengthMismatch { path, expected, actual } => {
                write!(f, "path {path}: expected length {expected}, found {actual}")
            }
            PathRepeatsVertex { path, vertex } => {
                write!(f, "path {path}: vertex {vertex} repeated")
            }
            PathsShareVertex { vertex } => write!(f, "paths share vertex {vertex}"),
            CycleWrongLength { cycle, len } => {
                write!(f, "cycle {cycle}: length {len} is not m")
            }
            CycleRepeatsVertex { cycle, vertex } => {
                write!(f, "cycle {cycle}: vertex {vertex} repeated")
            }
            DuplicateArc { tail, head } => write!(f, "arc ({tail},{head}) used twice"),
            UncoveredArc { tail, head } => write!(f, "arc ({tail},{head}) never used"),
            ForeignArc { tail, head } => {
                write!(f, "arc ({tail},{head}) outside the adjusted circulant")
            }
        }
    }
}

pub type WitnessReport = Report<WitnessViolation>;

/// Certify a witness against its condition system: membership constraints
/// on S, a valid complement partition, and an exact decomposition of the
/// adjusted circulant into m-cycles plus the required vertex-disjoint paths.
pub fn verify_witness(spec: &ConditionSpec, w: &Witness) -> WitnessReport {
    use WitnessViolation::*;
    let mut violations = Vec::new();
    if spec.m != w.m {
        violations.push(ModulusMismatch { spec: spec.m.m(), witness: w.m.m() });
        return WitnessReport { violations };
    }
    if spec.side != w.side {
        violations.push(SideMismatch { spec: spec.side, witness: w.side });
        return WitnessReport { violations };
    }
    let m = spec.m;
    let mv = m.m();
    for &r in w.s.iter().chain(w.cycles.iter().flatten()) {
        if r >= mv {
            violations.push(ResidueOutOfRange { r });
            return WitnessReport { violations };
        }
    }

    // (1) forbidden differences avoid S; (2) required ones are present.
    for &d in &spec.forbidden {
        if w.s.contains(&d) {
            violations.push(ForbiddenInS { d });
        }
    }
    for &d in &spec.required {
        if !w.s.contains(&d) {
            violations.push(RequiredNotInS { d });
        }
    }

    // (3) the complement admits the declared partition.
    let complement: Vec<u32> =
        (1..mv).filter(|d| !w.s.contains(d) && !spec.forbidden.contains(d)).collect();
    match DifferenceSet::new(m, complement) {
        Ok(set) => {
            for v in validate_partition(m, &set, &w.partition) {
                violations.push(Partition(v));
            }
        }
        Err(_) => violations.push(ResidueOutOfRange { r: 0 }),
    }

    // Resolve q if the system is symbolic.
    let q = match (spec.q_range, w.q) {
        (Some((lo, hi)), Some(q)) => {
            if q < lo || q > hi {
                violations.push(QOutOfRange { q, lo, hi });
            }
            Some(q)
        }
        (Some(_), None) => {
            violations.push(QMissing);
            return WitnessReport { violations };
        }
        (None, _) => None,
    };

    // (4a) paths: declared endpoints and lengths, pairwise vertex-disjoint.
    if w.paths.len() != spec.required_paths.len() {
        violations.push(PathCountMismatch {
            expected: spec.required_paths.len(),
            actual: w.paths.len(),
        });
    }
    let mut all_path_vertices = BTreeSet::new();
    for (i, path) in w.paths.iter().enumerate() {
        for &r in &path.vertices {
            if r >= mv {
                violations.push(ResidueOutOfRange { r });
                return WitnessReport { violations };
            }
        }
        let mut seen = BTreeSet::new();
        for &v in &path.vertices {
            if !seen.insert(v) {
                violations.push(PathRepeatsVertex { path: i, vertex: v });
            } else if !all_path_vertices.insert(v) {
                violations.push(PathsShareVertex { vertex: v });
            }
        }
        if let Some(req) = spec.required_paths.get(i) {
            let actual = (path.vertices[0], *path.vertices.last().unwrap());
            if actual != (req.source, req.target) {
                violations.push(PathEndpointMismatch {
                    path: i,
                    expected: (req.source, req.target),
                    actual,
                });
            }
            if let Some(expected) = req.length.resolve(q) {
                if path.len() != expected as usize {
                    violations.push(PathLengthMismatch {
                        path: i,
                        expected,
                        actual: path.len(),
                    });
                }
            }
        }
    }

    // (4b) cycles are directed m-cycles.
    for (i, cycle) in w.cycles.iter().enumerate() {
        if cycle.len() != mv as usize {
            violations.push(CycleWrongLength { cycle: i, len: cycle.len() });
        }
        let mut seen = BTreeSet::new();
        for &v in cycle {
            if !seen.insert(v) {
                violations.push(CycleRepeatsVertex { cycle: i, vertex: v });
            }
        }
    }

    // (4c) cycles + paths exactly partition the adjusted circulant's arcs.
    let mut expected: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &d in &w.s {
        for i in 0..mv {
            expected.insert((i, m.reduce(i as i64 + d as i64)));
        }
    }
    for r in &spec.removed {
        expected.remove(r);
    }
    for &a in &spec.added {
        expected.insert(a);
    }
    let mut used: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut cover = |tail: u32, head: u32, violations: &mut Vec<WitnessViolation>| {
        if !expected.contains(&(tail, head)) {
            violations.push(ForeignArc { tail, head });
        } else if !used.insert((tail, head)) {
            violations.push(DuplicateArc { tail, head });
        }
    };
    for cycle in &w.cycles {
        let n = cycle.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            cover(cycle[i], cycle[(i + 1) % n], &mut violations);
        }
    }
    for path in &w.paths {
        for (t, h) in path.arcs() {
            cover(t, h, &mut violations);
        }
    }
    for &(t, h) in expected.difference(&used) {
        violations.push(UncoveredArc { tail: t, head: h });
    }

    WitnessReport { violations }
}

#[derive(Debug, Clone)]
pub struct ParamsFinding {
    pub detail: String,
}

impl fmt::Display for ParamsFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.detail)
    }
}

pub type ParamsReport = Report<ParamsFinding>;

/// Evaluate the parameter table for `m`'s branch and report every violated
/// invariant. `m = 11` evaluates under branch A and FAILs, showing the
/// colliding field.
pub fn verify_params(m: Modulus) -> Result<ParamsReport, ParamsError> {
    let details = if m.m() % 3 == 0 {
        if m.m() < 15 {
            return Err(ParamsError::OutOfScope(m.m()));
        }
        params_b_violations(&params_b_raw(m)?)
    } else {
        params_a_violations(&params_a_raw(m)?)
    };
    Ok(ParamsReport {
        violations: details.into_iter().map(|detail| ParamsFinding { detail }).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DirectedCycle, ResolutionClass};

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn rotation_classes_alone_fail_coverage() {
        // Sanity: the m rotation classes are not a full decomposition.
        let mm = m(5);
        let rot = crate::rotation::rotation_classes(mm);
        let d = Decomposition::new(mm, rot.classes);
        let report = verify_decomposition(&d);
        assert!(!report.pass());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DecompViolation::WrongClassCount { .. })));
        assert!(report.violations.iter().any(|v| matches!(v, DecompViolation::MissingArc { .. })));
    }

    #[test]
    fn verify_params_m11_reports_collision() {
        let report = verify_params(m(11)).unwrap();
        assert!(!report.pass());
        assert!(report.violations.iter().any(|v| v.detail.contains("d1y")));
    }

    #[test]
    fn verify_params_passes_in_both_branches() {
        for mv in (7..=49u32).step_by(2) {
            if mv == 9 || mv == 11 {
                continue;
            }
            let report = verify_params(m(mv)).unwrap();
            assert!(report.pass(), "m={mv}: {report}");
        }
        assert!(verify_params(m(9)).is_err());
    }

    #[test]
    fn shortened_witness_path_fails_with_uncovered_arc() {
        let mm = m(7);
        let entry = crate::dataset::load(mm).unwrap();
        let crate::dataset::EntryPayload::Single(stored) = &entry.payload else {
            panic!("m=7 stores one witness");
        };
        let mut w = stored.witness.clone();
        w.paths[0].vertices.pop();
        let last = *w.paths[0].vertices.last().unwrap();
        w.paths[0].to = last;
        let specs = crate::witness::derive_spec(mm).unwrap();
        let report = verify_witness(specs.y.as_ref().unwrap(), &w);
        assert!(!report.pass());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, WitnessViolation::UncoveredArc { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, WitnessViolation::PathLengthMismatch { .. })));
    }

    #[test]
    fn class_partition_violations_have_loci() {
        let mm = m(5);
        // Two copies of the same cycle: repeats 5 vertices, misses 5.
        let c = DirectedCycle::new(vec![mm.x(0), mm.x(1), mm.x(2), mm.x(3), mm.x(4)]).unwrap();
        let class = ResolutionClass::new(vec![c.clone(), c]);
        let d = Decomposition::new(mm, vec![class]);
        let report = verify_decomposition(&d);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DecompViolation::ClassRepeatsVertex { class: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DecompViolation::ClassMissingVertex { class: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DecompViolation::DuplicateArc { .. })));
    }
}
