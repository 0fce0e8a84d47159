//! Embedded witness corpus: one entry per supported odd m in [5, 49].
//!
//! The data lives in human-diffable text files under `data/`, compiled into
//! the binary, and is the single source of truth for construction. Parsing
//! notation: cycles written `(a, b, …, a)` drop the repeated terminal;
//! paths `(a, …, b)` keep both endpoints; starred set elements are the
//! required differences; listed partition cells are the quads (plus
//! explicit singletons), with every remaining difference an implicit
//! singleton cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::circulant::DifferencePartition;
use crate::document;
use crate::model::{Decomposition, Modulus, Side};
use crate::verifier::{verify_decomposition, verify_witness};
use crate::witness::{derive_spec, PathLen, Witness, WitnessPath};

const LEMMA4: &str = include_str!("../data/lemma4.txt");
const APPENDIX_A: &str = include_str!("../data/appendix_a.txt");
const APPENDIX_B: &str = include_str!("../data/appendix_b.txt");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no stored entry for m={0}; run search")]
    MissingM(u32),
    #[error("stored data is malformed: {0}")]
    Parse(String),
}

/// Which stored table an entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Single-witness branch (m not divisible by 3).
    AppendixA,
    /// Two-witness branch (m divisible by 3).
    AppendixB,
    /// The literal m=5 decomposition.
    Lemma4,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::AppendixA => write!(f, "A"),
            Provenance::AppendixB => write!(f, "B"),
            Provenance::Lemma4 => write!(f, "L"),
        }
    }
}

/// A stored witness plus its starred (required) differences.
#[derive(Debug, Clone)]
pub struct StoredWitness {
    pub witness: Witness,
    pub bold: BTreeSet<u32>,
}

#[derive(Debug, Clone)]
pub enum EntryPayload {
    /// m=5: a complete decomposition, no witness machinery.
    Decomposition(Decomposition),
    Single(StoredWitness),
    Pair { x: StoredWitness, y: StoredWitness },
}

#[derive(Debug, Clone)]
pub struct AppendixEntry {
    pub m: Modulus,
    pub provenance: Provenance,
    pub payload: EntryPayload,
}

impl AppendixEntry {
    pub fn witness(&self, side: Side) -> Option<&StoredWitness> {
        match (&self.payload, side) {
            (EntryPayload::Single(w), s) if w.witness.side == s => Some(w),
            (EntryPayload::Pair { x, .. }, Side::X) => Some(x),
            (EntryPayload::Pair { y, .. }, Side::Y) => Some(y),
            _ => None,
        }
    }

    pub fn sides(&self) -> Vec<Side> {
        match &self.payload {
            EntryPayload::Decomposition(_) => vec![],
            EntryPayload::Single(w) => vec![w.witness.side],
            EntryPayload::Pair { .. } => vec![Side::X, Side::Y],
        }
    }
}

fn entries() -> &'static BTreeMap<u32, AppendixEntry> {
    static ENTRIES: OnceLock<BTreeMap<u32, AppendixEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| parse_all().expect("embedded data parses"))
}

/// The stored entry for `m`.
pub fn load(m: Modulus) -> Result<&'static AppendixEntry, DatasetError> {
    entries().get(&m.m()).ok_or(DatasetError::MissingM(m.m()))
}

/// Every `(m, provenance, sides)` triple in the corpus.
pub fn manifest() -> Vec<(u32, Provenance, Vec<Side>)> {
    entries().iter().map(|(&m, e)| (m, e.provenance, e.sides())).collect()
}

/// Outcome of certifying every stored entry.
#[derive(Debug, Clone)]
pub struct DatasetSummary {
    /// `(m, side description, pass, violation count)` per certified item.
    pub results: Vec<(u32, String, bool, usize)>,
}

impl DatasetSummary {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.2)
    }

    pub fn entry_count(&self) -> usize {
        let ms: BTreeSet<u32> = self.results.iter().map(|r| r.0).collect();
        ms.len()
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, what, pass, violations) in &self.results {
            if *pass {
                writeln!(f, "m={m} {what}: PASS")?;
            } else {
                writeln!(f, "m={m} {what}: FAIL ({violations} violations)")?;
            }
        }
        let passed = self.results.iter().filter(|r| r.2).count();
        writeln!(f, "{passed}/{} checks passed", self.results.len())
    }
}

/// Run the verifier over every stored entry: the m=5 table through
/// decomposition certification, every witness against its derived
/// condition system (including the starred-set match).
pub fn verify_all() -> DatasetSummary {
    let mut results = Vec::new();
    for (&mv, entry) in entries() {
        let m = entry.m;
        match &entry.payload {
            EntryPayload::Decomposition(d) => {
                let report = verify_decomposition(d);
                results.push((mv, "table".to_string(), report.pass(), report.violations.len()));
            }
            EntryPayload::Single(w) => {
                let (pass, n) = check_witness(m, w);
                results.push((mv, format!("side {}", w.witness.side), pass, n));
            }
            EntryPayload::Pair { x, y } => {
                for w in [x, y] {
                    let (pass, n) = check_witness(m, w);
                    results.push((mv, format!("side {}", w.witness.side), pass, n));
                }
            }
        }
    }
    DatasetSummary { results }
}

fn check_witness(m: Modulus, stored: &StoredWitness) -> (bool, usize) {
    let Ok(specs) = derive_spec(m) else {
        return (false, 1);
    };
    let Some(spec) = specs.for_side(stored.witness.side) else {
        return (false, 1);
    };
    let report = verify_witness(spec, &stored.witness);
    let bold_ok = stored.bold == spec.required;
    (report.pass() && bold_ok, report.violations.len() + usize::from(!bold_ok))
}

/// `|S|` of the stored witness for `(m, side)`, used by the search engine
/// to try the empirically feasible cardinality first.
pub fn stored_cardinality(m: Modulus, side: Side) -> Option<u32> {
    let entry = entries().get(&m.m())?;
    entry.witness(side).map(|w| w.witness.s.len() as u32)
}

// ---------------------------------------------------------------------------
// Parsing

fn parse_all() -> Result<BTreeMap<u32, AppendixEntry>, DatasetError> {
    let mut map = BTreeMap::new();
    let m5 = Modulus::new(5).unwrap();
    map.insert(
        5,
        AppendixEntry {
            m: m5,
            provenance: Provenance::Lemma4,
            payload: EntryPayload::Decomposition(parse_lemma4(LEMMA4, m5)?),
        },
    );
    for block in split_entries(APPENDIX_A) {
        let (m, sides) = parse_entry(&block)?;
        let side = if m.m() == 11 { Side::X } else { Side::Y };
        let raw = sides
            .into_iter()
            .next()
            .ok_or_else(|| DatasetError::Parse(format!("m={} has no body", m.m())))?
            .1;
        let stored = finish_witness(m, side, raw)?;
        map.insert(
            m.m(),
            AppendixEntry { m, provenance: Provenance::AppendixA, payload: EntryPayload::Single(stored) },
        );
    }
    for block in split_entries(APPENDIX_B) {
        let (m, mut sides) = parse_entry(&block)?;
        if sides.len() != 2 {
            return Err(DatasetError::Parse(format!("m={} needs X and Y blocks", m.m())));
        }
        let y = sides.pop().unwrap();
        let x = sides.pop().unwrap();
        if x.0 != Some(Side::X) || y.0 != Some(Side::Y) {
            return Err(DatasetError::Parse(format!("m={} sides out of order", m.m())));
        }
        let x = finish_witness(m, Side::X, x.1)?;
        let y = finish_witness(m, Side::Y, y.1)?;
        map.insert(
            m.m(),
            AppendixEntry {
                m,
                provenance: Provenance::AppendixB,
                payload: EntryPayload::Pair { x, y },
            },
        );
    }
    Ok(map)
}

/// One side's raw parse: S with stars, paths and cycles in file order,
/// explicit partition cells.
#[derive(Default)]
struct RawSide {
    s: BTreeSet<u32>,
    bold: BTreeSet<u32>,
    paths: Vec<Vec<u32>>,
    cycles: Vec<Vec<u32>>,
    quads: Vec<(u32, u32)>,
    explicit_singletons: Vec<u32>,
}

fn split_entries(text: &str) -> Vec<Vec<String>> {
    let mut blocks: Vec<Vec<String>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("m =") || line.starts_with("m=") {
            blocks.push(vec![line.to_string()]);
        } else if let Some(last) = blocks.last_mut() {
            last.push(line.to_string());
        }
    }
    blocks
}

type SideBlocks = Vec<(Option<Side>, RawSide)>;

fn parse_entry(lines: &[String]) -> Result<(Modulus, SideBlocks), DatasetError> {
    let err = |s: &str| DatasetError::Parse(s.to_string());
    let head = lines.first().ok_or_else(|| err("empty entry"))?;
    let mv: u32 = head
        .split('=')
        .nth(1)
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| err("bad m line"))?;
    let m = Modulus::new(mv).map_err(|e| DatasetError::Parse(e.to_string()))?;
    let mut sides: SideBlocks = Vec::new();
    let mut current: Option<(Option<Side>, RawSide)> = None;
    for line in &lines[1..] {
        if let Some(side) = line.strip_prefix("side ") {
            if let Some(block) = current.take() {
                sides.push(block);
            }
            let side = match side.trim() {
                "X" => Side::X,
                "Y" => Side::Y,
                other => return Err(DatasetError::Parse(format!("bad side {other}"))),
            };
            current = Some((Some(side), RawSide::default()));
            continue;
        }
        let block = &mut current.get_or_insert_with(|| (None, RawSide::default())).1;
        if let Some(rest) = line.strip_prefix("S =") {
            for item in rest.trim().trim_matches(['{', '}']).split(',') {
                let item = item.trim();
                let (bold, digits) = match item.strip_prefix('*') {
                    Some(d) => (true, d),
                    None => (false, item),
                };
                let d: u32 = digits
                    .trim()
                    .parse()
                    .map_err(|_| DatasetError::Parse(format!("bad S element `{item}`")))?;
                block.s.insert(d);
                if bold {
                    block.bold.insert(d);
                }
            }
        } else if let Some(rest) = line.strip_prefix("Partition contains:") {
            parse_partition_cells(rest, block)?;
        } else if line.starts_with('Q') || line.starts_with('C') {
            let seq = parse_sequence(line)?;
            if line.starts_with('Q') {
                block.paths.push(seq);
            } else {
                // drop the repeated terminal vertex
                let mut seq = seq;
                if seq.len() < 2 || seq.first() != seq.last() {
                    return Err(DatasetError::Parse(format!("unclosed cycle in `{line}`")));
                }
                seq.pop();
                block.cycles.push(seq);
            }
        } else {
            return Err(DatasetError::Parse(format!("unrecognized line `{line}`")));
        }
    }
    if let Some(block) = current.take() {
        sides.push(block);
    }
    Ok((m, sides))
}

fn parse_sequence(line: &str) -> Result<Vec<u32>, DatasetError> {
    let inner = line
        .split_once('(')
        .and_then(|(_, rest)| rest.rsplit_once(')'))
        .map(|(nums, _)| nums)
        .ok_or_else(|| DatasetError::Parse(format!("bad sequence `{line}`")))?;
    inner
        .split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| DatasetError::Parse(format!("bad number in `{line}`")))
        })
        .collect()
}

fn parse_partition_cells(rest: &str, block: &mut RawSide) -> Result<(), DatasetError> {
    for cell in rest.split('}') {
        let cell = cell.trim().trim_start_matches(',').trim().trim_start_matches('{').trim();
        if cell.is_empty() {
            continue;
        }
        let nums: Vec<u32> = cell
            .split(',')
            .map(|t| {
                t.trim()
                    .trim_start_matches('±')
                    .parse()
                    .map_err(|_| DatasetError::Parse(format!("bad cell `{cell}`")))
            })
            .collect::<Result<_, _>>()?;
        if cell.contains('±') {
            let [a, b] = nums[..] else {
                return Err(DatasetError::Parse(format!("quad cell `{cell}` needs two values")));
            };
            block.quads.push((a, b));
        } else {
            block.explicit_singletons.extend(nums);
        }
    }
    Ok(())
}

/// Turn a raw side block into a witness: align paths with the condition
/// system's required endpoints, resolve q from the free-length slot, and
/// complete the partition with implicit singletons.
fn finish_witness(m: Modulus, side: Side, raw: RawSide) -> Result<StoredWitness, DatasetError> {
    let specs = derive_spec(m).map_err(|e| DatasetError::Parse(e.to_string()))?;
    let spec = specs
        .for_side(side)
        .ok_or_else(|| DatasetError::Parse(format!("no conditions for m={} {side}", m.m())))?;

    let mut paths: Vec<WitnessPath> = Vec::new();
    let mut remaining: Vec<Vec<u32>> = raw.paths;
    for req in &spec.required_paths {
        let pos = remaining
            .iter()
            .position(|p| p.first() == Some(&req.source) && p.last() == Some(&req.target))
            .ok_or_else(|| {
                DatasetError::Parse(format!(
                    "m={} {side}: no stored ({},{})-path",
                    m.m(),
                    req.source,
                    req.target
                ))
            })?;
        let vertices = remaining.remove(pos);
        paths.push(WitnessPath { from: req.source, to: req.target, vertices });
    }
    if !remaining.is_empty() {
        return Err(DatasetError::Parse(format!("m={} {side}: extra stored paths", m.m())));
    }

    let q = spec.q_range.and_then(|_| {
        spec.required_paths
            .iter()
            .zip(&paths)
            .find(|(req, _)| matches!(req.length, PathLen::FreeQ))
            .map(|(_, p)| p.len() as u32)
    });

    let mut partition = DifferencePartition::default();
    for &(a, b) in &raw.quads {
        partition.quads.insert(DifferencePartition::quad_key(m, a, b));
    }
    let quad_elems: BTreeSet<u32> = raw
        .quads
        .iter()
        .flat_map(|&(a, b)| [a, m.reduce(-(a as i64)), b, m.reduce(-(b as i64))])
        .collect();
    for d in 1..m.m() {
        if !raw.s.contains(&d) && !spec.forbidden.contains(&d) && !quad_elems.contains(&d) {
            partition.singletons.insert(d);
        }
    }
    for &d in &raw.explicit_singletons {
        if !partition.singletons.contains(&d) {
            return Err(DatasetError::Parse(format!(
                "m={} {side}: stored singleton {d} is not in the complement",
                m.m()
            )));
        }
    }

    Ok(StoredWitness {
        witness: Witness { m, side, s: raw.s, partition, paths, cycles: raw.cycles, q },
        bold: raw.bold,
    })
}

/// Parse the m=5 table; flat labels x0..x9 map to (X,0..4) then (Y,0..4).
fn parse_lemma4(text: &str, m: Modulus) -> Result<Decomposition, DatasetError> {
    let mut json_classes: Vec<Vec<Vec<String>>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let body = line
            .split_once('{')
            .and_then(|(_, rest)| rest.rsplit_once('}'))
            .map(|(b, _)| b)
            .ok_or_else(|| DatasetError::Parse(format!("bad class line `{line}`")))?;
        let mut class = Vec::new();
        for cyc in body.split(',') {
            let mut tokens: Vec<String> = Vec::new();
            for flat in cyc.split_whitespace() {
                let idx: u32 = flat
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| DatasetError::Parse(format!("bad label `{flat}`")))?;
                let token = if idx < m.m() {
                    format!("x{idx}")
                } else {
                    format!("y{}", idx - m.m())
                };
                tokens.push(token);
            }
            if tokens.len() < 2 || tokens.first() != tokens.last() {
                return Err(DatasetError::Parse(format!("unclosed cycle `{cyc}`")));
            }
            tokens.pop();
            class.push(tokens);
        }
        json_classes.push(class);
    }
    let doc = serde_json::json!({ "m": m.m(), "classes": json_classes });
    document::parse_decomposition(&doc.to_string())
        .map_err(|e| DatasetError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn load_covers_all_23_values() {
        for mv in (5..=49u32).step_by(2) {
            assert!(load(m(mv)).is_ok(), "m={mv}");
        }
        assert!(matches!(load(m(51)), Err(DatasetError::MissingM(51))));
    }

    #[test]
    fn load_23_has_expected_shape() {
        let entry = load(m(23)).unwrap();
        let w = entry.witness(Side::Y).unwrap();
        assert_eq!(w.witness.s, BTreeSet::from([1, 2, 15, 18]));
        assert_eq!(w.witness.paths[0].len(), 15);
    }

    #[test]
    fn load_39_has_both_sides() {
        let entry = load(m(39)).unwrap();
        let x = entry.witness(Side::X).unwrap();
        let y = entry.witness(Side::Y).unwrap();
        assert_eq!(x.witness.s, BTreeSet::from([13, 16, 24, 26]));
        assert_eq!(y.witness.s, BTreeSet::from([2, 7, 28, 34]));
    }

    #[test]
    fn lemma4_table_is_nine_classes() {
        let entry = load(m(5)).unwrap();
        let EntryPayload::Decomposition(d) = &entry.payload else {
            panic!("m=5 stores a decomposition");
        };
        assert_eq!(d.classes.len(), 9);
        let mm = m(5);
        // R_4 = { x_0 x_5 x_2 x_8 x_3, x_1 x_7 x_4 x_9 x_6 } under flat labels.
        let r4 = &d.classes[4];
        assert_eq!(
            r4.cycles[0].vertices(),
            &[mm.x(0), mm.y(0), mm.x(2), mm.y(3), mm.x(3)]
        );
        assert_eq!(
            r4.cycles[1].vertices(),
            &[mm.x(1), mm.y(2), mm.x(4), mm.y(4), mm.y(1)]
        );
    }

    #[test]
    fn manifest_counts() {
        let man = manifest();
        assert_eq!(man.len(), 23);
        let b_count = man.iter().filter(|(_, p, _)| *p == Provenance::AppendixB).count();
        assert_eq!(b_count, 7);
        let a_count = man.iter().filter(|(_, p, _)| *p == Provenance::AppendixA).count();
        assert_eq!(a_count, 15);
    }

    #[test]
    fn m11_witness_is_x_side() {
        let entry = load(m(11)).unwrap();
        assert_eq!(entry.sides(), vec![Side::X]);
    }

    #[test]
    fn m33_paths_align_with_conditions() {
        // The stored Q2/Q3 for m=33 are listed in swapped endpoint order;
        // alignment is by endpoints, so q comes out as 1.
        let entry = load(m(33)).unwrap();
        let y = entry.witness(Side::Y).unwrap();
        assert_eq!(y.witness.q, Some(1));
        assert_eq!(y.witness.paths[1].vertices, vec![10, 3]);
    }

    #[test]
    fn verify_all_passes_everywhere() {
        let summary = verify_all();
        assert_eq!(summary.entry_count(), 23);
        assert!(summary.all_pass(), "{summary}");
    }

    #[test]
    fn corrupting_one_digit_fails_with_locus() {
        let entry = load(m(23)).unwrap();
        let stored = entry.witness(Side::Y).unwrap();
        let mut corrupted = stored.witness.clone();
        corrupted.cycles[0][3] = (corrupted.cycles[0][3] + 1) % 23;
        let specs = derive_spec(m(23)).unwrap();
        let report = verify_witness(specs.y.as_ref().unwrap(), &corrupted);
        assert!(!report.pass());
        assert!(!report.violations.is_empty());
    }
}
