//! Directed circulants `C(m;S)` and their decompositions into directed
//! m-cycles.
//!
//! A connection set partitioned into singleton cells `{d}` with
//! `gcd(d,m) = 1` and quad cells `{±d_i, ±d_j}` with `gcd(d_i,d_j,m) = 1`
//! yields a decomposition of the circulant into directed Hamiltonian
//! cycles: one per singleton, four per quad. Singletons are immediate;
//! quads are solved by a deterministic backtracking search over difference
//! sequences, memoized in an on-disk cache keyed by `(m, d_i, d_j)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use thiserror::Error;

use crate::model::Modulus;

#[derive(Debug, Error)]
pub enum CirculantError {
    #[error("difference {d} is not coprime to {m}")]
    NotCoprime { d: u32, m: u32 },
    #[error("quad cell {{±{di}, ±{dj}}} is degenerate mod {m}")]
    DegenerateQuad { di: u32, dj: u32, m: u32 },
    #[error("quad cell {{±{di}, ±{dj}}} has gcd({di},{dj},{m}) > 1")]
    QuadGcd { di: u32, dj: u32, m: u32 },
    #[error("invalid partition: {0:?}")]
    InvalidPartition(Vec<PartitionViolation>),
    // Guaranteed solvable for valid cells, so exhaustion means a bug.
    #[error("internal: quad search exhausted for (m={m}, {di}, {dj})")]
    SearchExhausted { m: u32, di: u32, dj: u32 },
    #[error("removed arc ({0},{1}) is not a circulant arc")]
    RemovedNotPresent(u32, u32),
    #[error("added arc ({0},{1}) is already a circulant arc")]
    AddedAlreadyPresent(u32, u32),
}

pub fn gcd(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A set of nonzero residues `S ⊆ Z_m^*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceSet {
    m: Modulus,
    elems: BTreeSet<u32>,
}

impl DifferenceSet {
    pub fn new(m: Modulus, elems: impl IntoIterator<Item = u32>) -> Result<Self, CirculantError> {
        let mut set = BTreeSet::new();
        for d in elems {
            if d == 0 || d >= m.m() {
                return Err(CirculantError::NotCoprime { d, m: m.m() });
            }
            set.insert(d);
        }
        Ok(DifferenceSet { m, elems: set })
    }

    pub fn full(m: Modulus) -> Self {
        DifferenceSet { m, elems: (1..m.m()).collect() }
    }

    /// `Z_m^*` minus the given differences.
    pub fn full_without(m: Modulus, excluded: &BTreeSet<u32>) -> Self {
        DifferenceSet { m, elems: (1..m.m()).filter(|d| !excluded.contains(d)).collect() }
    }

    pub fn m(&self) -> Modulus {
        self.m
    }

    pub fn elems(&self) -> &BTreeSet<u32> {
        &self.elems
    }

    pub fn contains(&self, d: u32) -> bool {
        self.elems.contains(&d)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// `Z_m^*` minus this set minus `extra`.
    pub fn complement_without(&self, extra: &BTreeSet<u32>) -> DifferenceSet {
        let elems = (1..self.m.m())
            .filter(|d| !self.elems.contains(d) && !extra.contains(d))
            .collect();
        DifferenceSet { m: self.m, elems }
    }
}

/// A partition of a difference set into singleton cells `{d}` and quad
/// cells `{±d_i, ±d_j}`. Quads are stored as the pair of canonical
/// representatives `(a, b)` with `a < b` and each `≤ (m-1)/2`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DifferencePartition {
    pub singletons: BTreeSet<u32>,
    pub quads: BTreeSet<(u32, u32)>,
}

impl DifferencePartition {
    pub fn all_singletons(set: &DifferenceSet) -> Self {
        DifferencePartition { singletons: set.elems().clone(), quads: BTreeSet::new() }
    }

    /// Canonical representative of a quad cell: minimum of `d` and `m-d`
    /// per pair, ordered ascending.
    pub fn quad_key(m: Modulus, di: u32, dj: u32) -> (u32, u32) {
        let a = di.min(m.reduce(-(di as i64)));
        let b = dj.min(m.reduce(-(dj as i64)));
        (a.min(b), a.max(b))
    }

    /// Number of cycles a valid partition yields: one per singleton plus
    /// four per quad, i.e. one per covered difference.
    pub fn cycle_count(&self) -> usize {
        self.singletons.len() + 4 * self.quads.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    CellOverlap { d: u32 },
    NotCovered { d: u32 },
    OutsideSet { d: u32 },
    SingletonGcd { d: u32, g: u32 },
    QuadGcd { di: u32, dj: u32, g: u32 },
    DegenerateQuad { di: u32, dj: u32 },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::CellOverlap { d } => write!(f, "difference {d} covered twice"),
            PartitionViolation::NotCovered { d } => write!(f, "difference {d} not covered"),
            PartitionViolation::OutsideSet { d } => write!(f, "difference {d} outside target set"),
            PartitionViolation::SingletonGcd { d, g } => {
                write!(f, "singleton {{{d}}} has gcd {g} with m")
            }
            PartitionViolation::QuadGcd { di, dj, g } => {
                write!(f, "quad {{±{di},±{dj}}} has gcd({di},{dj},m) = {g}")
            }
            PartitionViolation::DegenerateQuad { di, dj } => {
                write!(f, "quad {{±{di},±{dj}}} has fewer than 4 distinct residues")
            }
        }
    }
}

/// Check that the cells of `p` are pairwise disjoint, cover `set` exactly,
/// and satisfy the gcd side conditions. Empty vector means OK.
pub fn validate_partition(
    m: Modulus,
    set: &DifferenceSet,
    p: &DifferencePartition,
) -> Vec<PartitionViolation> {
    let mut violations = Vec::new();
    let mut covered: HashMap<u32, u32> = HashMap::new();
    let mut cover = |d: u32, violations: &mut Vec<PartitionViolation>| {
        let c = covered.entry(d).or_insert(0);
        *c += 1;
        if *c == 2 {
            violations.push(PartitionViolation::CellOverlap { d });
        }
    };
    for &d in &p.singletons {
        let g = gcd(d, m.m());
        if g != 1 {
            violations.push(PartitionViolation::SingletonGcd { d, g });
        }
        cover(d, &mut violations);
    }
    for &(di, dj) in &p.quads {
        let cell: BTreeSet<u32> =
            [di, m.reduce(-(di as i64)), dj, m.reduce(-(dj as i64))].into_iter().collect();
        if cell.len() != 4 || cell.contains(&0) {
            violations.push(PartitionViolation::DegenerateQuad { di, dj });
        }
        let g = gcd(gcd(di, dj), m.m());
        if g != 1 {
            violations.push(PartitionViolation::QuadGcd { di, dj, g });
        }
        for d in cell {
            cover(d, &mut violations);
        }
    }
    for (&d, _) in covered.iter().filter(|(_, &c)| c >= 1) {
        if !set.contains(d) {
            violations.push(PartitionViolation::OutsideSet { d });
        }
    }
    for &d in set.elems() {
        if !covered.contains_key(&d) {
            violations.push(PartitionViolation::NotCovered { d });
        }
    }
    violations.sort_by_key(|v| format!("{v}"));
    violations
}

/// Arc set of the directed circulant `C(m;S)`: `(i, i+d)` for `i ∈ Z_m`,
/// `d ∈ S`.
pub fn circulant_arcs(m: Modulus, s: &DifferenceSet) -> BTreeSet<(u32, u32)> {
    let mut arcs = BTreeSet::new();
    for &d in s.elems() {
        for i in 0..m.m() {
            arcs.insert((i, m.reduce(i as i64 + d as i64)));
        }
    }
    arcs
}

/// A circulant with designated arcs removed and adjoined.
#[derive(Debug, Clone)]
pub struct CirculantTask {
    pub m: Modulus,
    pub s: DifferenceSet,
    pub removed: Vec<(u32, u32)>,
    pub added: Vec<(u32, u32)>,
}

impl CirculantTask {
    pub fn new(
        m: Modulus,
        s: DifferenceSet,
        removed: Vec<(u32, u32)>,
        added: Vec<(u32, u32)>,
    ) -> Result<Self, CirculantError> {
        let base = circulant_arcs(m, &s);
        for &(u, v) in &removed {
            if !base.contains(&(u, v)) {
                return Err(CirculantError::RemovedNotPresent(u, v));
            }
        }
        for &(u, v) in &added {
            if base.contains(&(u, v)) {
                return Err(CirculantError::AddedAlreadyPresent(u, v));
            }
        }
        Ok(CirculantTask { m, s, removed, added })
    }

    pub fn arcs(&self) -> BTreeSet<(u32, u32)> {
        let mut arcs = circulant_arcs(self.m, &self.s);
        for a in &self.removed {
            arcs.remove(a);
        }
        for &a in &self.added {
            arcs.insert(a);
        }
        arcs
    }
}

/// The cycle `(0, d, 2d, …, (m-1)d)`, which uses every arc of difference
/// `d` exactly once. Requires `gcd(d,m) = 1`.
pub fn singleton_cycle(m: Modulus, d: u32) -> Result<Vec<u32>, CirculantError> {
    if d == 0 || gcd(d, m.m()) != 1 {
        return Err(CirculantError::NotCoprime { d, m: m.m() });
    }
    let mut cycle = Vec::with_capacity(m.m() as usize);
    let mut v = 0u32;
    for _ in 0..m.m() {
        cycle.push(v);
        v = m.reduce(v as i64 + d as i64);
    }
    Ok(cycle)
}

/// On-disk memo for quad decompositions, one text record per key.
///
/// Records are appended whole, validated on load, and duplicate keys resolve
/// last-writer-wins, so concurrent writers cannot corrupt reads.
#[derive(Debug, Default)]
pub struct QuadCache {
    path: Option<PathBuf>,
    map: Mutex<HashMap<(u32, u32, u32), [Vec<u32>; 4]>>,
}

impl QuadCache {
    /// Purely in-memory memo.
    pub fn in_memory() -> Self {
        QuadCache::default()
    }

    /// Load (or start) a cache backed by the given file. Malformed or
    /// invalid records are skipped.
    pub fn open(path: PathBuf) -> Self {
        let mut map = HashMap::new();
        if let Ok(text) = std::fs::read_to_string(&path) {
            for line in text.lines() {
                if let Some((key, cycles)) = parse_cache_line(line) {
                    let m = Modulus::new(key.0);
                    if let Ok(m) = m {
                        if quad_cycles_are_valid(m, key.1, key.2, &cycles) {
                            map.insert(key, cycles);
                        }
                    }
                }
            }
        }
        QuadCache { path: Some(path), map: Mutex::new(map) }
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: (u32, u32, u32)) -> Option<[Vec<u32>; 4]> {
        self.map.lock().unwrap().get(&key).cloned()
    }

    fn insert(&self, key: (u32, u32, u32), cycles: [Vec<u32>; 4]) {
        if let Some(path) = &self.path {
            let mut line = format!("{} {} {} :", key.0, key.1, key.2);
            for c in &cycles {
                line.push_str(" |");
                for v in c {
                    line.push_str(&format!(" {v}"));
                }
            }
            line.push('\n');
            // One write call per record; a torn line is dropped on load.
            if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(path) {
                let _ = f.write_all(line.as_bytes());
            }
        }
        self.map.lock().unwrap().insert(key, cycles);
    }
}

fn parse_cache_line(line: &str) -> Option<((u32, u32, u32), [Vec<u32>; 4])> {
    let (head, tail) = line.split_once(':')?;
    let nums: Vec<u32> = head.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
    let [m, di, dj] = nums[..] else { return None };
    let mut cycles = Vec::new();
    for part in tail.split('|').skip(1) {
        let c: Vec<u32> =
            part.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
        cycles.push(c);
    }
    let cycles: [Vec<u32>; 4] = cycles.try_into().ok()?;
    Some(((m, di, dj), cycles))
}

/// Independent well-formedness check used when loading cached records: four
/// Hamiltonian cycles whose arcs partition the quad circulant exactly.
fn quad_cycles_are_valid(m: Modulus, di: u32, dj: u32, cycles: &[Vec<u32>; 4]) -> bool {
    let cell = match quad_cell(m, di, dj) {
        Ok(c) => c,
        Err(_) => return false,
    };
    let set = DifferenceSet::new(m, cell).unwrap();
    let mut remaining = circulant_arcs(m, &set);
    for c in cycles {
        if c.len() != m.m() as usize {
            return false;
        }
        let distinct: BTreeSet<u32> = c.iter().copied().collect();
        if distinct.len() != c.len() || c.iter().any(|&v| v >= m.m()) {
            return false;
        }
        for i in 0..c.len() {
            if !remaining.remove(&(c[i], c[(i + 1) % c.len()])) {
                return false;
            }
        }
    }
    remaining.is_empty()
}

/// The four distinct residues `{±d_i, ±d_j}`, ascending.
fn quad_cell(m: Modulus, di: u32, dj: u32) -> Result<[u32; 4], CirculantError> {
    let vals: BTreeSet<u32> = [
        m.reduce(di as i64),
        m.reduce(-(di as i64)),
        m.reduce(dj as i64),
        m.reduce(-(dj as i64)),
    ]
    .into_iter()
    .collect();
    if vals.contains(&0) || vals.len() != 4 {
        return Err(CirculantError::DegenerateQuad { di, dj, m: m.m() });
    }
    let mut out = [0u32; 4];
    for (slot, v) in out.iter_mut().zip(vals) {
        *slot = v;
    }
    Ok(out)
}

/// Decompose the circulant on the quad cell `{±d_i, ±d_j}` into four
/// directed Hamiltonian cycles whose arc sets partition it.
///
/// The search runs over difference sequences: a Hamiltonian cycle is a
/// length-m sequence over the cell with all partial sums distinct mod m,
/// and the four sequences must jointly use each (vertex, difference)
/// incidence exactly once. Differences are tried in ascending order and
/// the first cycle is rooted at vertex 0 with its first difference fixed
/// to the smallest cell element, which prunes the relabeling orbit without
/// losing completeness. First solution wins, so output is stable.
pub fn quad_decompose(
    m: Modulus,
    di: u32,
    dj: u32,
    cache: &QuadCache,
) -> Result<[Vec<u32>; 4], CirculantError> {
    let g = gcd(gcd(di, dj), m.m());
    if g != 1 {
        return Err(CirculantError::QuadGcd { di, dj, m: m.m() });
    }
    if m.m() > 63 {
        // the search uses 64-bit vertex masks
        return Err(CirculantError::SearchExhausted { m: m.m(), di, dj });
    }
    let cell = quad_cell(m, di, dj)?;
    let key = {
        let (a, b) = DifferencePartition::quad_key(m, di, dj);
        (m.m(), a, b)
    };
    if let Some(hit) = cache.get(key) {
        return Ok(hit);
    }

    let mut search = QuadSearch::new(m, cell);
    if !search.solve(0) {
        return Err(CirculantError::SearchExhausted { m: m.m(), di, dj });
    }
    let cycles: [Vec<u32>; 4] = search.cycles.try_into().expect("four cycles");
    debug_assert!(quad_cycles_are_valid(m, di, dj, &cycles));
    cache.insert(key, cycles.clone());
    Ok(cycles)
}

struct QuadSearch {
    m: u32,
    cell: [u32; 4],
    /// Backward steps: `back[t] = m - cell[t]`, so `u - cell[t] = u + back[t]`.
    back: [u32; 4],
    /// Bit t set: arc (v, v + cell[t]) already taken.
    used: Vec<u8>,
    visited: u64,
    cycles: Vec<Vec<u32>>,
}

impl QuadSearch {
    fn new(m: Modulus, cell: [u32; 4]) -> Self {
        // Fixed try order: differences sharing a factor with m first, then
        // by ascending residue. A coprime difference tried first yields the
        // pure single-difference cycle as the first cycle, whose residual
        // is near-undecomposable when the other pair generates a small
        // subgroup; leading with the non-coprime pair forces balanced
        // consumption and keeps the search shallow.
        let mut cell = cell;
        cell.sort_by_key(|&d| (gcd(d, m.m()) == 1, d));
        let mut back = [0u32; 4];
        for (b, &d) in back.iter_mut().zip(&cell) {
            *b = m.m() - d;
        }
        QuadSearch {
            m: m.m(),
            cell,
            back,
            used: vec![0u8; m.m() as usize],
            visited: 0,
            cycles: Vec::new(),
        }
    }

    fn solve(&mut self, cycle_idx: usize) -> bool {
        if cycle_idx == 4 {
            return true;
        }
        // Every Hamiltonian cycle passes through 0, and the four cycles use
        // distinct out-arcs there; ordering cycles by that out-difference
        // makes the first step forced.
        let first = (0..4).find(|&t| self.used[0] & (1 << t) == 0).expect("free difference at 0");
        let w = self.step(0, first);
        self.used[0] |= 1 << first;
        self.visited = (1 << 0) | (1u64 << w);
        let mut cycle = vec![0u32, w];
        let ok = self.grow(cycle_idx, w, &mut cycle);
        if !ok {
            self.visited = 0;
            self.used[0] &= !(1 << first);
        }
        ok
    }

    #[inline]
    fn step(&self, v: u32, t: usize) -> u32 {
        let s = v + self.cell[t];
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    fn step_back(&self, v: u32, t: usize) -> u32 {
        let s = v + self.back[t];
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    /// Every unvisited vertex must still be enterable (from an unvisited
    /// vertex or the current head), leavable (to an unvisited vertex or the
    /// root), and reachable from the head through unvisited vertices; the
    /// root must stay enterable. All sound, so the first solution in search
    /// order is unchanged by these prunes.
    fn feasible(&self, head: u32) -> bool {
        let all = (1u64 << self.m) - 1;
        let unvisited_mask = !self.visited & all;
        let mut unvisited = unvisited_mask;
        let enterable = |u: u32| -> bool {
            for t in 0..4 {
                let tail = self.step_back(u, t);
                if self.used[tail as usize] & (1 << t) != 0 {
                    continue;
                }
                if self.visited & (1 << tail) == 0 || tail == head {
                    return true;
                }
            }
            false
        };
        if !enterable(0) {
            return false;
        }
        while unvisited != 0 {
            let u = unvisited.trailing_zeros();
            unvisited &= unvisited - 1;
            if !enterable(u) {
                return false;
            }
            let mut out = false;
            for t in 0..4 {
                if self.used[u as usize] & (1 << t) != 0 {
                    continue;
                }
                let w = self.step(u, t);
                if self.visited & (1 << w) == 0 || w == 0 {
                    out = true;
                    break;
                }
            }
            if !out {
                return false;
            }
        }
        // Reachability: the rest of the cycle is a path from the head over
        // exactly the unvisited vertices back to the root, so every
        // unvisited vertex must be reachable from the head and must reach
        // the root, without touching visited ones.
        let mut reached = 0u64;
        let mut frontier = 1u64 << head;
        loop {
            let mut next = 0u64;
            while frontier != 0 {
                let v = frontier.trailing_zeros();
                frontier &= frontier - 1;
                for t in 0..4 {
                    if self.used[v as usize] & (1 << t) != 0 {
                        continue;
                    }
                    let w = self.step(v, t);
                    let bit = 1u64 << w;
                    if unvisited_mask & bit != 0 && reached & bit == 0 {
                        reached |= bit;
                        next |= bit;
                    }
                }
            }
            if next == 0 {
                break;
            }
            frontier = next;
        }
        if reached & unvisited_mask != unvisited_mask {
            return false;
        }
        // Reverse direction: walk arcs backwards from the root.
        let mut reached = 0u64;
        let mut frontier = 1u64 << 0;
        loop {
            let mut next = 0u64;
            while frontier != 0 {
                let v = frontier.trailing_zeros();
                frontier &= frontier - 1;
                for t in 0..4 {
                    let tail = self.step_back(v, t);
                    if self.used[tail as usize] & (1 << t) != 0 {
                        continue;
                    }
                    let bit = 1u64 << tail;
                    if unvisited_mask & bit != 0 && reached & bit == 0 {
                        reached |= bit;
                        next |= bit;
                    }
                }
            }
            if next == 0 {
                break;
            }
            frontier = next;
        }
        reached & unvisited_mask == unvisited_mask
    }

    fn grow(&mut self, cycle_idx: usize, v: u32, cycle: &mut Vec<u32>) -> bool {
        if cycle.len() == self.m as usize {
            // Close back to 0 if that incidence is still free.
            let need = self.m - v;
            let Some(t) = self.cell.iter().position(|&d| d == need) else {
                return false;
            };
            if self.used[v as usize] & (1 << t) != 0 {
                return false;
            }
            self.used[v as usize] |= 1 << t;
            self.cycles.push(cycle.clone());
            let saved = self.visited;
            self.visited = 0;
            if self.solve(cycle_idx + 1) {
                return true;
            }
            self.cycles.pop();
            self.visited = saved;
            self.used[v as usize] &= !(1 << t);
            return false;
        }
        for t in 0..4 {
            if self.used[v as usize] & (1 << t) != 0 {
                continue;
            }
            let w = self.step(v, t);
            if self.visited & (1u64 << w) != 0 {
                continue;
            }
            self.used[v as usize] |= 1 << t;
            self.visited |= 1u64 << w;
            cycle.push(w);
            if self.feasible(w) && self.grow(cycle_idx, w, cycle) {
                return true;
            }
            cycle.pop();
            self.visited &= !(1u64 << w);
            self.used[v as usize] &= !(1 << t);
        }
        false
    }
}

/// Decompose `C(m; ∪cells)` into directed m-cycles, one per covered
/// difference: singleton cells via [`singleton_cycle`], quad cells via
/// [`quad_decompose`]. Cells are processed in ascending order so the
/// output is deterministic.
pub fn decompose_circulant(
    m: Modulus,
    p: &DifferencePartition,
    cache: &QuadCache,
) -> Result<Vec<Vec<u32>>, CirculantError> {
    let covered: Vec<u32> = p
        .singletons
        .iter()
        .copied()
        .chain(p.quads.iter().flat_map(|&(a, b)| {
            [a, m.reduce(-(a as i64)), b, m.reduce(-(b as i64))]
        }))
        .collect();
    let set = DifferenceSet::new(m, covered)?;
    let violations = validate_partition(m, &set, p);
    if !violations.is_empty() {
        return Err(CirculantError::InvalidPartition(violations));
    }
    let mut cycles = Vec::with_capacity(p.cycle_count());
    for &d in &p.singletons {
        cycles.push(singleton_cycle(m, d)?);
    }
    for &(a, b) in &p.quads {
        cycles.extend(quad_decompose(m, a, b, cache)?);
    }
    Ok(cycles)
}
