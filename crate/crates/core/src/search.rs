//! Witness search: regenerate (and extend) the stored computational
//! results from scratch.
//!
//! The engine enumerates candidate connection sets S — required differences
//! in, forbidden ones out, complement partitionable — and for each solves
//! the constrained covering problem: partition the arcs of the adjusted
//! circulant into directed Hamiltonian cycles plus the required
//! vertex-disjoint paths. Exact out/in-degree balance pins down which
//! vertices can host path arcs, which prunes most candidates before any
//! backtracking. The emitted witness is re-certified by the verifier, so
//! the search can never emit anything the checker would not accept.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circulant::DifferencePartition;
use crate::dataset;
use crate::model::Modulus;
use crate::verifier::verify_witness;
use crate::witness::{find_complement_partition, ConditionSpec, Witness, WitnessPath};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search exhausted after {nodes} nodes")]
    Exhausted { nodes: u64 },
    #[error("spec admits no candidate S at all")]
    NoCandidates,
    #[error("internal: found cover failed verification:\n{0}")]
    NotVerifierClosed(String),
    #[error("modulus {0} too large for this engine")]
    TooLarge(u32),
}

/// Node and wall-clock limits plus the S-enumeration shuffle seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_millis: Option<u64>,
    /// None: candidate sets in lexicographic order. Some: deterministic
    /// shuffle within each cardinality.
    pub seed: Option<u64>,
}

struct Budget {
    start: Instant,
    max_nodes: u64,
    max_millis: u64,
    nodes: u64,
}

impl Budget {
    fn new(b: &SearchBudget) -> Self {
        Budget {
            start: Instant::now(),
            max_nodes: b.max_nodes.unwrap_or(u64::MAX),
            max_millis: b.max_millis.unwrap_or(u64::MAX),
            nodes: 0,
        }
    }

    /// Charge one node; false once the budget is gone.
    #[inline]
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return false;
        }
        if self.nodes % 4096 == 0 && self.start.elapsed().as_millis() as u64 > self.max_millis {
            return false;
        }
        true
    }

    fn spent(&self) -> bool {
        self.nodes > self.max_nodes
            || (self.max_millis != u64::MAX
                && self.start.elapsed().as_millis() as u64 > self.max_millis)
    }
}

/// Outcome of the covering solver for one concrete (S, q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverResult {
    Found { paths: Vec<Vec<u32>>, cycles: Vec<Vec<u32>> },
    Infeasible,
    Exhausted,
}

/// Search for a witness satisfying `spec` within `budget`.
///
/// Candidate S sets are tried smallest-feasible-cardinality first, except
/// that the stored corpus cardinality for this (m, side) — the empirically
/// feasible region — is promoted to the front. The free parameter q, when
/// present, iterates outermost. First verified witness wins.
pub fn search_witness(spec: &ConditionSpec, budget: &SearchBudget) -> Result<Witness, SearchError> {
    let m = spec.m;
    if m.m() > 63 {
        return Err(SearchError::TooLarge(m.m()));
    }
    let mut tracker = Budget::new(budget);

    let free: Vec<u32> = (1..m.m())
        .filter(|d| !spec.forbidden.contains(d) && !spec.required.contains(d))
        .collect();
    let min_card = spec.required.len() as u32;
    let max_card = min_card + free.len() as u32;
    let mut cards: Vec<u32> = Vec::new();
    if let Some(hint) = dataset::stored_cardinality(m, spec.side) {
        if hint >= min_card && hint <= max_card {
            cards.push(hint);
        }
    }
    for c in min_card..=max_card {
        if !cards.contains(&c) {
            cards.push(c);
        }
    }

    let qs: Vec<Option<u32>> = match spec.q_range {
        Some((lo, hi)) => (lo..=hi).map(Some).collect(),
        None => vec![None],
    };

    let mut any_candidate = false;
    for &q in &qs {
        for &card in &cards {
            if spec.cycle_count(card, q).is_none() {
                continue;
            }
            let mut candidates: Vec<BTreeSet<u32>> = combinations(&free, (card - min_card) as usize)
                .into_iter()
                .map(|extra| spec.required.union(&extra.into_iter().collect()).copied().collect())
                .collect();
            if let Some(seed) = budget.seed {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                candidates.shuffle(&mut rng);
            }
            for s in candidates {
                any_candidate = true;
                let Some(partition) = partition_for(m, spec, &s) else {
                    continue; // infeasible S, skipped silently
                };
                match solve_cover(spec, &s, q, &mut tracker) {
                    CoverResult::Found { paths, cycles } => {
                        let witness = Witness {
                            m,
                            side: spec.side,
                            s,
                            partition,
                            paths: spec
                                .required_paths
                                .iter()
                                .zip(paths)
                                .map(|(req, vertices)| WitnessPath {
                                    from: req.source,
                                    to: req.target,
                                    vertices,
                                })
                                .collect(),
                            cycles,
                            q,
                        };
                        let report = verify_witness(spec, &witness);
                        if !report.pass() {
                            return Err(SearchError::NotVerifierClosed(report.to_string()));
                        }
                        return Ok(witness);
                    }
                    CoverResult::Infeasible => {}
                    CoverResult::Exhausted => {
                        return Err(SearchError::Exhausted { nodes: tracker.nodes })
                    }
                }
                if tracker.spent() {
                    return Err(SearchError::Exhausted { nodes: tracker.nodes });
                }
            }
        }
    }
    if any_candidate {
        Err(SearchError::Exhausted { nodes: tracker.nodes })
    } else {
        Err(SearchError::NoCandidates)
    }
}

/// The complement partition certifying condition 3 for this S, if any.
fn partition_for(
    m: Modulus,
    spec: &ConditionSpec,
    s: &BTreeSet<u32>,
) -> Option<DifferencePartition> {
    let complement: BTreeSet<u32> = (1..m.m())
        .filter(|d| !s.contains(d) && !spec.forbidden.contains(d))
        .collect();
    let target = crate::circulant::DifferenceSet::new(m, complement).ok()?;
    find_complement_partition(m, &target)
}

fn combinations(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(pool: &[u32], k: usize, from: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let needed = k - current.len();
        for i in from..=pool.len().saturating_sub(needed) {
            current.push(pool[i]);
            rec(pool, k, i + 1, current, out);
            current.pop();
        }
    }
    if k <= pool.len() {
        rec(pool, k, 0, &mut current, &mut out);
    }
    out
}

/// Solve the covering problem for one concrete candidate: place the
/// required paths, then peel off Hamiltonian cycles. Public so that the
/// brute-force oracle in the test suite can be compared per candidate.
pub fn solve_cover_for_candidate(
    spec: &ConditionSpec,
    s: &BTreeSet<u32>,
    q: Option<u32>,
    budget: &SearchBudget,
) -> CoverResult {
    let mut tracker = Budget::new(budget);
    solve_cover(spec, s, q, &mut tracker)
}

fn solve_cover(
    spec: &ConditionSpec,
    s: &BTreeSet<u32>,
    q: Option<u32>,
    tracker: &mut Budget,
) -> CoverResult {
    let m = spec.m;
    let mv = m.m() as usize;
    let Some(cycle_count) = spec.cycle_count(s.len() as u32, q) else {
        return CoverResult::Infeasible;
    };

    // Arc set of C(m;S) - removed + added, as out-neighbour masks.
    let mut out = vec![0u64; mv];
    for &d in s {
        for v in 0..mv {
            out[v] |= 1u64 << ((v + d as usize) % mv);
        }
    }
    for &(t, h) in &spec.removed {
        out[t as usize] &= !(1u64 << h);
    }
    for &(t, h) in &spec.added {
        out[t as usize] |= 1u64 << h;
    }

    // Exact degree balance: a vertex hosts a path out-arc iff its
    // out-degree exceeds the cycle count by one, and likewise for in.
    let mut path_out = 0u64;
    let mut path_in = 0u64;
    let mut in_deg = vec![0u32; mv];
    for v in 0..mv {
        let deg = out[v].count_ones();
        match deg as i64 - cycle_count as i64 {
            0 => {}
            1 => path_out |= 1u64 << v,
            _ => return CoverResult::Infeasible,
        }
        let mut heads = out[v];
        while heads != 0 {
            let h = heads.trailing_zeros();
            heads &= heads - 1;
            in_deg[h as usize] += 1;
        }
    }
    for (v, &deg) in in_deg.iter().enumerate() {
        match deg as i64 - cycle_count as i64 {
            0 => {}
            1 => path_in |= 1u64 << v,
            _ => return CoverResult::Infeasible,
        }
    }
    // Endpoint pattern must match the required paths exactly.
    let mut want_out = 0u64;
    let mut want_in = 0u64;
    let mut lengths = Vec::with_capacity(spec.required_paths.len());
    for req in &spec.required_paths {
        let Some(len) = req.length.resolve(q) else {
            return CoverResult::Infeasible;
        };
        if len == 0 {
            return CoverResult::Infeasible;
        }
        lengths.push(len);
        want_out |= 1u64 << req.source;
        want_in |= 1u64 << req.target;
    }
    // Sources leave, targets enter, internals do both.
    if path_out & !path_in != want_out & !want_in || path_in & !path_out != want_in & !want_out {
        return CoverResult::Infeasible;
    }
    let total_len: u32 = lengths.iter().sum();
    if path_out.count_ones() != total_len || path_in.count_ones() != total_len {
        return CoverResult::Infeasible;
    }

    let mut solver = CoverSolver {
        m: mv as u32,
        out,
        used_out: vec![0u64; mv],
        path_vertices: 0,
        path_out,
        path_in,
        cycle_count,
        paths: Vec::new(),
        cycles: Vec::new(),
        exhausted: false,
    };
    let reqs: Vec<(u32, u32, u32)> = spec
        .required_paths
        .iter()
        .zip(&lengths)
        .map(|(r, &len)| (r.source, r.target, len))
        .collect();
    if solver.place_paths(0, &reqs, tracker) {
        CoverResult::Found { paths: solver.paths, cycles: solver.cycles }
    } else if solver.exhausted {
        CoverResult::Exhausted
    } else {
        CoverResult::Infeasible
    }
}

struct CoverSolver {
    m: u32,
    /// Present arcs, by tail.
    out: Vec<u64>,
    /// Arcs consumed so far (paths and finished cycles), by tail.
    used_out: Vec<u64>,
    /// Vertices owned by some placed path.
    path_vertices: u64,
    /// Vertices that must host a path out-arc / in-arc.
    path_out: u64,
    path_in: u64,
    cycle_count: u32,
    paths: Vec<Vec<u32>>,
    cycles: Vec<Vec<u32>>,
    exhausted: bool,
}

impl CoverSolver {
    #[inline]
    fn free_heads(&self, v: u32) -> u64 {
        self.out[v as usize] & !self.used_out[v as usize]
    }

    fn place_paths(&mut self, idx: usize, reqs: &[(u32, u32, u32)], tracker: &mut Budget) -> bool {
        if idx == reqs.len() {
            return self.place_cycles(0, tracker);
        }
        let (source, target, len) = reqs[idx];
        if self.path_vertices & (1u64 << source) != 0 || self.path_vertices & (1u64 << target) != 0
        {
            return false;
        }
        self.path_vertices |= 1u64 << source;
        let mut path = vec![source];
        let ok = self.grow_path(idx, reqs, target, len, &mut path, tracker);
        self.path_vertices &= !(1u64 << source);
        ok
    }

    fn grow_path(
        &mut self,
        idx: usize,
        reqs: &[(u32, u32, u32)],
        target: u32,
        remaining: u32,
        path: &mut Vec<u32>,
        tracker: &mut Budget,
    ) -> bool {
        if !tracker.tick() {
            self.exhausted = true;
            return false;
        }
        let v = *path.last().unwrap();
        if remaining == 0 {
            self.paths.push(path.clone());
            if self.place_paths(idx + 1, reqs, tracker) {
                return true;
            }
            self.paths.pop();
            return false;
        }
        let mut heads = self.free_heads(v);
        while heads != 0 {
            let w = heads.trailing_zeros();
            heads &= heads - 1;
            let bit = 1u64 << w;
            if self.path_vertices & bit != 0 {
                continue;
            }
            if w == target {
                if remaining != 1 {
                    continue;
                }
            } else {
                // every internal vertex must be able to both enter and leave
                if remaining == 1 || self.path_out & bit == 0 || self.path_in & bit == 0 {
                    continue;
                }
            }
            self.used_out[v as usize] |= bit;
            self.path_vertices |= bit;
            path.push(w);
            if self.grow_path(idx, reqs, target, remaining - 1, path, tracker) {
                return true;
            }
            path.pop();
            self.path_vertices &= !bit;
            self.used_out[v as usize] &= !bit;
            if self.exhausted {
                return false;
            }
        }
        false
    }

    fn place_cycles(&mut self, done: u32, tracker: &mut Budget) -> bool {
        if done == self.cycle_count {
            return true;
        }
        // Remaining arcs at 0 are distinct across the remaining cycles;
        // order cycles by that out-arc so the first step is forced.
        let heads = self.free_heads(0);
        if heads == 0 {
            return false;
        }
        let w = heads.trailing_zeros();
        self.used_out[0] |= 1u64 << w;
        let mut cycle = vec![0u32, w];
        let visited = 1u64 | (1u64 << w);
        let ok = self.grow_cycle(done, w, visited, &mut cycle, tracker);
        if !ok {
            self.used_out[0] &= !(1u64 << w);
        }
        ok
    }

    fn grow_cycle(
        &mut self,
        done: u32,
        v: u32,
        visited: u64,
        cycle: &mut Vec<u32>,
        tracker: &mut Budget,
    ) -> bool {
        if !tracker.tick() {
            self.exhausted = true;
            return false;
        }
        if cycle.len() == self.m as usize {
            if self.free_heads(v) & 1 == 0 {
                return false;
            }
            self.used_out[v as usize] |= 1;
            self.cycles.push(cycle.clone());
            if self.place_cycles(done + 1, tracker) {
                return true;
            }
            self.cycles.pop();
            self.used_out[v as usize] &= !1u64;
            return false;
        }
        let mut heads = self.free_heads(v) & !visited;
        while heads != 0 {
            let w = heads.trailing_zeros();
            heads &= heads - 1;
            let bit = 1u64 << w;
            self.used_out[v as usize] |= bit;
            cycle.push(w);
            if self.cycle_feasible(w, visited | bit) && self.grow_cycle(done, w, visited | bit, cycle, tracker)
            {
                return true;
            }
            cycle.pop();
            self.used_out[v as usize] &= !bit;
            if self.exhausted {
                return false;
            }
        }
        false
    }

    /// Forward reachability from the head over unvisited vertices; cheap
    /// and sound.
    fn cycle_feasible(&self, head: u32, visited: u64) -> bool {
        let all = (1u64 << self.m) - 1;
        let unvisited = !visited & all;
        if unvisited == 0 {
            return true;
        }
        let mut reached = 0u64;
        let mut frontier = 1u64 << head;
        loop {
            let mut next = 0u64;
            while frontier != 0 {
                let v = frontier.trailing_zeros();
                frontier &= frontier - 1;
                let grow = self.free_heads(v) & unvisited & !reached;
                reached |= grow;
                next |= grow;
            }
            if next == 0 {
                break;
            }
            frontier = next;
        }
        reached & unvisited == unvisited
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::derive_spec;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn budget() -> SearchBudget {
        SearchBudget { max_nodes: Some(50_000_000), max_millis: Some(600_000), seed: None }
    }

    #[test]
    fn search_m7_finds_verified_witness() {
        let specs = derive_spec(m(7)).unwrap();
        let spec = specs.y.unwrap();
        let w = search_witness(&spec, &budget()).unwrap();
        assert!(verify_witness(&spec, &w).pass());
    }

    #[test]
    fn search_m9_both_sides() {
        let specs = derive_spec(m(9)).unwrap();
        for spec in [specs.x.unwrap(), specs.y.unwrap()] {
            let w = search_witness(&spec, &budget()).unwrap();
            assert!(verify_witness(&spec, &w).pass(), "side {}", spec.side);
        }
    }

    #[test]
    fn search_m11_x_side() {
        let specs = derive_spec(m(11)).unwrap();
        let spec = specs.x.unwrap();
        let w = search_witness(&spec, &budget()).unwrap();
        assert!(verify_witness(&spec, &w).pass());
    }

    #[test]
    fn search_is_deterministic_under_seed() {
        let specs = derive_spec(m(7)).unwrap();
        let spec = specs.y.unwrap();
        let b = SearchBudget { seed: Some(42), ..budget() };
        let w1 = search_witness(&spec, &b).unwrap();
        let w2 = search_witness(&spec, &b).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn starved_budget_reports_exhaustion() {
        let specs = derive_spec(m(7)).unwrap();
        let spec = specs.y.unwrap();
        let b = SearchBudget { max_nodes: Some(1), max_millis: None, seed: None };
        assert!(matches!(
            search_witness(&spec, &b),
            Err(SearchError::Exhausted { nodes: _ })
        ));
    }
}
