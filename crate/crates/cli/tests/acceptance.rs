//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! 1. end-to-end construction and certification for every odd m in [5, 49]
//! 2. full corpus certification via the CLI
//! 3. parameter-table invariants and starred-set agreement
//! 4. leftover-structure dichotomy
//! 5. circulant decomposer properties, deployed cells plus random cells
//! 6. witness search reproduction at desk scale
//! 7. verifier mutation sensitivity

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcd_core::assembly::construct;
use rcd_core::circulant::{
    circulant_arcs, gcd, quad_decompose, singleton_cycle, DifferencePartition, DifferenceSet,
    QuadCache,
};
use rcd_core::dataset::{self, EntryPayload};
use rcd_core::document::{parse_decomposition, parse_witness};
use rcd_core::model::{Modulus, Side, Vertex};
use rcd_core::params::{params_nonzero, params_zero};
use rcd_core::rotation::{leftover_structure, LeftoverStructure};
use rcd_core::search::{search_witness, SearchBudget};
use rcd_core::verifier::{verify_decomposition, verify_raw_decomposition, verify_witness};
use rcd_core::witness::{derive_spec, find_complement_partition};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rcd"))
}

fn modulus(v: u32) -> Modulus {
    Modulus::new(v).unwrap()
}

fn all_m() -> impl Iterator<Item = u32> {
    (5..=49u32).step_by(2)
}

fn run_construct(m: u32, out: &Path, cache: &Path) {
    let status = bin()
        .args(["construct", "-m", &m.to_string(), "-o"])
        .arg(out)
        .arg("--cache")
        .arg(cache)
        .status()
        .expect("spawn rcd");
    assert!(status.success(), "construct -m {m} exited {status}");
}

/// Criterion 1: every odd m in [5, 49] constructs a decomposition that the
/// independent verifier certifies, with exactly 2m-1 classes of two
/// vertex-disjoint directed m-cycles covering all arcs exactly once. The
/// warm-cache pass over all 23 values stays under 60 seconds.
#[test]
fn criterion_1_end_to_end_theorem_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("quads.txt");
    let mut pass = |label: &str| -> Duration {
        let started = Instant::now();
        for m in all_m() {
            let out = dir.path().join(format!("d{m}.json"));
            run_construct(m, &out, &cache);
            let text = std::fs::read_to_string(&out).unwrap();
            let d = parse_decomposition(&text).unwrap();
            assert_eq!(d.modulus.m(), m);
            assert_eq!(d.classes.len() as u32, 2 * m - 1, "{label} m={m}");
            for class in &d.classes {
                assert_eq!(class.cycles.len(), 2, "{label} m={m}");
                for cycle in &class.cycles {
                    assert_eq!(cycle.len() as u32, m, "{label} m={m}");
                }
            }
            let report = verify_decomposition(&d);
            assert!(report.pass(), "{label} m={m}:\n{report}");
        }
        started.elapsed()
    };
    let cold = pass("cold");
    let warm = pass("warm");
    assert!(
        warm < Duration::from_secs(60),
        "warm-cache pass took {warm:?}, budget is 60s"
    );
    println!(
        "criterion 1: PASS — 23/23 moduli constructed and certified (cold {cold:?}, warm {warm:?})"
    );
}

/// Criterion 2: `appendix verify-all` certifies every stored entry — the
/// 15 single-witness values, the 7 two-witness values (both sides), and
/// the m=5 table — 100% PASS.
#[test]
fn criterion_2_appendix_fidelity() {
    let output = bin().args(["appendix", "verify-all"]).output().expect("spawn rcd");
    assert!(output.status.success(), "appendix verify-all exited {}", output.status);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("30/30 checks passed"), "{stdout}");
    assert!(stdout.contains("23 entries, all PASS"), "{stdout}");

    let summary = dataset::verify_all();
    assert!(summary.all_pass());
    assert_eq!(summary.entry_count(), 23);
    let a: Vec<u32> = dataset::manifest()
        .iter()
        .filter(|(_, p, _)| matches!(p, dataset::Provenance::AppendixA))
        .map(|(m, _, _)| *m)
        .collect();
    assert_eq!(a, vec![7, 11, 13, 17, 19, 23, 25, 29, 31, 35, 37, 41, 43, 47, 49]);
    let b: Vec<u32> = dataset::manifest()
        .iter()
        .filter(|(_, p, _)| matches!(p, dataset::Provenance::AppendixB))
        .map(|(m, _, _)| *m)
        .collect();
    assert_eq!(b, vec![9, 15, 21, 27, 33, 39, 45]);
    println!("criterion 2: PASS — 30/30 stored checks certified across 23 entries");
}

/// Criterion 3: parameter-table invariants hold and the computed linking
/// differences match the starred sets of the stored corpus on every side.
#[test]
fn criterion_3_parameter_table_invariants() {
    let mut checked_a = 0;
    for m in all_m().filter(|&m| m % 3 != 0 && m >= 7 && m != 11) {
        let mm = modulus(m);
        let p = params_nonzero(mm).unwrap();
        let k1 = mm.k() + 1;
        assert_eq!(gcd(p.d, m), 1, "m={m}");
        assert_eq!(p.r1 + p.r2, m - 2, "m={m}");
        assert!(p.d != k1 && p.d1y != k1 && p.d2y != k1, "m={m}");
        let bold = &dataset::load(mm).unwrap().witness(Side::Y).unwrap().bold;
        assert_eq!(bold, &BTreeSet::from([p.d1y, p.d2y]), "m={m}");
        checked_a += 1;
    }
    assert_eq!(checked_a, 14);

    let mut checked_b = 0;
    for m in all_m().filter(|&m| m % 3 == 0 && m >= 15) {
        let mm = modulus(m);
        let p = params_zero(mm).unwrap();
        assert_eq!(gcd(m, p.t1), 3, "m={m}");
        let entry = dataset::load(mm).unwrap();
        let bold_y = &entry.witness(Side::Y).unwrap().bold;
        assert_eq!(bold_y, &BTreeSet::from([p.d1y, p.d2y]), "m={m}");
        let bold_x = &entry.witness(Side::X).unwrap().bold;
        assert_eq!(bold_x, &BTreeSet::from([p.d1x, p.d2x]), "m={m}");
        checked_b += 1;
    }
    assert_eq!(checked_b, 6);
    println!(
        "criterion 3: PASS — {checked_a} single-witness and {checked_b} two-witness parameter sets match"
    );
}

/// Criterion 4: the traced leftover arcs form one 2m-cycle exactly when m
/// is not divisible by 3 and three 2m/3-cycles otherwise; the first traced
/// cycle at m=9 is (x_0, y_5, x_3, y_2, x_6, y_8) exactly.
#[test]
fn criterion_4_leftover_structure_dichotomy() {
    for m in all_m() {
        let mm = modulus(m);
        match leftover_structure(mm).unwrap() {
            LeftoverStructure::Single(c) => {
                assert_ne!(m % 3, 0, "m={m}");
                assert_eq!(c.len() as u32, 2 * m, "m={m}");
            }
            LeftoverStructure::Triple(cs) => {
                assert_eq!(m % 3, 0, "m={m}");
                for c in &cs {
                    assert_eq!(c.len() as u32, 2 * m / 3, "m={m}");
                }
            }
        }
    }
    let mm = modulus(9);
    let LeftoverStructure::Triple([c1, _, _]) = leftover_structure(mm).unwrap() else {
        panic!("m=9 leftover must form three cycles");
    };
    assert_eq!(
        c1.vertices(),
        &[mm.x(0), mm.y(5), mm.x(3), mm.y(2), mm.x(6), mm.y(8)]
    );
    println!("criterion 4: PASS — leftover dichotomy verified for 23 moduli, m=9 trace exact");
}

fn assert_cycles_partition_cell(
    m: Modulus,
    cell_elems: &BTreeSet<u32>,
    cycles: &[Vec<u32>],
    what: &str,
) {
    let set = DifferenceSet::new(m, cell_elems.iter().copied()).unwrap();
    let mut expected = circulant_arcs(m, &set);
    for c in cycles {
        assert_eq!(c.len(), m.m() as usize, "{what}: cycle not Hamiltonian");
        let distinct: BTreeSet<u32> = c.iter().copied().collect();
        assert_eq!(distinct.len(), c.len(), "{what}: repeated vertex");
        for i in 0..c.len() {
            let arc = (c[i], c[(i + 1) % c.len()]);
            assert!(expected.remove(&arc), "{what}: arc {arc:?} duplicated or foreign");
        }
    }
    assert!(expected.is_empty(), "{what}: {} arcs uncovered", expected.len());
}

/// Every partition cell the construction deploys for criteria 1 and 2.
fn deployed_partitions() -> Vec<(Modulus, DifferencePartition)> {
    let mut out = Vec::new();
    for m in all_m() {
        let mm = modulus(m);
        match &dataset::load(mm).unwrap().payload {
            EntryPayload::Decomposition(_) => {}
            EntryPayload::Single(w) => out.push((mm, w.witness.partition.clone())),
            EntryPayload::Pair { x, y } => {
                out.push((mm, x.witness.partition.clone()));
                out.push((mm, y.witness.partition.clone()));
            }
        }
        // left-side (and m=11 right-side) complements the assemblers derive
        if m % 3 != 0 && m >= 7 && m != 11 {
            let p = params_nonzero(mm).unwrap();
            let target = DifferenceSet::full_without(mm, &BTreeSet::from([mm.k() + 1, p.d]));
            out.push((mm, find_complement_partition(mm, &target).unwrap()));
        }
        if m == 11 {
            let target = DifferenceSet::full_without(mm, &BTreeSet::from([5, 6]));
            out.push((mm, find_complement_partition(mm, &target).unwrap()));
        }
    }
    out
}

/// Criterion 5: for every deployed partition cell the produced cycles are
/// Hamiltonian and partition the cell's arcs exactly; 50 random valid quad
/// cells with odd m ≤ 25 decompose likewise, all inside 5 minutes.
#[test]
fn criterion_5_circulant_decomposer_properties() {
    let started = Instant::now();
    let cache = QuadCache::in_memory();
    let mut cells = 0;
    for (m, partition) in deployed_partitions() {
        for &d in &partition.singletons {
            let c = singleton_cycle(m, d).unwrap();
            assert_cycles_partition_cell(
                m,
                &BTreeSet::from([d]),
                std::slice::from_ref(&c),
                &format!("m={} singleton {d}", m.m()),
            );
            cells += 1;
        }
        for &(a, b) in &partition.quads {
            let cycles = quad_decompose(m, a, b, &cache).unwrap();
            let elems =
                BTreeSet::from([a, m.reduce(-(a as i64)), b, m.reduce(-(b as i64))]);
            assert_cycles_partition_cell(
                m,
                &elems,
                &cycles,
                &format!("m={} quad ({a},{b})", m.m()),
            );
            cells += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(20250810);
    let mut random_checked = 0;
    while random_checked < 50 {
        let m = 2 * rng.gen_range(2..=12u32) + 1; // odd, 5..=25
        let mm = modulus(m);
        let di = rng.gen_range(1..m);
        let dj = rng.gen_range(1..m);
        let elems: BTreeSet<u32> =
            BTreeSet::from([di, mm.reduce(-(di as i64)), dj, mm.reduce(-(dj as i64))]);
        if elems.len() != 4 || gcd(gcd(di, dj), m) != 1 {
            continue;
        }
        let cycles = quad_decompose(mm, di, dj, &QuadCache::in_memory()).unwrap();
        assert_cycles_partition_cell(mm, &elems, &cycles, &format!("random m={m} ({di},{dj})"));
        random_checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5 minutes");
    println!(
        "criterion 5: PASS — {cells} deployed cells and {random_checked} random quad cells partition exactly ({elapsed:?})"
    );
}

/// Criterion 6: the search engine reproduces witnesses for m=7, both sides
/// of m=9, and m=13 through the CLI, each certified and inside 10 minutes.
#[test]
fn criterion_6_search_reproduction_at_desk_scale() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, u32, Option<&str>); 4] =
        [("w7", 7, None), ("w9x", 9, Some("X")), ("w9y", 9, Some("Y")), ("w13", 13, None)];
    for (name, m, side) in runs {
        let out = dir.path().join(format!("{name}.json"));
        let mut cmd = bin();
        cmd.args(["search", "-m", &m.to_string(), "--budget-seconds", "600", "-o"]).arg(&out);
        if let Some(side) = side {
            cmd.args(["--side", side]);
        }
        let started = Instant::now();
        let status = cmd.status().expect("spawn rcd");
        let elapsed = started.elapsed();
        assert!(status.success(), "search -m {m} side {side:?} exited {status}");
        assert!(elapsed < Duration::from_secs(600), "search -m {m} took {elapsed:?}");

        let w = parse_witness(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let specs = derive_spec(modulus(m)).unwrap();
        let spec = match side {
            Some("X") => specs.x.as_ref().unwrap(),
            Some("Y") => specs.y.as_ref().unwrap(),
            _ => specs.y.as_ref().or(specs.x.as_ref()).unwrap(),
            // m=7 and m=13 have only the Y-side system
        };
        let report = verify_witness(spec, &w);
        assert!(report.pass(), "m={m} side {side:?}:\n{report}");
    }
    println!("criterion 6: PASS — search reproduced certified witnesses for m=7, m=9 (X, Y), m=13");
}

enum Mutation {
    FlipArc,
    DeleteArc,
    DuplicateArc,
}

/// Apply one arc-level mutation to raw vertex sequences.
fn mutate(
    classes: &mut Vec<Vec<Vec<Vertex>>>,
    kind: &Mutation,
    rng: &mut ChaCha8Rng,
) -> (usize, usize, usize) {
    let ci = rng.gen_range(0..classes.len());
    let yi = rng.gen_range(0..classes[ci].len());
    let cycle = &mut classes[ci][yi];
    let n = cycle.len();
    match kind {
        Mutation::FlipArc => {
            // reverse the arc at pos by swapping its endpoints
            let pos = rng.gen_range(0..n);
            cycle.swap(pos, (pos + 1) % n);
            (ci, yi, pos)
        }
        Mutation::DeleteArc => {
            // drop the head of the arc at pos
            let pos = rng.gen_range(0..n);
            cycle.remove((pos + 1) % n);
            (ci, yi, pos)
        }
        Mutation::DuplicateArc => {
            // re-insert a copy of the arc at pos right behind itself
            let pos = rng.gen_range(0..n - 1);
            let (u, v) = (cycle[pos], cycle[pos + 1]);
            cycle.splice(pos + 2..pos + 2, [u, v]);
            (ci, yi, pos)
        }
    }
}

/// Criterion 7: for m in {5, 9, 15, 21}, 100 random single-arc mutations
/// of a certified decomposition each produce a verifier FAIL with a
/// non-empty violation list.
#[test]
fn criterion_7_mutation_sensitivity() {
    let cache = QuadCache::in_memory();
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut total = 0;
    for m in [5u32, 9, 15, 21] {
        let mm = modulus(m);
        let d = construct(mm, &cache).unwrap();
        assert!(verify_decomposition(&d).pass(), "m={m} baseline");
        let baseline: Vec<Vec<Vec<Vertex>>> = d
            .classes
            .iter()
            .map(|c| c.cycles.iter().map(|cy| cy.vertices().to_vec()).collect())
            .collect();
        for i in 0..100 {
            let kind = match i % 3 {
                0 => Mutation::FlipArc,
                1 => Mutation::DeleteArc,
                _ => Mutation::DuplicateArc,
            };
            let mut mutated = baseline.clone();
            let locus = mutate(&mut mutated, &kind, &mut rng);
            let report = verify_raw_decomposition(mm, &mutated);
            assert!(
                !report.pass() && !report.violations.is_empty(),
                "m={m} mutation {i} at {locus:?} was not detected"
            );
            total += 1;
        }
    }
    println!("criterion 7: PASS — {total}/400 single-arc mutations all detected");
}
