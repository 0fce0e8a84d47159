//! `rcd` — construct, search, and certify resolvable directed m-cycle
//! decompositions of the complete symmetric digraph on 2m vertices.
//!
//! Exit codes: 0 success / verified; 1 verification FAIL; 2 bad input or
//! unsupported arguments; 3 internal self-check failure; 4 search budget
//! exhausted.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rcd_core::assembly::construct;
use rcd_core::circulant::QuadCache;
use rcd_core::dataset::{self, EntryPayload};
use rcd_core::document;
use rcd_core::model::{Modulus, Side};
use rcd_core::search::{search_witness, SearchBudget, SearchError};
use rcd_core::verifier::verify_decomposition;
use rcd_core::witness::derive_spec;

#[derive(Parser)]
#[command(name = "rcd", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the decomposition for one modulus and certify it before
    /// writing anything.
    Construct {
        /// Odd modulus m (5 ≤ m ≤ 49 with the embedded corpus).
        #[arg(short = 'm')]
        m: u32,
        /// Output path for the decomposition document (stdout if absent).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// On-disk cache for quad-cell decompositions.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Check a decomposition document and report every violation.
    Verify {
        input: PathBuf,
        /// Write a machine-readable verdict document here.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Search for a fresh witness for one side of one modulus.
    Search {
        #[arg(short = 'm')]
        m: u32,
        /// Witness side; defaults to the only side the branch needs.
        #[arg(long, value_parser = ["X", "Y"])]
        side: Option<String>,
        #[arg(long, default_value_t = 600)]
        budget_seconds: u64,
        #[arg(long)]
        budget_nodes: Option<u64>,
        /// Shuffles candidate-set order deterministically.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path for the witness document (stdout if absent).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Inspect or certify the embedded witness corpus.
    Appendix {
        #[command(subcommand)]
        cmd: AppendixCmd,
    },
}

#[derive(Subcommand)]
enum AppendixCmd {
    /// Certify every stored entry against its condition system.
    VerifyAll,
    /// Print one stored entry.
    Show { m: u32 },
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Construct { m, output, cache } => cmd_construct(m, output, cache),
        Cmd::Verify { input, output } => cmd_verify(input, output),
        Cmd::Search { m, side, budget_seconds, budget_nodes, seed, output } => {
            cmd_search(m, side, budget_seconds, budget_nodes, seed, output)
        }
        Cmd::Appendix { cmd: AppendixCmd::VerifyAll } => cmd_appendix_verify_all(),
        Cmd::Appendix { cmd: AppendixCmd::Show { m } } => cmd_appendix_show(m),
    }
}

fn parse_modulus(m: u32) -> Result<Modulus, ExitCode> {
    Modulus::new(m).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn cmd_construct(m: u32, output: Option<PathBuf>, cache: Option<PathBuf>) -> ExitCode {
    let m = match parse_modulus(m) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let cache = match cache {
        Some(path) => QuadCache::open(path),
        None => QuadCache::in_memory(),
    };
    let d = match construct(m, &cache) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // Never emit an uncertified decomposition.
    let report = verify_decomposition(&d);
    if !report.pass() {
        eprint!("internal verification failure:\n{report}");
        return ExitCode::from(3);
    }
    let text = document::serialize_decomposition(&d);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("construct: m={} classes={} verified=PASS -> {}", m.m(), d.classes.len(), path.display());
        }
        None => println!("{text}"),
    }
    ExitCode::SUCCESS
}

fn cmd_verify(input: PathBuf, output: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(&input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return ExitCode::from(2);
        }
    };
    let d = match document::parse_decomposition(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("parse error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = verify_decomposition(&d);
    for v in &report.violations {
        println!("violation: {v}");
    }
    let verdict = if report.pass() { "PASS" } else { "FAIL" };
    println!("RESULT: {verdict} ({} classes, {} violations)", d.classes.len(), report.violations.len());
    if let Some(path) = output {
        let doc = serde_json::json!({
            "m": d.modulus.m(),
            "pass": report.pass(),
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        if let Err(e) = std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_search(
    m: u32,
    side: Option<String>,
    budget_seconds: u64,
    budget_nodes: Option<u64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
) -> ExitCode {
    let m = match parse_modulus(m) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let specs = match derive_spec(m) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let side = match side.as_deref() {
        Some("X") => Side::X,
        Some("Y") => Side::Y,
        Some(_) => unreachable!("clap validates"),
        None => match (&specs.x, &specs.y) {
            (Some(_), None) => Side::X,
            (None, Some(_)) => Side::Y,
            _ => {
                eprintln!("error: m={} has witnesses on both sides; pass --side", m.m());
                return ExitCode::from(2);
            }
        },
    };
    let Some(spec) = specs.for_side(side) else {
        eprintln!("error: no condition system for m={} on side {side}", m.m());
        return ExitCode::from(2);
    };
    let budget = SearchBudget {
        max_nodes: budget_nodes,
        max_millis: Some(budget_seconds.saturating_mul(1000)),
        seed,
    };
    match search_witness(spec, &budget) {
        Ok(w) => {
            let text = document::serialize_witness(&w);
            match output {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    println!(
                        "search: m={} side={side} |S|={} cycles={} verified=PASS -> {}",
                        m.m(),
                        w.s.len(),
                        w.cycles.len(),
                        path.display()
                    );
                }
                None => println!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(SearchError::Exhausted { nodes }) => {
            eprintln!("search exhausted after {nodes} nodes");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_appendix_verify_all() -> ExitCode {
    let summary = dataset::verify_all();
    print!("{summary}");
    if summary.all_pass() {
        println!("appendix: {} entries, all PASS", summary.entry_count());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_appendix_show(m: u32) -> ExitCode {
    let m = match parse_modulus(m) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let entry = match dataset::load(m) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("m={} appendix={}", m.m(), entry.provenance);
    match &entry.payload {
        EntryPayload::Decomposition(d) => {
            print!("{}", document::serialize_decomposition(d));
        }
        EntryPayload::Single(w) => print_witness(&w.witness),
        EntryPayload::Pair { x, y } => {
            print_witness(&x.witness);
            print_witness(&y.witness);
        }
    }
    ExitCode::SUCCESS
}

fn print_witness(w: &rcd_core::witness::Witness) {
    println!("side {}", w.side);
    println!("  S = {:?}", w.s);
    for p in &w.paths {
        println!("  path {} -> {} (length {}): {:?}", p.from, p.to, p.len(), p.vertices);
    }
    for (i, c) in w.cycles.iter().enumerate() {
        println!("  cycle {}: {:?}", i + 1, c);
    }
    if !w.partition.quads.is_empty() {
        println!("  partition quads: {:?}", w.partition.quads);
    }
    println!("  partition singletons: {:?}", w.partition.singletons);
    if let Some(q) = w.q {
        println!("  q = {q}");
    }
}
