use rcd_core::model::{Modulus, Side};
use rcd_core::search::{search_witness, SearchBudget};
use rcd_core::witness::derive_spec;

fn main() {
    let budget = SearchBudget { max_nodes: None, max_millis: Some(600_000), seed: None };
    for (mv, side) in [(7u32, Side::Y), (9, Side::X), (9, Side::Y), (13, Side::Y), (11, Side::X), (15, Side::X), (15, Side::Y)] {
        let m = Modulus::new(mv).unwrap();
        let specs = derive_spec(m).unwrap();
        let spec = specs.for_side(side).unwrap();
        let t = std::time::Instant::now();
        let r = search_witness(spec, &budget);
        match r {
            Ok(w) => println!("m={mv} side {side}: S={:?} q={:?} in {:?}", w.s, w.q, t.elapsed()),
            Err(e) => println!("m={mv} side {side}: {e} in {:?}", t.elapsed()),
        }
    }
}
