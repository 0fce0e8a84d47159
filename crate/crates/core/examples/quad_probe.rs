use rcd_core::circulant::{quad_decompose, QuadCache};
use rcd_core::model::Modulus;

fn main() {
    // every quad cell used anywhere in the corpus or computed X-side partitions
    let cells: Vec<(u32, u32, u32)> = vec![
        (25,3,5),(25,6,10),(25,5,1),(25,10,3),
        (35,5,7),(35,10,14),(35,15,2),(35,15,1),
        (49,7,1),(49,14,3),(49,21,4),(49,14,2),(49,21,3),
        (15,3,5),(15,3,2),
        (21,6,7),(21,9,2),
        (27,6,1),(27,9,4),(27,12,7),(27,9,5),
        (33,3,1),(33,6,2),(33,9,4),(33,15,5),(33,3,11),(33,12,5),(33,15,8),
        (39,3,1),(39,6,2),(39,9,4),(39,12,5),(39,18,7),(39,3,13),(39,6,1),(39,12,8),(39,15,10),(39,18,14),
        (45,3,5),(45,9,10),(45,12,20),(45,15,1),(45,18,2),(45,21,8),(45,6,20),(45,9,1),(45,12,2),(45,15,4),(45,18,7),
    ];
    for (mv, a, b) in cells {
        let m = Modulus::new(mv).unwrap();
        let cache = QuadCache::in_memory();
        let t = std::time::Instant::now();
        let r = quad_decompose(m, a, b, &cache);
        println!("m={mv} ({a},{b}): {:?} in {:?}", r.is_ok(), t.elapsed());
    }
}
