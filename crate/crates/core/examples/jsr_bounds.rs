// Joint spectral radius bounds by enumerating all vertex products up to a
// given length. The bracket tightens with depth.
//
//     cargo run --release --example jsr_bounds [max_depth]

use cone_lpv::jsr::{bounds, JsrBounds};
use cone_lpv::PolytopicSystem;

const SYSTEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/switching_counterexample.json");

pub fn run_example(max_depth: usize) -> cone_lpv::Result<JsrBounds> {
    bounds(&PolytopicSystem::load(SYSTEM)?, max_depth)
}

fn main() -> cone_lpv::Result<()> {
    let depth = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(14);
    let b = run_example(depth)?;
    println!("{:>5} {:>10} {:>10}", "depth", "lower", "upper");
    for l in &b.levels {
        println!("{:>5} {:>10.6} {:>10.6}", l.depth, l.lower, l.upper);
    }
    let word: Vec<String> = b.witness_word.iter().map(|i| (i + 1).to_string()).collect();
    println!("JSR in [{:.6}, {:.6}], witness word {}", b.lower, b.upper, word.join(""));
    Ok(())
}
