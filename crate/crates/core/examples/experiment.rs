//! Runs the theorem suite over a seeded corpus of random markets and prints
//! the pass/fail matrix.
//!
//!     cargo run --release --example experiment [seed] [instances] [path|all]

use dynmatch::experiment::{run_experiment, ExperimentConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let mut config = ExperimentConfig::default();
    if let Some(seed) = args.next() {
        config.seed = seed.parse().expect("seed");
    }
    if let Some(n) = args.next() {
        config.instances = n.parse().expect("instance count");
    }
    if let Some(scope) = args.next() {
        config.scope = scope.parse().expect("scope");
    }
    let report = run_experiment(&config);
    print!("{}", report.render());
    if !report.all_passed() {
        std::process::exit(1);
    }
}
