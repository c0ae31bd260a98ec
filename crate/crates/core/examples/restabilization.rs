//! Vacancy chains: a worker quits a stable matching and the vacated firms
//! work down their lists until the market settles again.
//!
//!     cargo run --example restabilization [seed]

use dynmatch::algorithms::enumerate_stable_set;
use dynmatch::generate::generate_market;
use dynmatch::instance::parse_instance;
use dynmatch::market::{is_stable, MarketInstance};
use dynmatch::restabilization::restabilize;

fn chains(name: &str, m: &MarketInstance) {
    println!("== {name}");
    for mu in enumerate_stable_set(m).unwrap().stable {
        for w in m.workers().filter(|&w| mu.worker_partner(w).is_some()) {
            print!("{} leaves {}: ", m.worker_name(w), m.display_matching(&mu));
            match restabilize(m, &mu, w) {
                Ok(out) => {
                    println!(
                        "settles at {} after waiting {} periods (stable: {})",
                        m.display_matching(&out.final_matching),
                        out.periods_waited,
                        is_stable(m, &out.final_matching)
                    );
                    for line in out.render(m).lines() {
                        println!("    {line}");
                    }
                }
                Err(e) => println!("{e}"),
            }
        }
    }
}

fn main() {
    chains("M2", &parse_instance(include_str!("../tests/data/m2.txt")).unwrap());
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(21);
    chains(&format!("random 4x4 market, seed {seed}"), &generate_market(seed, 4, 4));
}
