//! Stable matchings of a small market: deferred acceptance from both sides
//! against the brute-force stable set.
//!
//!     cargo run --example stable_set [seed]

use dynmatch::algorithms::{
    check_single_agent_property, deferred_acceptance, enumerate_stable_set, ProposingSide,
};
use dynmatch::generate::generate_market;
use dynmatch::instance::parse_instance;
use dynmatch::market::{blocking_pairs, MarketInstance};

fn describe(name: &str, m: &MarketInstance) {
    println!("== {name}");
    let report = enumerate_stable_set(m).expect("small market");
    println!(
        "{} matchings, {} stable",
        report.all_matchings_count,
        report.stable.len()
    );
    for mu in &report.stable {
        println!("  {}", m.display_matching(mu));
    }
    let mu_f = deferred_acceptance(m, ProposingSide::Firms);
    let mu_w = deferred_acceptance(m, ProposingSide::Workers);
    println!("firms propose:   {}", m.display_matching(&mu_f));
    println!("workers propose: {}", m.display_matching(&mu_w));
    assert_eq!(mu_f, report.firm_optimal);
    assert_eq!(mu_w, report.worker_optimal);

    let empty = m.empty_matching();
    let blocks: Vec<String> = blocking_pairs(m, &empty)
        .into_iter()
        .map(|(f, w)| format!("({},{})", m.firm_name(f), m.worker_name(w)))
        .collect();
    println!("pairs blocking the empty matching: {}", blocks.join(" "));
    let single = check_single_agent_property(m).unwrap();
    println!("same agents single in every stable matching: {}", single.holds);
}

fn main() {
    let m2 = parse_instance(include_str!("../tests/data/m2.txt")).unwrap();
    describe("M2", &m2);

    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    describe(&format!("random 4x5 market, seed {seed}"), &generate_market(seed, 4, 5));
}
