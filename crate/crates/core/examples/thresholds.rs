//! Discount thresholds on M2: the worker threshold at the firm-optimal
//! matching and the firm threshold at the worker-optimal one, with the
//! deviation payoffs on either side of each.
//!
//!     cargo run --example thresholds

use dynmatch::algorithms::{deferred_acceptance, ProposingSide};
use dynmatch::engine::big_to_f64;
use dynmatch::instance::parse_instance;
use dynmatch::market::{FirmId, WorkerId};
use dynmatch::restabilization::{big_from_ratio, firm_threshold, worker_threshold};
use dynmatch::verifier::{
    firm_wait_comparison, resign_and_wait_comparison, threshold_boundary_test, Side,
};

fn main() {
    let m = parse_instance(include_str!("../tests/data/m2.txt")).unwrap();
    let mu_f = deferred_acceptance(&m, ProposingSide::Firms);
    let mu_w = deferred_acceptance(&m, ProposingSide::Workers);

    let w1 = WorkerId(0);
    let c = worker_threshold(&m, &mu_f, w1).unwrap();
    println!("c^w1 at {} = {} ~ {:.5}", m.display_matching(&mu_f), c, c.value());
    println!("{:>6} {:>10} {:>10} profitable", "delta", "stay", "deviate");
    for k in (10..100).step_by(10) {
        let d = big_from_ratio(k, 100);
        let r = resign_and_wait_comparison(&m, &mu_f, w1, &d).unwrap();
        println!(
            "{:>6.2} {:>10.4} {:>10.4} {}",
            big_to_f64(&d),
            big_to_f64(&r.stay),
            big_to_f64(&r.deviate),
            r.profitable
        );
    }
    let b = threshold_boundary_test(&m, &mu_f, Side::Worker(w1), 1).unwrap();
    println!(
        "at {} profitable={}, at {} profitable={}",
        b.below, b.profitable_below, b.above, b.profitable_above
    );

    let f1 = FirmId(0);
    let c = firm_threshold(&m, &mu_w, f1).unwrap();
    println!("c^f1 at {} = {}", m.display_matching(&mu_w), c);
    for (num, t) in [(2, 3), (4, 3), (4, 1), (6, 1)] {
        let d = big_from_ratio(num, 10);
        let r = firm_wait_comparison(&m, &mu_w, f1, &d, t).unwrap();
        println!(
            "delta {} withhold in period {t}: stay {} deviate {} profitable {} agrees with c^f1 {}",
            d, r.comparison.stay, r.comparison.deviate, r.comparison.profitable, r.agrees
        );
    }
}
