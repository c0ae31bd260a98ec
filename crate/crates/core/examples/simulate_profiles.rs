//! Plays each canonical stationary profile on M2 and prints the period-by-
//! period trace with exact discounted payoffs, then replays one deviation.
//!
//!     cargo run --example simulate_profiles

use dynmatch::algorithms::{deferred_acceptance, ProposingSide};
use dynmatch::engine::{discounted_payoff, simulate, simulate_from, Deviation};
use dynmatch::instance::parse_instance;
use dynmatch::market::{CommitmentRegime, FirmId, WorkerId};
use dynmatch::strategies::{
    profile_firm_commit_flexible, profile_firm_commit_restrictive, profile_no_commitment,
    profile_worker_commit_flexible, profile_worker_commit_restrictive, FlexibleMode,
};

fn main() {
    let m = parse_instance(include_str!("../tests/data/m2.txt")).unwrap();
    let mu_w = deferred_acceptance(&m, ProposingSide::Workers);

    let profiles = [
        (CommitmentRegime::NoCommitment, profile_no_commitment(&m, &mu_w).unwrap()),
        (CommitmentRegime::FirmOnly, profile_firm_commit_restrictive(&m, &mu_w).unwrap()),
        (
            CommitmentRegime::FirmOnly,
            profile_firm_commit_flexible(&m, &mu_w, FlexibleMode::RejectedSet).unwrap(),
        ),
        (CommitmentRegime::WorkerOnly, profile_worker_commit_restrictive(&m, &mu_w).unwrap()),
        (CommitmentRegime::WorkerOnly, profile_worker_commit_flexible(&m, &mu_w).unwrap()),
    ];
    for (regime, profile) in &profiles {
        let trace = simulate(&m, *regime, profile, 20).unwrap();
        println!("== {} under {regime} commitment", profile.descriptor());
        print!("{}", trace.render(&m));
        let payoffs: Vec<String> = m
            .agents()
            .map(|a| format!("{}={}", m.agent_name(a), discounted_payoff(&m, &trace, a).value))
            .collect();
        println!("payoffs {}", payoffs.join(" "));
    }

    // f1 withholds its offer in period 1 under the restrictive firm profile.
    let (regime, profile) = &profiles[1];
    let dev = Deviation::Offer { firm: FirmId(0), offer: None };
    let trace = simulate_from(&m, *regime, profile, profile.initial_state(&m), Some(&dev), 20).unwrap();
    println!("== f1 makes no offer in period 1");
    print!("{}", trace.render(&m));
    println!(
        "f1 earns {} instead of 2",
        discounted_payoff(&m, &trace, dynmatch::market::Agent::Firm(FirmId(0))).value
    );

    // w1 holds out under the flexible firm profile at the firm-optimal matching.
    let mu_f = deferred_acceptance(&m, ProposingSide::Firms);
    let flexible = profile_firm_commit_flexible(&m, &mu_f, FlexibleMode::RejectedSet).unwrap();
    let dev = Deviation::ResignAndWait {
        worker: WorkerId(0),
        reservation: m.worker_utility(WorkerId(0), mu_f.worker_partner(WorkerId(0))),
    };
    let trace = simulate_from(
        &m,
        CommitmentRegime::FirmOnly,
        &flexible,
        flexible.initial_state(&m),
        Some(&dev),
        20,
    )
    .unwrap();
    println!("== w1 turns f1 down and waits");
    print!("{}", trace.render(&m));
}
