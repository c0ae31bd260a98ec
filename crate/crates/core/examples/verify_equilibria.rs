//! Equilibrium checks on M2: the canonical profiles, a profile with patient
//! workers that breaks, and what changes when every state is checked.
//!
//!     cargo run --example verify_equilibria

use dynmatch::algorithms::{deferred_acceptance, ProposingSide};
use dynmatch::instance::parse_instance;
use dynmatch::market::{Agent, CommitmentRegime, Utility};
use dynmatch::strategies::{
    profile_firm_commit_flexible, profile_firm_commit_restrictive, profile_no_commitment,
    profile_target_offers, profile_worker_commit_restrictive, FlexibleMode,
};
use dynmatch::verifier::{verify_equilibrium, StateScope, VerifyOptions};

fn main() {
    let m = parse_instance(include_str!("../tests/data/m2.txt")).unwrap();
    let mu_f = deferred_acceptance(&m, ProposingSide::Firms);
    let mu_w = deferred_acceptance(&m, ProposingSide::Workers);
    let path = VerifyOptions::default();

    for (regime, profile) in [
        (CommitmentRegime::NoCommitment, profile_no_commitment(&m, &mu_w).unwrap()),
        (CommitmentRegime::FirmOnly, profile_firm_commit_restrictive(&m, &mu_f).unwrap()),
        (CommitmentRegime::WorkerOnly, profile_worker_commit_restrictive(&m, &mu_w).unwrap()),
    ] {
        let r = verify_equilibrium(&m, regime, &profile, path).unwrap();
        println!("{} under {regime}: {}", profile.descriptor(), r.verdict);
    }

    println!("== firms offer the unstable matching (f2,w1)");
    let odd = m.matching_from_names(&[("f2", "w1")]).unwrap();
    let r = verify_equilibrium(
        &m,
        CommitmentRegime::NoCommitment,
        &profile_target_offers(&m, &odd).unwrap(),
        path,
    )
    .unwrap();
    print!("{}", r.render(&m));

    println!("== flexible firms, workers with discount 9/10");
    let mut patient = m.clone();
    for w in m.workers() {
        patient = patient.with_discount(Agent::Worker(w), Utility::new(9, 10)).unwrap();
    }
    let p = profile_firm_commit_flexible(&patient, &mu_f, FlexibleMode::RejectedSet).unwrap();
    let r = verify_equilibrium(&patient, CommitmentRegime::FirmOnly, &p, path).unwrap();
    print!("{}", r.render(&patient));

    println!("== restrictive firms, every state checked");
    let all = VerifyOptions { scope: StateScope::AllClasses, ..path };
    let p = profile_firm_commit_restrictive(&m, &mu_f).unwrap();
    let r = verify_equilibrium(&m, CommitmentRegime::FirmOnly, &p, all).unwrap();
    print!("{}", r.render(&m));
}
