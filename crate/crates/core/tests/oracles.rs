//! Cross-checks against independent oracles written here, plus invariants
//! over generated markets.

use dynmatch::algorithms::{
    deferred_acceptance, enumerate_all_matchings, enumerate_stable_set, ProposingSide,
};
use dynmatch::engine::{
    admissible_responses, big, discounted_payoff, feasible_offers, play_period, simulate,
    simulate_from, truncated_payoff, Deviation, PlayState, Trace,
};
use dynmatch::generate::generate_market;
use dynmatch::instance::{parse_instance, serialize_instance};
use dynmatch::market::{
    is_stable, Agent, CommitmentRegime, FirmId, MarketInstance, Matching, Utility, WorkerId,
};
use dynmatch::restabilization::{firm_threshold, restabilize, worker_threshold, RestabilizationError};
use dynmatch::strategies::{
    profile_firm_commit_flexible, profile_firm_commit_restrictive, profile_no_commitment,
    profile_target_offers, profile_worker_commit_flexible, profile_worker_commit_restrictive,
    FlexibleMode, StationaryStrategyProfile,
};
use dynmatch::verifier::{
    deviation_payoffs, replay_witness, resign_and_wait_comparison, verifier_max_periods,
    verify_equilibrium, StateScope, Verdict, VerifyOptions,
};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use proptest::prelude::*;

fn market() -> impl Strategy<Value = MarketInstance> {
    (any::<u64>(), 1usize..=4, 1usize..=4).prop_map(|(seed, f, w)| generate_market(seed, f, w))
}

/// Stability straight from the definition: nobody prefers being single, and
/// no firm and worker both prefer each other to their partners.
fn stable_by_definition(m: &MarketInstance, mu: &Matching) -> bool {
    let zero = Utility::zero();
    for f in m.firms() {
        if mu.firm_partner(f).is_some() && m.firm_utility(f, mu.firm_partner(f)) < zero {
            return false;
        }
    }
    for w in m.workers() {
        if mu.worker_partner(w).is_some() && m.worker_utility(w, mu.worker_partner(w)) < zero {
            return false;
        }
    }
    for f in m.firms() {
        for w in m.workers() {
            let firm_gain = m.firm_utility(f, Some(w)) > m.firm_utility(f, mu.firm_partner(f));
            let worker_gain = m.worker_utility(w, Some(f)) > m.worker_utility(w, mu.worker_partner(w));
            if mu.firm_partner(f) != Some(w) && firm_gain && worker_gain {
                return false;
            }
        }
    }
    true
}

/// Number of one-to-one partial matchings of `a` firms and `b` workers:
/// `Σ_k C(a,k) C(b,k) k!`.
fn matching_count(a: usize, b: usize) -> usize {
    let choose = |n: usize, k: usize| (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
    (0..=a.min(b)).map(|k| choose(a, k) * choose(b, k) * (1..=k).product::<usize>()).sum()
}

fn canonical_profiles(m: &MarketInstance, mu: &Matching) -> Vec<(CommitmentRegime, StationaryStrategyProfile)> {
    vec![
        (CommitmentRegime::NoCommitment, profile_no_commitment(m, mu).unwrap()),
        (CommitmentRegime::FirmOnly, profile_firm_commit_restrictive(m, mu).unwrap()),
        (CommitmentRegime::FirmOnly, profile_firm_commit_flexible(m, mu, FlexibleMode::RejectedSet).unwrap()),
        (CommitmentRegime::FirmOnly, profile_firm_commit_flexible(m, mu, FlexibleMode::StrictStationary).unwrap()),
        (CommitmentRegime::WorkerOnly, profile_worker_commit_restrictive(m, mu).unwrap()),
        (CommitmentRegime::WorkerOnly, profile_worker_commit_flexible(m, mu).unwrap()),
    ]
}

/// Every recorded period is a legal move from the previous matching and
/// reproduces its matching; workers end up with the firm they accepted.
fn assert_trace_consistent(m: &MarketInstance, regime: CommitmentRegime, trace: &Trace) {
    let mut prev = trace.start.clone();
    for (i, p) in trace.periods.iter().enumerate() {
        for f in m.firms() {
            assert!(feasible_offers(m, regime, &prev, f).contains(&p.offers.offer(f)), "period {}", i + 1);
        }
        for w in m.workers() {
            let received = p.offers.received(w);
            assert!(admissible_responses(m, regime, &prev, w, &received).contains(&p.responses.response(w)));
            assert_eq!(p.matching.worker_partner(w), p.responses.response(w));
        }
        let replay = play_period(m, regime, &prev, &p.offers, &p.responses).unwrap();
        assert_eq!(replay, p.matching);
        assert_eq!(trace.matching_at(i + 1), &p.matching);
        prev = p.matching.clone();
    }
    assert!(trace.tail_start >= 1 && trace.cycle_len >= 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stability_agrees_with_definition(m in market()) {
        for mu in enumerate_all_matchings(&m).unwrap() {
            prop_assert_eq!(is_stable(&m, &mu), stable_by_definition(&m, &mu));
        }
    }

    #[test]
    fn enumeration_counts_every_matching(m in market()) {
        let all = enumerate_all_matchings(&m).unwrap();
        prop_assert_eq!(all.len(), matching_count(m.n_firms(), m.n_workers()));
        let distinct: std::collections::BTreeSet<_> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn deferred_acceptance_is_side_optimal(m in market()) {
        let report = enumerate_stable_set(&m).unwrap();
        let mu_f = deferred_acceptance(&m, ProposingSide::Firms);
        let mu_w = deferred_acceptance(&m, ProposingSide::Workers);
        prop_assert!(stable_by_definition(&m, &mu_f) && stable_by_definition(&m, &mu_w));
        for mu in &report.stable {
            for f in m.firms() {
                prop_assert!(m.firm_utility(f, mu_f.firm_partner(f)) >= m.firm_utility(f, mu.firm_partner(f)));
                prop_assert!(m.firm_utility(f, mu_w.firm_partner(f)) <= m.firm_utility(f, mu.firm_partner(f)));
            }
            for w in m.workers() {
                prop_assert!(m.worker_utility(w, mu_w.worker_partner(w)) >= m.worker_utility(w, mu.worker_partner(w)));
                prop_assert!(m.worker_utility(w, mu_f.worker_partner(w)) <= m.worker_utility(w, mu.worker_partner(w)));
            }
        }
    }

    #[test]
    fn canonical_traces_are_legal_and_constant(m in market()) {
        for mu in enumerate_stable_set(&m).unwrap().stable {
            for (regime, p) in canonical_profiles(&m, &mu) {
                let trace = simulate(&m, regime, &p, 64).unwrap();
                assert_trace_consistent(&m, regime, &trace);
                prop_assert_eq!(trace.tail_matching(), Some(&mu));
                prop_assert_eq!(trace.tail_start, 1);
            }
        }
    }

    #[test]
    fn no_commitment_reaches_target_from_any_start(m in market()) {
        let mu = deferred_acceptance(&m, ProposingSide::Workers);
        let p = profile_no_commitment(&m, &mu).unwrap();
        for prev in enumerate_all_matchings(&m).unwrap() {
            let state = PlayState { prev, memory: p.initial_memory(&m) };
            let trace = simulate_from(&m, CommitmentRegime::NoCommitment, &p, state, None, 64).unwrap();
            prop_assert_eq!(trace.matching_at(1), &mu);
            prop_assert_eq!(trace.tail_matching(), Some(&mu));
        }
    }

    #[test]
    fn deviated_traces_stay_legal(m in market(), pick in any::<prop::sample::Index>(), firm in any::<prop::sample::Index>()) {
        let all = enumerate_all_matchings(&m).unwrap();
        let target = pick.get(&all).clone();
        for regime in CommitmentRegime::ALL {
            let p = profile_target_offers(&m, &target).unwrap();
            let f = FirmId(firm.index(m.n_firms()));
            let dev = Deviation::Offer { firm: f, offer: None };
            let trace = simulate_from(&m, regime, &p, p.initial_state(&m), Some(&dev), 64).unwrap();
            assert_trace_consistent(&m, regime, &trace);
            prop_assert_eq!(trace.periods[0].offers.offer(f), None);
        }
    }

    #[test]
    fn closed_form_payoff_matches_long_sum(m in market(), pick in any::<prop::sample::Index>()) {
        let all = enumerate_all_matchings(&m).unwrap();
        let p = profile_target_offers(&m, pick.get(&all)).unwrap();
        let trace = simulate(&m, CommitmentRegime::FirmOnly, &p, 64).unwrap();
        for a in m.agents() {
            // Exact identity: closed = truncated(T) + δ^T · closed-from-T, and
            // the trace is constant from T on once T reaches the tail.
            let delta = big(m.discount(a));
            let horizon = trace.tail_start + trace.cycle_len * 3;
            let closed = discounted_payoff(&m, &trace, a).value;
            let truncated = truncated_payoff(&m, &trace, a, horizon);
            let tail_len = trace.cycle_len;
            let mut cycle = BigRational::zero();
            for j in 0..tail_len {
                cycle += Pow::pow(&delta, j) * big(m.utility_in(a, trace.matching_at(horizon + 1 + j)));
            }
            let rest = Pow::pow(&delta, horizon) * cycle / (BigRational::one() - Pow::pow(&delta, tail_len));
            prop_assert_eq!(closed, truncated + rest);
        }
    }

    #[test]
    fn simulation_and_verification_are_deterministic(m in market()) {
        let mu = deferred_acceptance(&m, ProposingSide::Firms);
        for (regime, p) in canonical_profiles(&m, &mu) {
            prop_assert_eq!(simulate(&m, regime, &p, 32).unwrap(), simulate(&m, regime, &p, 32).unwrap());
            let options = VerifyOptions { scope: StateScope::AllClasses, ..VerifyOptions::default() };
            prop_assert_eq!(
                verify_equilibrium(&m, regime, &p, options).unwrap(),
                verify_equilibrium(&m, regime, &p, options).unwrap()
            );
        }
    }

    #[test]
    fn witnesses_replay_to_their_payoffs(m in market()) {
        let mu = deferred_acceptance(&m, ProposingSide::Firms);
        let options = VerifyOptions { scope: StateScope::AllClasses, ..VerifyOptions::default() };
        for (regime, p) in canonical_profiles(&m, &mu) {
            let report = verify_equilibrium(&m, regime, &p, options).unwrap();
            prop_assert_eq!(report.verdict == Verdict::Equilibrium, report.witnesses.is_empty());
            for w in &report.witnesses {
                let (on, off) = replay_witness(&m, &p, w, verifier_max_periods(&m)).unwrap();
                prop_assert_eq!(&on, &w.payoff_on_path);
                prop_assert_eq!(&off, &w.payoff_deviating);
                prop_assert!(off > on);
            }
        }
    }

    #[test]
    fn thresholds_lie_in_unit_interval(m in market()) {
        let mu_w = deferred_acceptance(&m, ProposingSide::Workers);
        for mu in enumerate_stable_set(&m).unwrap().stable {
            for w in m.workers() {
                let c = worker_threshold(&m, &mu, w).unwrap();
                prop_assert!(c.value() > 0.0 && c.value() <= 1.0);
                prop_assert!(c.root >= 1);
                // Nobody does better than the worker-optimal matching.
                if mu == mu_w {
                    prop_assert!(c.is_one());
                }
            }
            for f in m.firms() {
                let c = firm_threshold(&m, &mu, f).unwrap();
                prop_assert!(c.value() > 0.0 && c.value() <= 1.0);
            }
        }
    }

    #[test]
    fn resign_and_wait_gain_is_monotone_in_patience(m in market()) {
        let mu = deferred_acceptance(&m, ProposingSide::Firms);
        for w in m.workers() {
            let mut seen_profitable = false;
            for k in 1..20 {
                let d = BigRational::new(k.into(), 20.into());
                let profitable = resign_and_wait_comparison(&m, &mu, w, &d).unwrap().profitable;
                prop_assert!(!seen_profitable || profitable, "profitable then unprofitable at {}", d);
                seen_profitable |= profitable;
            }
        }
    }

    #[test]
    fn instance_text_round_trips(m in market()) {
        let text = serialize_instance(&m);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
        prop_assert_eq!(back, m);
    }
}

/// The engine plays resign-and-wait against the flexible firm profile; its
/// payoff must equal the closed form built from the vacancy chain.
#[test]
fn resign_and_wait_engine_matches_closed_form() {
    let mut compared = 0;
    for seed in 0..400u64 {
        let m = generate_market(seed, 1 + (seed % 4) as usize, 1 + (seed / 4 % 4) as usize);
        for mu in enumerate_stable_set(&m).unwrap().stable {
            let p = profile_firm_commit_flexible(&m, &mu, FlexibleMode::RejectedSet).unwrap();
            let state = PlayState { prev: mu.clone(), memory: p.initial_memory(&m) };
            for w in m.workers().filter(|&w| mu.worker_partner(w).is_some()) {
                let reservation = m.worker_utility(w, mu.worker_partner(w));
                let dev = Deviation::ResignAndWait { worker: w, reservation };
                let (stay, deviate) = deviation_payoffs(
                    &m,
                    CommitmentRegime::FirmOnly,
                    &p,
                    &state,
                    &dev,
                    verifier_max_periods(&m),
                )
                .unwrap();
                let delta = big(m.discount(Agent::Worker(w)));
                let closed = resign_and_wait_comparison(&m, &mu, w, &delta).unwrap();
                assert_eq!(stay, closed.stay, "seed {seed} worker {}", m.worker_name(w));
                assert_eq!(deviate, closed.deviate, "seed {seed} worker {}", m.worker_name(w));
                compared += 1;
            }
        }
    }
    assert!(compared > 200, "only {compared} comparisons");
}

#[test]
fn restabilization_rejects_bad_inputs() {
    let m = parse_instance(include_str!("data/m2.txt")).unwrap();
    let unstable = m.matching_from_names(&[("f2", "w1")]).unwrap();
    assert!(matches!(restabilize(&m, &unstable, WorkerId(0)), Err(RestabilizationError::NotStable(_))));
    let empty = m.empty_matching();
    assert!(!is_stable(&m, &empty));
    let mu_w = deferred_acceptance(&m, ProposingSide::Workers);
    assert!(matches!(restabilize(&m, &mu_w, WorkerId(1)), Err(RestabilizationError::NoImprovingOffer(_))));
}
