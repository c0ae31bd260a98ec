//! The theorem suite run over a seeded corpus of random markets.

use std::fmt::{self, Write as _};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{
    check_single_agent_property, deferred_acceptance, enumerate_all_matchings,
    enumerate_stable_set, ProposingSide,
};
use crate::engine::{default_max_periods, simulate, to_utility};
use crate::generate::{generate_market, MAX_SIDE};
use crate::market::{
    blocking_pairs, is_individually_rational, is_stable, Agent, CommitmentRegime, MarketInstance,
    Matching, Utility,
};
use crate::restabilization::{firm_threshold, restabilize, worker_threshold, RestabilizationError};
use crate::strategies::{
    profile_firm_commit_flexible, profile_firm_commit_restrictive, profile_no_commitment,
    profile_target_offers, profile_worker_commit_flexible, profile_worker_commit_restrictive,
    FlexibleMode,
};
use crate::verifier::{
    firm_wait_comparison, grid_rational, threshold_boundary_test, verify_equilibrium, Action, Side,
    StateScope, Verdict, VerifyOptions, BOUNDARY_OFFSET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances: usize,
    /// Both sides have between 1 and `max_side` agents.
    pub max_side: usize,
    pub scope: StateScope,
    pub flexible_mode: FlexibleMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            instances: 200,
            max_side: 4,
            scope: StateScope::EquilibriumPath,
            flexible_mode: FlexibleMode::RejectedSet,
        }
    }
}

/// `instances` random markets drawn from `seed`, with side sizes uniform in
/// `1..=max_side`.
pub fn fuzz_corpus(seed: u64, instances: usize, max_side: usize) -> Vec<MarketInstance> {
    assert!((1..=MAX_SIDE).contains(&max_side));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instances)
        .map(|_| {
            let nf = rng.gen_range(1..=max_side);
            let nw = rng.gen_range(1..=max_side);
            generate_market(rng.gen(), nf, nw)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    StableSetOracle,
    NoCommitment,
    NoCommitmentConverse,
    FirmRestrictive,
    FirmFlexibleBoundary,
    FirmFlexible,
    Restabilization,
    WorkerRestrictive,
    WorkerFlexibleComparison,
    WorkerFlexible,
    SingleAgent,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::StableSetOracle,
        Check::NoCommitment,
        Check::NoCommitmentConverse,
        Check::FirmRestrictive,
        Check::FirmFlexibleBoundary,
        Check::FirmFlexible,
        Check::Restabilization,
        Check::WorkerRestrictive,
        Check::WorkerFlexibleComparison,
        Check::WorkerFlexible,
        Check::SingleAgent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Check::StableSetOracle => "stable-set-oracle",
            Check::NoCommitment => "no-commit-equilibrium",
            Check::NoCommitmentConverse => "no-commit-unstable-refuted",
            Check::FirmRestrictive => "firm-restrictive-equilibrium",
            Check::FirmFlexibleBoundary => "resign-and-wait-boundary",
            Check::FirmFlexible => "firm-flexible-equilibrium",
            Check::Restabilization => "restabilization-postconditions",
            Check::WorkerRestrictive => "worker-restrictive-equilibrium",
            Check::WorkerFlexibleComparison => "firm-wait-unprofitable",
            Check::WorkerFlexible => "worker-flexible-equilibrium",
            Check::SingleAgent => "single-agent-property",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    /// Corpus index and description of the first failure.
    pub first_failure: Option<(usize, String)>,
}

impl Tally {
    fn record(&mut self, ok: bool, instance: usize, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some((instance, what()));
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.passed += other.passed;
        self.failed += other.failed;
        let better = match (&self.first_failure, &other.first_failure) {
            (None, Some(_)) => true,
            (Some((a, _)), Some((b, _))) => b < a,
            _ => false,
        };
        if better {
            self.first_failure = other.first_failure;
        }
    }
}

/// How the stated firm threshold compares with the exact firm-wait
/// comparison just around it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FirmThresholdAgreement {
    pub agree: usize,
    pub disagree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub instances: usize,
    pub stable_matchings: usize,
    pub tallies: Vec<(Check, Tally)>,
    pub firm_threshold: FirmThresholdAgreement,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.tallies.iter().all(|(_, t)| t.failed == 0)
    }

    pub fn tally(&self, check: Check) -> &Tally {
        &self.tallies.iter().find(|(c, _)| *c == check).unwrap().1
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "seed {} instances {} max_side {} scope {} flexible_mode {}",
            self.config.seed,
            self.instances,
            self.config.max_side,
            self.config.scope.label(),
            self.config.flexible_mode
        )
        .unwrap();
        writeln!(out, "stable_matchings {}", self.stable_matchings).unwrap();
        writeln!(out, "{:<32} {:>7} {:>7}  result", "check", "passed", "failed").unwrap();
        for (check, t) in &self.tallies {
            writeln!(
                out,
                "{:<32} {:>7} {:>7}  {}",
                check.label(),
                t.passed,
                t.failed,
                if t.failed == 0 { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(
            out,
            "firm-threshold agreement {} disagreement {}",
            self.firm_threshold.agree, self.firm_threshold.disagree
        )
        .unwrap();
        for (check, t) in &self.tallies {
            if let Some((i, why)) = &t.first_failure {
                writeln!(out, "first failure of {check}: instance {i}: {why}").unwrap();
            }
        }
        out
    }
}

/// `m` with the discount of every agent selected by `pick` replaced.
pub fn with_discounts(
    m: &MarketInstance,
    mut pick: impl FnMut(Agent) -> Option<Utility>,
) -> MarketInstance {
    let mut out = m.clone();
    for a in m.agents() {
        if let Some(d) = pick(a) {
            out = out.with_discount(a, d).expect("discount inside (0, 1)");
        }
    }
    out
}

/// A grid point `offset` below the threshold value, as a utility.
pub fn below_threshold(value: f64) -> Utility {
    to_utility(&grid_rational(value - BOUNDARY_OFFSET)).expect("grid points fit in i64")
}

fn verdict(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &crate::strategies::StationaryStrategyProfile,
    scope: StateScope,
) -> Result<bool, String> {
    let options = VerifyOptions {
        scope,
        ..VerifyOptions::default()
    };
    verify_equilibrium(m, regime, profile, options)
        .map(|r| r.verdict == Verdict::Equilibrium)
        .map_err(|e| e.to_string())
}

struct InstanceResult {
    tallies: Vec<Tally>,
    stable: usize,
    agreement: FirmThresholdAgreement,
}

fn run_instance(i: usize, m: &MarketInstance, config: &ExperimentConfig) -> InstanceResult {
    let mut t: Vec<Tally> = vec![Tally::default(); Check::ALL.len()];
    let mut agreement = FirmThresholdAgreement::default();
    let scope = config.scope;

    let report = match enumerate_stable_set(m) {
        Ok(r) => r,
        Err(e) => {
            t[Check::StableSetOracle as usize].record(false, i, || e.to_string());
            return InstanceResult { tallies: t, stable: 0, agreement };
        }
    };
    let mu_f = deferred_acceptance(m, ProposingSide::Firms);
    let mu_w = deferred_acceptance(m, ProposingSide::Workers);
    t[Check::StableSetOracle as usize].record(
        is_stable(m, &mu_f)
            && is_stable(m, &mu_w)
            && mu_f == report.firm_optimal
            && mu_w == report.worker_optimal,
        i,
        || "deferred acceptance disagrees with brute force".into(),
    );
    t[Check::SingleAgent as usize].record(
        check_single_agent_property(m).map(|c| c.holds).unwrap_or(false),
        i,
        || "an agent is single in one stable matching only".into(),
    );

    let show = |mu: &Matching| m.display_matching(mu);
    for mu in &report.stable {
        // No commitment.
        let p = profile_no_commitment(m, mu).unwrap();
        let constant = simulate(m, CommitmentRegime::NoCommitment, &p, default_max_periods(m))
            .map(|tr| tr.tail_start == 1 && tr.tail_matching() == Some(mu))
            .unwrap_or(false);
        let eq = verdict(m, CommitmentRegime::NoCommitment, &p, scope);
        t[Check::NoCommitment as usize].record(constant && eq == Ok(true), i, || format!("mu {} {eq:?}", show(mu)));

        // Firm commitment, restrictive, at three common discount factors.
        for d in [Utility::new(1, 10), Utility::new(1, 2), Utility::new(9, 10)] {
            let md = with_discounts(m, |_| Some(d));
            let p = profile_firm_commit_restrictive(&md, mu).unwrap();
            let eq = verdict(&md, CommitmentRegime::FirmOnly, &p, scope);
            t[Check::FirmRestrictive as usize].record(eq == Ok(true), i, || format!("mu {} delta {d} {eq:?}", show(mu)));
        }

        // Firm commitment, flexible: boundary of each worker threshold, then
        // the whole profile with every worker below her threshold.
        let mut thresholds = Vec::new();
        for w in m.workers() {
            let c = worker_threshold(m, mu, w).unwrap();
            if !c.is_one() {
                let r = threshold_boundary_test(m, mu, Side::Worker(w), 1);
                t[Check::FirmFlexibleBoundary as usize].record(matches!(r, Ok(ref b) if b.holds), i, || {
                    format!("mu {} worker {} {r:?}", show(mu), m.worker_name(w))
                });
            }
            thresholds.push(c);
        }
        let md = with_discounts(m, |a| match a {
            Agent::Worker(w) if !thresholds[w.0].is_one() => Some(below_threshold(thresholds[w.0].value())),
            _ => None,
        });
        let p = profile_firm_commit_flexible(&md, mu, config.flexible_mode).unwrap();
        let eq = verdict(&md, CommitmentRegime::FirmOnly, &p, scope);
        t[Check::FirmFlexible as usize].record(eq == Ok(true), i, || format!("mu {} {eq:?}", show(mu)));

        // Restabilization after each matched worker resigns.
        for w in m.workers().filter(|&w| mu.worker_partner(w).is_some()) {
            match restabilize(m, mu, w) {
                Ok(out) => {
                    let nu = &out.final_matching;
                    let ok = is_stable(m, nu)
                        && m.worker_utility(w, nu.worker_partner(w))
                            > m.worker_utility(w, mu.worker_partner(w))
                        && report.stable.contains(nu)
                        && out.periods_waited >= 1
                        && out.periods_waited <= 2 * m.n_firms() * m.n_workers();
                    t[Check::Restabilization as usize].record(ok, i, || {
                        format!("mu {} worker {} nu {} k {}", show(mu), m.worker_name(w), show(nu), out.periods_waited)
                    });
                }
                Err(RestabilizationError::NoImprovingOffer(_)) => {
                    // Nothing to improve means no stable matching is better for w.
                    let best = report
                        .stable
                        .iter()
                        .map(|s| m.worker_utility(w, s.worker_partner(w)))
                        .max()
                        .unwrap();
                    t[Check::Restabilization as usize].record(best == m.worker_utility(w, mu.worker_partner(w)), i, || {
                        format!("mu {} worker {} found no improvement", show(mu), m.worker_name(w))
                    });
                }
                Err(e) => t[Check::Restabilization as usize].record(false, i, || e.to_string()),
            }
        }

        // Worker commitment, restrictive.
        let p = profile_worker_commit_restrictive(m, mu).unwrap();
        let eq = verdict(m, CommitmentRegime::WorkerOnly, &p, scope);
        t[Check::WorkerRestrictive as usize].record(eq == Ok(true), i, || format!("mu {} {eq:?}", show(mu)));

        // Worker commitment, flexible: every firm just below its threshold.
        let horizon = default_max_periods(m) as u32;
        let mut firm_deltas = Vec::new();
        for f in m.firms() {
            let c = firm_threshold(m, mu, f).unwrap();
            let d = if c.is_one() { m.firm_discount(f) } else { below_threshold(c.value()) };
            let delta = crate::engine::big(d);
            let never = (1..=horizon).all(|tt| {
                !firm_wait_comparison(m, mu, f, &delta, tt).unwrap().comparison.profitable
            });
            t[Check::WorkerFlexibleComparison as usize].record(never, i, || format!("mu {} firm {}", show(mu), m.firm_name(f)));
            if !c.is_one() {
                for probe in [c.value() - BOUNDARY_OFFSET, c.value() + BOUNDARY_OFFSET] {
                    let delta: BigRational = grid_rational(probe);
                    let agrees = (1..=horizon)
                        .all(|tt| firm_wait_comparison(m, mu, f, &delta, tt).unwrap().agrees);
                    if agrees {
                        agreement.agree += 1;
                    } else {
                        agreement.disagree += 1;
                    }
                }
            }
            firm_deltas.push((c.is_one(), d));
        }
        let md = with_discounts(m, |a| match a {
            Agent::Firm(f) if !firm_deltas[f.0].0 => Some(firm_deltas[f.0].1),
            _ => None,
        });
        let p = profile_worker_commit_flexible(&md, mu).unwrap();
        let eq = verdict(&md, CommitmentRegime::WorkerOnly, &p, scope);
        t[Check::WorkerFlexible as usize].record(eq == Ok(true), i, || format!("mu {} {eq:?}", show(mu)));
    }

    // Converse: an individually rational but unstable target is refuted by a
    // firm offering to a blocking partner.
    if let Some(target) = first_unstable_target(m) {
        let p = profile_target_offers(m, &target).unwrap();
        let options = VerifyOptions { scope, ..VerifyOptions::default() };
        let blocks = blocking_pairs(m, &target);
        let refuted = verify_equilibrium(m, CommitmentRegime::NoCommitment, &p, options)
            .map(|r| {
                r.verdict == Verdict::NotEquilibrium
                    && r.witnesses.iter().any(|w| match (w.agent, w.deviating) {
                        (Agent::Firm(f), Action::Offer(Some(x))) => blocks.contains(&(f, x)),
                        _ => false,
                    })
            })
            .unwrap_or(false);
        t[Check::NoCommitmentConverse as usize].record(refuted, i, || format!("target {}", show(&target)));
    }

    InstanceResult {
        tallies: t,
        stable: report.stable.len(),
        agreement,
    }
}

/// The first matching in enumeration order that is individually rational
/// but blocked.
pub fn first_unstable_target(m: &MarketInstance) -> Option<Matching> {
    enumerate_all_matchings(m)
        .ok()?
        .into_iter()
        .find(|mu| is_individually_rational(m, mu) && !is_stable(m, mu))
}

pub fn run_experiment(config: &ExperimentConfig) -> ExperimentReport {
    let corpus = fuzz_corpus(config.seed, config.instances, config.max_side);
    let results: Vec<InstanceResult> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, m)| run_instance(i, m, config))
        .collect();
    let mut tallies: Vec<(Check, Tally)> = Check::ALL.iter().map(|&c| (c, Tally::default())).collect();
    let mut stable_matchings = 0;
    let mut firm_threshold = FirmThresholdAgreement::default();
    for r in results {
        stable_matchings += r.stable;
        firm_threshold.agree += r.agreement.agree;
        firm_threshold.disagree += r.agreement.disagree;
        for ((_, total), part) in tallies.iter_mut().zip(r.tallies) {
            total.merge(part);
        }
    }
    ExperimentReport {
        config: *config,
        instances: corpus.len(),
        stable_matchings,
        tallies,
        firm_threshold,
    }
}
