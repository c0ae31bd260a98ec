//! Equilibrium checks for stationary profiles.
//!
//! Profiles are checked with the one-shot deviation principle: at every state
//! in scope each agent tries every feasible alternative action for one period
//! and then returns to the profile. Payoffs are exact. The multi-period
//! resign-and-wait deviation is simulated in the engine as well, and the
//! closed-form comparisons behind the discount thresholds are available on
//! their own.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::algorithms::{deferred_acceptance, enumerate_all_matchings, AlgorithmError, ProposingSide};
use crate::engine::{
    admissible_responses, big, big_to_f64, discounted_payoff, feasible_offers, simulate,
    simulate_from, Deviation, EngineError, PlayState,
};
use crate::market::{Agent, CommitmentRegime, FirmId, MarketInstance, Matching, Utility, WorkerId};
use crate::restabilization::{
    firm_threshold, restabilize, worker_threshold, RestabilizationError, Threshold,
};
use crate::strategies::StationaryStrategyProfile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Restabilization(#[from] RestabilizationError),
    #[error("threshold of {0} is 1, so there is no boundary to test")]
    NoBoundary(String),
}

/// Which states deviations are checked at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StateScope {
    /// States visited when everybody follows the profile from `μ_∅`.
    #[default]
    EquilibriumPath,
    /// Every previous-period matching, plus the initial state.
    AllClasses,
}

impl StateScope {
    pub fn label(self) -> &'static str {
        match self {
            StateScope::EquilibriumPath => "path",
            StateScope::AllClasses => "all",
        }
    }
}

impl FromStr for StateScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(StateScope::EquilibriumPath),
            "all" => Ok(StateScope::AllClasses),
            other => Err(format!("unknown scope `{other}` (expected path or all)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Offer(Option<WorkerId>),
    Response(Option<FirmId>),
    /// Reject everything worth at most the reservation utility.
    ResignAndWait(Utility),
}

impl Action {
    pub fn render(&self, m: &MarketInstance) -> String {
        match self {
            Action::Offer(Some(w)) => format!("offer {}", m.worker_name(*w)),
            Action::Offer(None) => "offer nobody".to_string(),
            Action::Response(Some(f)) => format!("accept {}", m.firm_name(*f)),
            Action::Response(None) => "stay single".to_string(),
            Action::ResignAndWait(r) => format!("hold out for more than {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationWitness {
    pub agent: Agent,
    pub state: PlayState,
    /// Offers the worker held when deviating; `None` for firms.
    pub offers_seen: Option<Vec<FirmId>>,
    pub prescribed: Action,
    pub deviating: Action,
    pub payoff_on_path: BigRational,
    pub payoff_deviating: BigRational,
    pub regime: CommitmentRegime,
    pub deviation: Deviation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equilibrium => "Equilibrium",
            Verdict::NotEquilibrium => "NotEquilibrium",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub descriptor: String,
    pub regime: CommitmentRegime,
    pub scope: StateScope,
    pub verdict: Verdict,
    pub witnesses: Vec<DeviationWitness>,
    pub states_checked: usize,
    pub agents_checked: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub scope: StateScope,
    pub max_periods: Option<usize>,
    /// Also try resign-and-wait for every worker. `None` enables it under
    /// firm-only commitment, where it is the deviation of interest.
    pub resign_and_wait: Option<bool>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scope: StateScope::EquilibriumPath,
            max_periods: None,
            resign_and_wait: None,
        }
    }
}

pub fn verifier_max_periods(m: &MarketInstance) -> usize {
    4 * m.n_firms() * m.n_workers() + 8
}

fn fmt_big(r: &BigRational) -> String {
    format!("{} ({})", r, sig5(big_to_f64(r)))
}

/// Five significant digits.
pub fn sig5(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 4 - x.abs().log10().floor() as i32;
    if digits >= 0 {
        format!("{:.*}", digits as usize, x)
    } else {
        format!("{x:.0}")
    }
}

impl DeviationWitness {
    pub fn render(&self, m: &MarketInstance) -> String {
        let mut out = String::new();
        writeln!(out, "  agent {}", m.agent_name(self.agent)).unwrap();
        writeln!(out, "  state {}", m.display_matching(&self.state.prev)).unwrap();
        if let Some(seen) = &self.offers_seen {
            let names: Vec<&str> = seen.iter().map(|&f| m.firm_name(f)).collect();
            writeln!(
                out,
                "  offers_seen {}",
                if names.is_empty() { "-".to_string() } else { names.join(",") }
            )
            .unwrap();
        }
        writeln!(out, "  prescribed {}", self.prescribed.render(m)).unwrap();
        writeln!(out, "  deviating {}", self.deviating.render(m)).unwrap();
        writeln!(out, "  payoff_on_path {}", fmt_big(&self.payoff_on_path)).unwrap();
        writeln!(out, "  payoff_deviating {}", fmt_big(&self.payoff_deviating)).unwrap();
        out
    }
}

impl EquilibriumReport {
    pub fn render(&self, m: &MarketInstance) -> String {
        let mut out = String::new();
        writeln!(out, "profile {}", self.descriptor).unwrap();
        writeln!(out, "regime {}", self.regime).unwrap();
        writeln!(out, "scope {}", self.scope.label()).unwrap();
        writeln!(out, "verdict {}", self.verdict).unwrap();
        writeln!(out, "states_checked {}", self.states_checked).unwrap();
        writeln!(out, "agents_checked {}", self.agents_checked).unwrap();
        writeln!(out, "witnesses {}", self.witnesses.len()).unwrap();
        for (i, w) in self.witnesses.iter().enumerate() {
            writeln!(out, "witness {}", i + 1).unwrap();
            out.push_str(&w.render(m));
        }
        out
    }

    /// One `key=value` pair per line.
    pub fn render_kv(&self, m: &MarketInstance) -> String {
        let mut out = String::new();
        writeln!(out, "profile={}", self.descriptor).unwrap();
        writeln!(out, "regime={}", self.regime).unwrap();
        writeln!(out, "scope={}", self.scope.label()).unwrap();
        writeln!(out, "verdict={}", self.verdict).unwrap();
        writeln!(out, "states_checked={}", self.states_checked).unwrap();
        writeln!(out, "agents_checked={}", self.agents_checked).unwrap();
        writeln!(out, "witnesses={}", self.witnesses.len()).unwrap();
        for (i, w) in self.witnesses.iter().enumerate() {
            let p = format!("witness.{}", i + 1);
            writeln!(out, "{p}.agent={}", m.agent_name(w.agent)).unwrap();
            writeln!(out, "{p}.state={}", m.display_matching(&w.state.prev)).unwrap();
            writeln!(out, "{p}.prescribed={}", w.prescribed.render(m)).unwrap();
            writeln!(out, "{p}.deviating={}", w.deviating.render(m)).unwrap();
            writeln!(out, "{p}.payoff_on_path={}", w.payoff_on_path).unwrap();
            writeln!(out, "{p}.payoff_deviating={}", w.payoff_deviating).unwrap();
        }
        out
    }
}

/// Discounted payoffs `(on path, deviating)` for `agent` in the subgame at
/// `state`.
pub fn deviation_payoffs(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    state: &PlayState,
    deviation: &Deviation,
    max_periods: usize,
) -> Result<(BigRational, BigRational), EngineError> {
    let agent = deviation.agent();
    let on_path = simulate_from(m, regime, profile, state.clone(), None, max_periods)?;
    let off = simulate_from(m, regime, profile, state.clone(), Some(deviation), max_periods)?;
    Ok((
        discounted_payoff(m, &on_path, agent).value,
        discounted_payoff(m, &off, agent).value,
    ))
}

/// Re-simulates a witness and returns its two payoffs.
pub fn replay_witness(
    m: &MarketInstance,
    profile: &StationaryStrategyProfile,
    witness: &DeviationWitness,
    max_periods: usize,
) -> Result<(BigRational, BigRational), EngineError> {
    deviation_payoffs(m, witness.regime, profile, &witness.state, &witness.deviation, max_periods)
}

/// Every profitable single-period deviation of `agent` at `state`.
pub fn one_shot_deviations(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    agent: Agent,
    state: &PlayState,
    max_periods: usize,
) -> Result<Vec<DeviationWitness>, EngineError> {
    let on_path = simulate_from(m, regime, profile, state.clone(), None, max_periods)?;
    let base = discounted_payoff(m, &on_path, agent).value;
    let offers = profile.offers(m, regime, state);

    let candidates: Vec<(Action, Action, Deviation, Option<Vec<FirmId>>)> = match agent {
        Agent::Firm(f) => {
            let prescribed = offers.offer(f);
            feasible_offers(m, regime, &state.prev, f)
                .into_iter()
                .filter(|&o| o != prescribed)
                .map(|o| {
                    (
                        Action::Offer(prescribed),
                        Action::Offer(o),
                        Deviation::Offer { firm: f, offer: o },
                        None,
                    )
                })
                .collect()
        }
        Agent::Worker(w) => {
            let received = offers.received(w);
            let prescribed = profile.worker_response(m, regime, state, w, &received);
            admissible_responses(m, regime, &state.prev, w, &received)
                .into_iter()
                .filter(|&r| r != prescribed)
                .map(|r| {
                    (
                        Action::Response(prescribed),
                        Action::Response(r),
                        Deviation::Response { worker: w, response: r },
                        Some(received.clone()),
                    )
                })
                .collect()
        }
    };

    let mut witnesses = Vec::new();
    for (prescribed, deviating, deviation, offers_seen) in candidates {
        let off = simulate_from(m, regime, profile, state.clone(), Some(&deviation), max_periods)?;
        let value = discounted_payoff(m, &off, agent).value;
        if value > base {
            witnesses.push(DeviationWitness {
                agent,
                state: state.clone(),
                offers_seen,
                prescribed,
                deviating,
                payoff_on_path: base.clone(),
                payoff_deviating: value,
                regime,
                deviation,
            });
        }
    }
    Ok(witnesses)
}

/// Resign-and-wait by `w` at `state`, reported only when profitable. The
/// reservation is the utility of the response the profile prescribes.
pub fn resign_and_wait_deviation(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    w: WorkerId,
    state: &PlayState,
    max_periods: usize,
) -> Result<Option<DeviationWitness>, EngineError> {
    let received = profile.offers(m, regime, state).received(w);
    let prescribed = profile.worker_response(m, regime, state, w, &received);
    if prescribed.is_none() {
        return Ok(None);
    }
    let reservation = m.worker_utility(w, prescribed);
    let deviation = Deviation::ResignAndWait { worker: w, reservation };
    let (on_path, off) = deviation_payoffs(m, regime, profile, state, &deviation, max_periods)?;
    Ok((off > on_path).then(|| DeviationWitness {
        agent: Agent::Worker(w),
        state: state.clone(),
        offers_seen: Some(received),
        prescribed: Action::Response(prescribed),
        deviating: Action::ResignAndWait(reservation),
        payoff_on_path: on_path,
        payoff_deviating: off,
        regime,
        deviation,
    }))
}

/// States deviations are checked at, in a fixed order.
pub fn states_in_scope(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    scope: StateScope,
    max_periods: usize,
) -> Result<Vec<PlayState>, VerifyError> {
    let mut states: BTreeSet<PlayState> = BTreeSet::new();
    let path = simulate(m, regime, profile, max_periods)?;
    states.extend(path.states.iter().cloned());
    if scope == StateScope::AllClasses {
        states.insert(profile.initial_state(m));
        if regime != CommitmentRegime::NoCommitment {
            for mu in enumerate_all_matchings(m)? {
                states.insert(PlayState {
                    prev: mu,
                    memory: profile.initial_memory(m),
                });
            }
        }
    }
    Ok(states.into_iter().collect())
}

pub fn verify_equilibrium(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    options: VerifyOptions,
) -> Result<EquilibriumReport, VerifyError> {
    let max_periods = options.max_periods.unwrap_or_else(|| verifier_max_periods(m));
    let states = states_in_scope(m, regime, profile, options.scope, max_periods)?;
    let agents: Vec<Agent> = m.agents().collect();
    let resign = options
        .resign_and_wait
        .unwrap_or(regime == CommitmentRegime::FirmOnly);

    let per_state: Result<Vec<Vec<DeviationWitness>>, EngineError> = states
        .par_iter()
        .map(|state| {
            let mut found = Vec::new();
            for &agent in &agents {
                found.extend(one_shot_deviations(m, regime, profile, agent, state, max_periods)?);
                if let (true, Agent::Worker(w)) = (resign, agent) {
                    found.extend(resign_and_wait_deviation(
                        m,
                        regime,
                        profile,
                        w,
                        state,
                        max_periods,
                    )?);
                }
            }
            Ok(found)
        })
        .collect();
    let mut witnesses: Vec<DeviationWitness> = per_state?.into_iter().flatten().collect();
    witnesses.sort_by(|a, b| {
        (&a.state, a.agent, a.deviating).cmp(&(&b.state, b.agent, b.deviating))
    });
    let verdict = if witnesses.is_empty() {
        Verdict::Equilibrium
    } else {
        Verdict::NotEquilibrium
    };
    Ok(EquilibriumReport {
        descriptor: profile.descriptor(),
        regime,
        scope: options.scope,
        verdict,
        witnesses,
        states_checked: states.len(),
        agents_checked: agents.len(),
    })
}

/// Staying versus a closed-form deviation, both as discounted sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaitComparison {
    pub stay: BigRational,
    pub deviate: BigRational,
    pub profitable: bool,
}

impl WaitComparison {
    fn new(stay: BigRational, deviate: BigRational) -> Self {
        let profitable = deviate > stay;
        WaitComparison {
            stay,
            deviate,
            profitable,
        }
    }
}

/// `u_w(μ(w))/(1−δ)` against `δ^{k(w)} u_w(ν(w))/(1−δ)`.
pub fn resign_and_wait_comparison(
    m: &MarketInstance,
    mu: &Matching,
    w: WorkerId,
    delta: &BigRational,
) -> Result<WaitComparison, RestabilizationError> {
    let one = BigRational::one();
    let stay = big(m.worker_utility(w, mu.worker_partner(w))) / (&one - delta);
    match restabilize(m, mu, w) {
        Ok(out) => {
            let better = big(m.worker_utility(w, out.final_matching.worker_partner(w)));
            let deviate = Pow::pow(delta, out.periods_waited) * better / (&one - delta);
            Ok(WaitComparison::new(stay, deviate))
        }
        Err(RestabilizationError::NoImprovingOffer(_))
        | Err(RestabilizationError::WorkerUnmatched(_)) => Ok(WaitComparison {
            stay,
            deviate: BigRational::from_integer(0.into()),
            profitable: false,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirmWaitComparison {
    pub comparison: WaitComparison,
    pub threshold: Threshold,
    /// Whether `δ > c^f`.
    pub threshold_says_profitable: bool,
    pub agrees: bool,
}

/// A firm keeps `μ(f)` until period `t̃ − 1`, withholds its offer in `t̃`, and
/// earns `u_f(μ_F(f))` from `t̃ + 1` on.
pub fn firm_wait_comparison(
    m: &MarketInstance,
    mu: &Matching,
    f: FirmId,
    delta: &BigRational,
    deviation_period: u32,
) -> Result<FirmWaitComparison, RestabilizationError> {
    assert!(deviation_period >= 1, "deviation period starts at 1");
    let threshold = firm_threshold(m, mu, f)?;
    let one = BigRational::one();
    let now = big(m.firm_utility(f, mu.firm_partner(f)));
    let firm_opt = deferred_acceptance(m, ProposingSide::Firms);
    let later = big(m.firm_utility(f, firm_opt.firm_partner(f)));
    let stay = &now / (&one - delta);
    let deviate = &now * (&one - Pow::pow(delta, deviation_period - 1)) / (&one - delta)
        + Pow::pow(delta, deviation_period) * later / (&one - delta);
    let comparison = WaitComparison::new(stay, deviate);
    let threshold_says_profitable = threshold.is_exceeded_by(delta);
    Ok(FirmWaitComparison {
        agrees: threshold_says_profitable == comparison.profitable,
        comparison,
        threshold,
        threshold_says_profitable,
    })
}

/// Which threshold a boundary test probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Worker(WorkerId),
    Firm(FirmId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub threshold: Threshold,
    pub below: BigRational,
    pub above: BigRational,
    pub profitable_below: bool,
    pub profitable_above: bool,
    pub holds: bool,
}

/// Distance from the threshold at which the deviation is probed.
pub const BOUNDARY_OFFSET: f64 = 1e-3;

/// `x` rounded to the nearest multiple of `10^-9`, kept inside `(0, 1)`.
pub fn grid_rational(x: f64) -> BigRational {
    let scale = 1_000_000_000i64;
    let n = (x * scale as f64).round() as i64;
    BigRational::new(n.clamp(1, scale - 1).into(), scale.into())
}

/// Tests that the deviation is unprofitable just below the threshold and
/// profitable just above. For firms a deviation counts as profitable if it is
/// for some `t̃ ≤ max_periods`.
pub fn threshold_boundary_test(
    m: &MarketInstance,
    mu: &Matching,
    side: Side,
    max_periods: u32,
) -> Result<BoundaryReport, VerifyError> {
    let threshold = match side {
        Side::Worker(w) => worker_threshold(m, mu, w)?,
        Side::Firm(f) => firm_threshold(m, mu, f)?,
    };
    if threshold.is_one() {
        let name = match side {
            Side::Worker(w) => m.worker_name(w),
            Side::Firm(f) => m.firm_name(f),
        };
        return Err(VerifyError::NoBoundary(name.to_string()));
    }
    let c = threshold.value();
    let below = grid_rational(c - BOUNDARY_OFFSET);
    let above = grid_rational(c + BOUNDARY_OFFSET);
    let profitable = |delta: &BigRational| -> Result<bool, RestabilizationError> {
        match side {
            Side::Worker(w) => Ok(resign_and_wait_comparison(m, mu, w, delta)?.profitable),
            Side::Firm(f) => {
                for t in 1..=max_periods {
                    if firm_wait_comparison(m, mu, f, delta, t)?.comparison.profitable {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    };
    let profitable_below = profitable(&below)?;
    let profitable_above = profitable(&above)?;
    Ok(BoundaryReport {
        threshold,
        holds: !profitable_below && profitable_above,
        below,
        above,
        profitable_below,
        profitable_above,
    })
}

/// The smallest `δ` on a `1/resolution` grid at which `pred` flips from false
/// to true, scanning upward; `None` when it never flips.
pub fn first_flip(resolution: u32, mut pred: impl FnMut(&BigRational) -> bool) -> Option<f64> {
    let mut prev = None;
    for i in 1..resolution {
        let d = BigRational::new(i.into(), resolution.into());
        let now = pred(&d);
        if prev == Some(false) && now {
            return d.to_f64();
        }
        prev = Some(now);
    }
    None
}
