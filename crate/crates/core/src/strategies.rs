//! Stationary strategy profiles.
//!
//! A profile prescribes each firm's offer as a function of last period's
//! matching (its continuation-equivalence class) and each worker's response as
//! a function of last period's matching and the offers she holds. The five
//! canonical profiles are built by the `profile_*` constructors; two auxiliary
//! ones (`profile_target_offers`, `profile_idle`) serve as test fixtures and
//! counterexamples.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::algorithms::{deferred_acceptance, ProposingSide};
use crate::engine::{admissible_responses, OfferProfile, PlayState};
use crate::market::{
    is_stable, CommitmentRegime, FirmId, MarketInstance, Matching, Utility, WorkerId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("target matching {0} is not stable")]
    NotStable(String),
    #[error("target matching does not belong to this market")]
    WrongMarket,
}

/// `μ ~ μ'` under the given regime.
pub fn continuation_equivalent(regime: CommitmentRegime, a: &Matching, b: &Matching) -> bool {
    match regime {
        CommitmentRegime::NoCommitment => true,
        CommitmentRegime::TwoSided => a.unmatched() == b.unmatched(),
        CommitmentRegime::FirmOnly | CommitmentRegime::WorkerOnly => a == b,
    }
}

/// The offer in `offers` that `w` values most, provided it beats staying
/// single; `None` otherwise.
pub fn best_response_accept(m: &MarketInstance, w: WorkerId, offers: &[FirmId]) -> Option<FirmId> {
    offers
        .iter()
        .copied()
        .filter(|&f| m.worker_utility(w, Some(f)) > Utility::zero())
        .max_by_key(|&f| m.worker_utility(w, Some(f)))
}

/// How the flexible firm profile remembers which workers turned it down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FlexibleMode {
    /// Decisions depend on last period's matching only. A firm may keep
    /// offering a worker that rejected it as long as she still looks willing.
    StrictStationary,
    /// Each firm remembers every worker that turned it down and skips her.
    #[default]
    RejectedSet,
}

impl FromStr for FlexibleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict-stationary" => Ok(FlexibleMode::StrictStationary),
            "rejected-set" => Ok(FlexibleMode::RejectedSet),
            other => Err(format!(
                "unknown flexible mode `{other}` (expected strict-stationary or rejected-set)"
            )),
        }
    }
}

impl fmt::Display for FlexibleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlexibleMode::StrictStationary => "strict-stationary",
            FlexibleMode::RejectedSet => "rejected-set",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Firms offer `μ(f)`, workers accept their best offer.
    NoCommitment,
    /// Same rules, intended for the firm-commitment regime.
    FirmRestrictive,
    /// A rejected firm re-aims at the best worker still willing to take it.
    FirmFlexible(FlexibleMode),
    /// Firms offer `μ(f)`, intended for the worker-commitment regime.
    WorkerRestrictive,
    /// Firms offer `μ(f)` while the market sits at `μ`, and their firm-optimal
    /// partner once it has left `μ`.
    WorkerFlexible,
    /// Firms offer `μ(f)` for an arbitrary (possibly unstable) target.
    TargetOffers,
    /// Nobody ever offers or accepts anything.
    Idle,
}

impl ProfileKind {
    pub fn descriptor(self) -> &'static str {
        match self {
            ProfileKind::NoCommitment => "no-commit",
            ProfileKind::FirmRestrictive => "firm-restrictive",
            ProfileKind::FirmFlexible(_) => "firm-flexible",
            ProfileKind::WorkerRestrictive => "worker-restrictive",
            ProfileKind::WorkerFlexible => "worker-flexible",
            ProfileKind::TargetOffers => "target-offers",
            ProfileKind::Idle => "idle",
        }
    }
}

/// Per-profile bookkeeping carried between periods. Empty for every profile
/// except the flexible firm profile in [`FlexibleMode::RejectedSet`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProfileMemory {
    /// Workers that turned each firm down so far.
    pub rejected: Vec<BTreeSet<WorkerId>>,
}

/// A stationary strategy profile built around a target matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationaryStrategyProfile {
    kind: ProfileKind,
    target: Matching,
    firm_optimal: Option<Matching>,
}

fn require_stable(m: &MarketInstance, mu: &Matching) -> Result<(), StrategyError> {
    if !m.admits(mu) {
        return Err(StrategyError::WrongMarket);
    }
    if !is_stable(m, mu) {
        return Err(StrategyError::NotStable(m.display_matching(mu)));
    }
    Ok(())
}

fn stable_profile(
    m: &MarketInstance,
    mu: &Matching,
    kind: ProfileKind,
) -> Result<StationaryStrategyProfile, StrategyError> {
    require_stable(m, mu)?;
    let firm_optimal = match kind {
        ProfileKind::WorkerFlexible => Some(deferred_acceptance(m, ProposingSide::Firms)),
        _ => None,
    };
    Ok(StationaryStrategyProfile {
        kind,
        target: mu.clone(),
        firm_optimal,
    })
}

pub fn profile_no_commitment(
    m: &MarketInstance,
    mu: &Matching,
) -> Result<StationaryStrategyProfile, StrategyError> {
    stable_profile(m, mu, ProfileKind::NoCommitment)
}

pub fn profile_firm_commit_restrictive(
    m: &MarketInstance,
    mu: &Matching,
) -> Result<StationaryStrategyProfile, StrategyError> {
    stable_profile(m, mu, ProfileKind::FirmRestrictive)
}

pub fn profile_firm_commit_flexible(
    m: &MarketInstance,
    mu: &Matching,
    mode: FlexibleMode,
) -> Result<StationaryStrategyProfile, StrategyError> {
    stable_profile(m, mu, ProfileKind::FirmFlexible(mode))
}

pub fn profile_worker_commit_restrictive(
    m: &MarketInstance,
    mu: &Matching,
) -> Result<StationaryStrategyProfile, StrategyError> {
    stable_profile(m, mu, ProfileKind::WorkerRestrictive)
}

pub fn profile_worker_commit_flexible(
    m: &MarketInstance,
    mu: &Matching,
) -> Result<StationaryStrategyProfile, StrategyError> {
    stable_profile(m, mu, ProfileKind::WorkerFlexible)
}

/// Firms offer `target(f)` and workers accept their best offer, without
/// requiring the target to be stable.
pub fn profile_target_offers(
    m: &MarketInstance,
    target: &Matching,
) -> Result<StationaryStrategyProfile, StrategyError> {
    if !m.admits(target) {
        return Err(StrategyError::WrongMarket);
    }
    Ok(StationaryStrategyProfile {
        kind: ProfileKind::TargetOffers,
        target: target.clone(),
        firm_optimal: None,
    })
}

/// Every firm offers nobody and every worker rejects whatever she can.
pub fn profile_idle(m: &MarketInstance) -> StationaryStrategyProfile {
    StationaryStrategyProfile {
        kind: ProfileKind::Idle,
        target: m.empty_matching(),
        firm_optimal: None,
    }
}

impl StationaryStrategyProfile {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn target(&self) -> &Matching {
        &self.target
    }

    pub fn firm_optimal(&self) -> Option<&Matching> {
        self.firm_optimal.as_ref()
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            ProfileKind::FirmFlexible(mode) => format!("firm-flexible[{mode}]"),
            k => k.descriptor().to_string(),
        }
    }

    fn uses_memory(&self) -> bool {
        self.kind == ProfileKind::FirmFlexible(FlexibleMode::RejectedSet)
    }

    /// Memory with no outstanding rejections, used at the start of the game
    /// and when entering a subgame at an arbitrary matching.
    pub fn initial_memory(&self, m: &MarketInstance) -> ProfileMemory {
        if self.uses_memory() {
            ProfileMemory {
                rejected: vec![BTreeSet::new(); m.n_firms()],
            }
        } else {
            ProfileMemory::default()
        }
    }

    pub fn initial_state(&self, m: &MarketInstance) -> PlayState {
        PlayState {
            prev: m.empty_matching(),
            memory: self.initial_memory(m),
        }
    }

    /// The offer prescribed to `f`; inactive firms always renew.
    pub fn firm_offer(
        &self,
        m: &MarketInstance,
        regime: CommitmentRegime,
        state: &PlayState,
        f: FirmId,
    ) -> Option<WorkerId> {
        let prev = &state.prev;
        if regime.firm_inactive(prev, f) {
            return prev.firm_partner(f);
        }
        let target = self.target.firm_partner(f);
        match self.kind {
            ProfileKind::NoCommitment
            | ProfileKind::FirmRestrictive
            | ProfileKind::WorkerRestrictive
            | ProfileKind::TargetOffers => target,
            ProfileKind::Idle => None,
            ProfileKind::WorkerFlexible => {
                if *prev == self.target || prev.is_empty() {
                    target
                } else {
                    self.firm_optimal
                        .as_ref()
                        .expect("worker-flexible profiles carry the firm-optimal matching")
                        .firm_partner(f)
                }
            }
            ProfileKind::FirmFlexible(mode) => {
                if prev.firm_partner(f) == target {
                    return target;
                }
                let home = target?;
                if mode == FlexibleMode::StrictStationary && prev.is_empty() {
                    return target;
                }
                let ceiling = m.firm_utility(f, Some(home));
                let skip = match mode {
                    FlexibleMode::RejectedSet => state.memory.rejected.get(f.0),
                    FlexibleMode::StrictStationary => None,
                };
                m.workers()
                    .filter(|&w| mode == FlexibleMode::RejectedSet || w != home)
                    .filter(|w| skip.is_none_or(|s| !s.contains(w)))
                    .filter(|&w| {
                        let u = m.firm_utility(f, Some(w));
                        u > Utility::zero() && u <= ceiling
                    })
                    .filter(|&w| {
                        m.worker_utility(w, Some(f)) > m.worker_utility(w, prev.worker_partner(w))
                    })
                    .max_by_key(|&w| m.firm_utility(f, Some(w)))
            }
        }
    }

    /// All prescribed offers for the period.
    pub fn offers(
        &self,
        m: &MarketInstance,
        regime: CommitmentRegime,
        state: &PlayState,
    ) -> OfferProfile {
        OfferProfile::new(
            m.firms()
                .map(|f| self.firm_offer(m, regime, state, f))
                .collect(),
        )
    }

    /// The response prescribed to `w` holding `offers`.
    pub fn worker_response(
        &self,
        m: &MarketInstance,
        regime: CommitmentRegime,
        state: &PlayState,
        w: WorkerId,
        offers: &[FirmId],
    ) -> Option<FirmId> {
        let admissible = admissible_responses(m, regime, &state.prev, w, offers);
        if admissible.len() == 1 {
            return *admissible.iter().next().unwrap();
        }
        match self.kind {
            ProfileKind::Idle => None,
            _ => best_response_accept(m, w, offers),
        }
    }

    /// Memory after a period with the given offers and realized matching.
    pub fn next_memory(
        &self,
        state: &PlayState,
        offers: &OfferProfile,
        realized: &Matching,
    ) -> ProfileMemory {
        if !self.uses_memory() {
            return state.memory.clone();
        }
        let mut rejected = state.memory.rejected.clone();
        for (i, set) in rejected.iter_mut().enumerate() {
            let f = FirmId(i);
            if let Some(w) = offers.offer(f) {
                if realized.firm_partner(f) != Some(w) {
                    set.insert(w);
                }
            }
        }
        ProfileMemory { rejected }
    }
}
