//! Market primitives: agents, utility tables, matchings, commitment regimes and
//! the static stability predicates.
//!
//! Agents are identified by opaque string names. A validated [`MarketInstance`]
//! stores firms and workers in lexicographic name order and hands out dense
//! [`FirmId`] / [`WorkerId`] indices into that order, so every iteration over
//! agents in this crate is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact period utility (and discount factor) value.
pub type Utility = Rational64;

/// Index of a firm in its market's lexicographic firm order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FirmId(pub usize);

/// Index of a worker in its market's lexicographic worker order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerId(pub usize);

/// Either side of the market.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    Firm(FirmId),
    Worker(WorkerId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("agent `{agent}` assigns the same utility to `{first}` and `{second}`")]
    DuplicateUtility {
        agent: String,
        first: String,
        second: String,
    },
    #[error("agent `{agent}` assigns utility 0 to partner `{partner}`")]
    ZeroUtility { agent: String, partner: String },
    #[error("discount factor {value} of `{agent}` is outside (0, 1)")]
    DiscountOutOfRange { agent: String, value: Utility },
    #[error("unknown agent `{0}`")]
    UnknownAgentReference(String),
    #[error("agent name `{0}` is used more than once")]
    DuplicateAgent(String),
    #[error("agent `{agent}` has no utility for `{partner}`")]
    MissingUtility { agent: String, partner: String },
    #[error("agent `{0}` has no discount factor")]
    MissingDiscount(String),
    #[error("a market needs at least one firm and one worker")]
    EmptySide,
}

/// Unvalidated market data, keyed by agent names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawMarket {
    pub firms: Vec<String>,
    pub workers: Vec<String>,
    /// firm -> worker -> utility
    pub firm_utils: BTreeMap<String, BTreeMap<String, Utility>>,
    /// worker -> firm -> utility
    pub worker_utils: BTreeMap<String, BTreeMap<String, Utility>>,
    pub discounts: BTreeMap<String, Utility>,
}

impl RawMarket {
    pub fn new<S: Into<String>>(
        firms: impl IntoIterator<Item = S>,
        workers: impl IntoIterator<Item = S>,
    ) -> Self {
        RawMarket {
            firms: firms.into_iter().map(Into::into).collect(),
            workers: workers.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn firm_utility(mut self, firm: &str, worker: &str, value: Utility) -> Self {
        self.firm_utils
            .entry(firm.to_string())
            .or_default()
            .insert(worker.to_string(), value);
        self
    }

    pub fn worker_utility(mut self, worker: &str, firm: &str, value: Utility) -> Self {
        self.worker_utils
            .entry(worker.to_string())
            .or_default()
            .insert(firm.to_string(), value);
        self
    }

    pub fn discount(mut self, agent: &str, value: Utility) -> Self {
        self.discounts.insert(agent.to_string(), value);
        self
    }

    /// Sets the same discount factor for every agent that has none yet.
    pub fn default_discount(mut self, value: Utility) -> Self {
        for name in self.firms.iter().chain(self.workers.iter()) {
            self.discounts.entry(name.clone()).or_insert(value);
        }
        self
    }

    pub fn validate(self) -> Result<MarketInstance, MarketError> {
        validate_market(self)
    }
}

/// A validated market `(F, W, (u_i, δ_i))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarketInstance {
    firms: Vec<String>,
    workers: Vec<String>,
    firm_utils: Vec<Vec<Utility>>,
    worker_utils: Vec<Vec<Utility>>,
    firm_discounts: Vec<Utility>,
    worker_discounts: Vec<Utility>,
}

/// Checks every market invariant and builds the indexed representation.
pub fn validate_market(raw: RawMarket) -> Result<MarketInstance, MarketError> {
    let RawMarket {
        mut firms,
        mut workers,
        firm_utils,
        worker_utils,
        discounts,
    } = raw;
    if firms.is_empty() || workers.is_empty() {
        return Err(MarketError::EmptySide);
    }
    firms.sort();
    workers.sort();
    let mut seen = BTreeSet::new();
    for name in firms.iter().chain(workers.iter()) {
        if !seen.insert(name.as_str()) {
            return Err(MarketError::DuplicateAgent(name.clone()));
        }
    }
    for (agent, table) in firm_utils.iter() {
        if firms.binary_search(agent).is_err() {
            return Err(MarketError::UnknownAgentReference(agent.clone()));
        }
        if let Some(p) = table.keys().find(|p| workers.binary_search(p).is_err()) {
            return Err(MarketError::UnknownAgentReference(p.clone()));
        }
    }
    for (agent, table) in worker_utils.iter() {
        if workers.binary_search(agent).is_err() {
            return Err(MarketError::UnknownAgentReference(agent.clone()));
        }
        if let Some(p) = table.keys().find(|p| firms.binary_search(p).is_err()) {
            return Err(MarketError::UnknownAgentReference(p.clone()));
        }
    }
    if let Some(agent) = discounts.keys().find(|a| !seen.contains(a.as_str())) {
        return Err(MarketError::UnknownAgentReference(agent.clone()));
    }

    let table = |agent: &str,
                 utils: &BTreeMap<String, BTreeMap<String, Utility>>,
                 partners: &[String]|
     -> Result<Vec<Utility>, MarketError> {
        let row = utils.get(agent);
        let mut values = Vec::with_capacity(partners.len());
        let mut by_value: BTreeMap<Utility, &str> = BTreeMap::new();
        for p in partners {
            let v = *row
                .and_then(|r| r.get(p))
                .ok_or_else(|| MarketError::MissingUtility {
                    agent: agent.to_string(),
                    partner: p.clone(),
                })?;
            if v.is_zero() {
                return Err(MarketError::ZeroUtility {
                    agent: agent.to_string(),
                    partner: p.clone(),
                });
            }
            if let Some(first) = by_value.insert(v, p) {
                return Err(MarketError::DuplicateUtility {
                    agent: agent.to_string(),
                    first: first.to_string(),
                    second: p.clone(),
                });
            }
            values.push(v);
        }
        Ok(values)
    };
    let firm_table = firms
        .iter()
        .map(|f| table(f, &firm_utils, &workers))
        .collect::<Result<Vec<_>, _>>()?;
    let worker_table = workers
        .iter()
        .map(|w| table(w, &worker_utils, &firms))
        .collect::<Result<Vec<_>, _>>()?;

    let discount = |agent: &String| -> Result<Utility, MarketError> {
        let d = *discounts
            .get(agent)
            .ok_or_else(|| MarketError::MissingDiscount(agent.clone()))?;
        if d <= Utility::zero() || d >= Utility::one() {
            return Err(MarketError::DiscountOutOfRange {
                agent: agent.clone(),
                value: d,
            });
        }
        Ok(d)
    };
    let firm_discounts = firms.iter().map(discount).collect::<Result<Vec<_>, _>>()?;
    let worker_discounts = workers.iter().map(discount).collect::<Result<Vec<_>, _>>()?;

    Ok(MarketInstance {
        firms,
        workers,
        firm_utils: firm_table,
        worker_utils: worker_table,
        firm_discounts,
        worker_discounts,
    })
}

impl MarketInstance {
    /// Builds a market from integer utility tables. `firm_utils[i][j]` is the
    /// utility of the i-th firm name for the j-th worker name (in the order
    /// given, not sorted order); `worker_utils[j][i]` likewise.
    pub fn from_tables(
        firms: &[&str],
        workers: &[&str],
        firm_utils: &[Vec<i64>],
        worker_utils: &[Vec<i64>],
        discount: Utility,
    ) -> Result<Self, MarketError> {
        let mut raw = RawMarket::new(firms.iter().copied(), workers.iter().copied());
        for (i, f) in firms.iter().enumerate() {
            for (j, w) in workers.iter().enumerate() {
                if let Some(v) = firm_utils.get(i).and_then(|r| r.get(j)) {
                    raw = raw.firm_utility(f, w, Utility::from_integer(*v));
                }
                if let Some(v) = worker_utils.get(j).and_then(|r| r.get(i)) {
                    raw = raw.worker_utility(w, f, Utility::from_integer(*v));
                }
            }
        }
        raw.default_discount(discount).validate()
    }

    pub fn n_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn n_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn firms(&self) -> impl Iterator<Item = FirmId> + Clone {
        (0..self.firms.len()).map(FirmId)
    }

    pub fn workers(&self) -> impl Iterator<Item = WorkerId> + Clone {
        (0..self.workers.len()).map(WorkerId)
    }

    /// All agents, firms first.
    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        self.firms()
            .map(Agent::Firm)
            .chain(self.workers().map(Agent::Worker))
    }

    pub fn firm_name(&self, f: FirmId) -> &str {
        &self.firms[f.0]
    }

    pub fn worker_name(&self, w: WorkerId) -> &str {
        &self.workers[w.0]
    }

    pub fn agent_name(&self, agent: Agent) -> &str {
        match agent {
            Agent::Firm(f) => self.firm_name(f),
            Agent::Worker(w) => self.worker_name(w),
        }
    }

    pub fn firm_id(&self, name: &str) -> Option<FirmId> {
        self.firms.binary_search_by(|n| n.as_str().cmp(name)).ok().map(FirmId)
    }

    pub fn worker_id(&self, name: &str) -> Option<WorkerId> {
        self.workers
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(WorkerId)
    }

    pub fn agent_id(&self, name: &str) -> Option<Agent> {
        self.firm_id(name)
            .map(Agent::Firm)
            .or_else(|| self.worker_id(name).map(Agent::Worker))
    }

    /// `u_f(partner)`, with `None` meaning unmatched (utility 0).
    pub fn firm_utility(&self, f: FirmId, partner: Option<WorkerId>) -> Utility {
        partner.map_or_else(Utility::zero, |w| self.firm_utils[f.0][w.0])
    }

    /// `u_w(partner)`, with `None` meaning unmatched (utility 0).
    pub fn worker_utility(&self, w: WorkerId, partner: Option<FirmId>) -> Utility {
        partner.map_or_else(Utility::zero, |f| self.worker_utils[w.0][f.0])
    }

    /// Utility of `agent` under matching `mu`.
    pub fn utility_in(&self, agent: Agent, mu: &Matching) -> Utility {
        match agent {
            Agent::Firm(f) => self.firm_utility(f, mu.firm_partner(f)),
            Agent::Worker(w) => self.worker_utility(w, mu.worker_partner(w)),
        }
    }

    pub fn firm_discount(&self, f: FirmId) -> Utility {
        self.firm_discounts[f.0]
    }

    pub fn worker_discount(&self, w: WorkerId) -> Utility {
        self.worker_discounts[w.0]
    }

    pub fn discount(&self, agent: Agent) -> Utility {
        match agent {
            Agent::Firm(f) => self.firm_discount(f),
            Agent::Worker(w) => self.worker_discount(w),
        }
    }

    /// Returns a copy with `agent`'s discount factor replaced.
    pub fn with_discount(&self, agent: Agent, value: Utility) -> Result<Self, MarketError> {
        if value <= Utility::zero() || value >= Utility::one() {
            return Err(MarketError::DiscountOutOfRange {
                agent: self.agent_name(agent).to_string(),
                value,
            });
        }
        let mut out = self.clone();
        match agent {
            Agent::Firm(f) => out.firm_discounts[f.0] = value,
            Agent::Worker(w) => out.worker_discounts[w.0] = value,
        }
        Ok(out)
    }

    /// Back to the name-keyed form; `validate` of the result reproduces `self`.
    pub fn to_raw(&self) -> RawMarket {
        let mut raw = RawMarket::new(self.firms.iter().cloned(), self.workers.iter().cloned());
        for f in self.firms() {
            for w in self.workers() {
                raw = raw.firm_utility(
                    self.firm_name(f),
                    self.worker_name(w),
                    self.firm_utils[f.0][w.0],
                );
                raw = raw.worker_utility(
                    self.worker_name(w),
                    self.firm_name(f),
                    self.worker_utils[w.0][f.0],
                );
            }
        }
        for a in self.agents() {
            raw = raw.discount(self.agent_name(a), self.discount(a));
        }
        raw
    }

    pub fn empty_matching(&self) -> Matching {
        Matching::empty(self.n_firms(), self.n_workers())
    }

    /// Builds a matching from named pairs.
    pub fn matching_from_names(&self, pairs: &[(&str, &str)]) -> Result<Matching, MatchingError> {
        let mut ids = Vec::with_capacity(pairs.len());
        for (f, w) in pairs {
            let f = self
                .firm_id(f)
                .ok_or_else(|| MatchingError::UnknownAgent(f.to_string()))?;
            let w = self
                .worker_id(w)
                .ok_or_else(|| MatchingError::UnknownAgent(w.to_string()))?;
            ids.push((f, w));
        }
        Matching::from_pairs(self.n_firms(), self.n_workers(), ids)
    }

    /// True when `mu` has this market's dimensions.
    pub fn admits(&self, mu: &Matching) -> bool {
        mu.n_firms() == self.n_firms() && mu.n_workers() == self.n_workers()
    }

    /// Renders `mu` as `(f1,w1) (f2,w2)`, or `-` when nobody is matched.
    pub fn display_matching(&self, mu: &Matching) -> String {
        let pairs: Vec<String> = mu
            .pairs()
            .map(|(f, w)| format!("({},{})", self.firm_name(f), self.worker_name(w)))
            .collect();
        if pairs.is_empty() {
            "-".to_string()
        } else {
            pairs.join(" ")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("agent `{0}` is not part of the market")]
    UnknownAgent(String),
    #[error("firm index {0} appears in more than one pair")]
    FirmTwice(usize),
    #[error("worker index {0} appears in more than one pair")]
    WorkerTwice(usize),
    #[error("index out of range")]
    OutOfRange,
}

/// A partial one-to-one assignment of firms to workers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    firm_partner: Vec<Option<WorkerId>>,
    worker_partner: Vec<Option<FirmId>>,
}

impl Matching {
    pub fn empty(n_firms: usize, n_workers: usize) -> Self {
        Matching {
            firm_partner: vec![None; n_firms],
            worker_partner: vec![None; n_workers],
        }
    }

    pub fn from_pairs(
        n_firms: usize,
        n_workers: usize,
        pairs: impl IntoIterator<Item = (FirmId, WorkerId)>,
    ) -> Result<Self, MatchingError> {
        let mut mu = Matching::empty(n_firms, n_workers);
        for (f, w) in pairs {
            if f.0 >= n_firms || w.0 >= n_workers {
                return Err(MatchingError::OutOfRange);
            }
            if mu.firm_partner[f.0].is_some() {
                return Err(MatchingError::FirmTwice(f.0));
            }
            if mu.worker_partner[w.0].is_some() {
                return Err(MatchingError::WorkerTwice(w.0));
            }
            mu.firm_partner[f.0] = Some(w);
            mu.worker_partner[w.0] = Some(f);
        }
        Ok(mu)
    }

    /// Builds the matching `μ(w) = responses[w]`.
    pub(crate) fn from_responses(n_firms: usize, responses: &[Option<FirmId>]) -> Self {
        let mut mu = Matching::empty(n_firms, responses.len());
        for (w, r) in responses.iter().enumerate() {
            if let Some(f) = *r {
                mu.firm_partner[f.0] = Some(WorkerId(w));
                mu.worker_partner[w] = Some(f);
            }
        }
        mu
    }

    pub fn n_firms(&self) -> usize {
        self.firm_partner.len()
    }

    pub fn n_workers(&self) -> usize {
        self.worker_partner.len()
    }

    pub fn firm_partner(&self, f: FirmId) -> Option<WorkerId> {
        self.firm_partner[f.0]
    }

    pub fn worker_partner(&self, w: WorkerId) -> Option<FirmId> {
        self.worker_partner[w.0]
    }

    pub fn is_matched(&self, agent: Agent) -> bool {
        match agent {
            Agent::Firm(f) => self.firm_partner(f).is_some(),
            Agent::Worker(w) => self.worker_partner(w).is_some(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.firm_partner.iter().all(Option::is_none)
    }

    /// Matched pairs in firm order.
    pub fn pairs(&self) -> impl Iterator<Item = (FirmId, WorkerId)> + '_ {
        self.firm_partner
            .iter()
            .enumerate()
            .filter_map(|(f, w)| w.map(|w| (FirmId(f), w)))
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    /// Agents matched to nobody, firms first.
    pub fn unmatched(&self) -> BTreeSet<Agent> {
        let firms = (0..self.n_firms())
            .filter(|&f| self.firm_partner[f].is_none())
            .map(|f| Agent::Firm(FirmId(f)));
        let workers = (0..self.n_workers())
            .filter(|&w| self.worker_partner[w].is_none())
            .map(|w| Agent::Worker(WorkerId(w)));
        firms.chain(workers).collect()
    }

    /// Copy with the pair containing `f` (if any) dissolved.
    pub fn without_firm(&self, f: FirmId) -> Self {
        let mut out = self.clone();
        if let Some(w) = out.firm_partner[f.0].take() {
            out.worker_partner[w.0] = None;
        }
        out
    }
}

/// Which side(s) of the market are bound by last period's matches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommitmentRegime {
    TwoSided,
    NoCommitment,
    FirmOnly,
    WorkerOnly,
}

impl CommitmentRegime {
    pub const ALL: [CommitmentRegime; 4] = [
        CommitmentRegime::TwoSided,
        CommitmentRegime::NoCommitment,
        CommitmentRegime::FirmOnly,
        CommitmentRegime::WorkerOnly,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CommitmentRegime::TwoSided => "two-sided",
            CommitmentRegime::NoCommitment => "none",
            CommitmentRegime::FirmOnly => "firm",
            CommitmentRegime::WorkerOnly => "worker",
        }
    }

    fn binds_firms(self) -> bool {
        matches!(self, CommitmentRegime::TwoSided | CommitmentRegime::FirmOnly)
    }

    fn binds_workers(self) -> bool {
        matches!(self, CommitmentRegime::TwoSided | CommitmentRegime::WorkerOnly)
    }

    /// Whether `f` is inactive (committed to `prev(f)`) this period.
    pub fn firm_inactive(self, prev: &Matching, f: FirmId) -> bool {
        self.binds_firms() && prev.firm_partner(f).is_some()
    }

    /// Whether `w` is inactive (committed to `prev(w)`) this period.
    pub fn worker_inactive(self, prev: &Matching, w: WorkerId) -> bool {
        self.binds_workers() && prev.worker_partner(w).is_some()
    }
}

impl fmt::Display for CommitmentRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CommitmentRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-sided" | "both" => Ok(CommitmentRegime::TwoSided),
            "none" | "no-commitment" => Ok(CommitmentRegime::NoCommitment),
            "firm" | "firm-only" | "firms" => Ok(CommitmentRegime::FirmOnly),
            "worker" | "worker-only" | "workers" => Ok(CommitmentRegime::WorkerOnly),
            other => Err(format!(
                "unknown regime `{other}` (expected two-sided, none, firm or worker)"
            )),
        }
    }
}

/// True iff no matched agent receives negative utility.
pub fn is_individually_rational(m: &MarketInstance, mu: &Matching) -> bool {
    mu.pairs().all(|(f, w)| {
        m.firm_utility(f, Some(w)) >= Utility::zero()
            && m.worker_utility(w, Some(f)) >= Utility::zero()
    })
}

/// Pairs `(f, w)` that strictly prefer each other to their partners in `mu`,
/// in lexicographic (firm, worker) order.
pub fn blocking_pairs(m: &MarketInstance, mu: &Matching) -> Vec<(FirmId, WorkerId)> {
    let mut out = Vec::new();
    for f in m.firms() {
        let current_f = m.firm_utility(f, mu.firm_partner(f));
        for w in m.workers() {
            if m.firm_utility(f, Some(w)) > current_f
                && m.worker_utility(w, Some(f)) > m.worker_utility(w, mu.worker_partner(w))
            {
                out.push((f, w));
            }
        }
    }
    out
}

pub fn is_stable(m: &MarketInstance, mu: &Matching) -> bool {
    is_individually_rational(m, mu) && blocking_pairs(m, mu).is_empty()
}

/// The inactive firms `F_c(prev)` and inactive workers `W_c(prev)`.
pub fn active_sets(
    m: &MarketInstance,
    regime: CommitmentRegime,
    prev: &Matching,
) -> (BTreeSet<FirmId>, BTreeSet<WorkerId>) {
    let firms = m.firms().filter(|&f| regime.firm_inactive(prev, f)).collect();
    let workers = m
        .workers()
        .filter(|&w| regime.worker_inactive(prev, w))
        .collect();
    (firms, workers)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The two-by-two running example with crossed preferences.
    pub(crate) fn m2() -> MarketInstance {
        MarketInstance::from_tables(
            &["f1", "f2"],
            &["w1", "w2"],
            &[vec![2, 1], vec![1, 2]],
            &[vec![1, 2], vec![2, 1]],
            Utility::new(1, 2),
        )
        .unwrap()
    }

    fn r(n: i64) -> Utility {
        Utility::from_integer(n)
    }

    fn m2_raw() -> RawMarket {
        m2().to_raw()
    }

    #[test]
    fn m2_is_valid() {
        let m = m2();
        assert_eq!(m.n_firms(), 2);
        assert_eq!(m.firm_utility(FirmId(0), Some(WorkerId(0))), r(2));
        assert_eq!(m.worker_utility(WorkerId(1), Some(FirmId(0))), r(2));
        assert_eq!(m.firm_utility(FirmId(0), None), r(0));
        assert_eq!(m2_raw().validate().unwrap(), m);
    }

    #[test]
    fn duplicate_utility_is_rejected() {
        let raw = m2_raw().firm_utility("f1", "w2", r(2));
        assert!(matches!(
            raw.validate(),
            Err(MarketError::DuplicateUtility { .. })
        ));
    }

    #[test]
    fn zero_utility_is_rejected() {
        let raw = m2_raw().worker_utility("w2", "f2", r(0));
        assert!(matches!(raw.validate(), Err(MarketError::ZeroUtility { .. })));
    }

    #[test]
    fn discount_bounds_are_exclusive() {
        for bad in [r(1), r(0), Utility::new(3, 2), r(-1)] {
            let raw = m2_raw().discount("w1", bad);
            assert!(matches!(
                raw.validate(),
                Err(MarketError::DiscountOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn unknown_and_missing_references() {
        let raw = m2_raw().firm_utility("f1", "w9", r(5));
        assert_eq!(
            raw.validate(),
            Err(MarketError::UnknownAgentReference("w9".into()))
        );
        let mut raw = m2_raw();
        raw.firm_utils.get_mut("f2").unwrap().remove("w1");
        assert!(matches!(raw.validate(), Err(MarketError::MissingUtility { .. })));
        let mut raw = m2_raw();
        raw.discounts.remove("f2");
        assert_eq!(raw.validate(), Err(MarketError::MissingDiscount("f2".into())));
        let raw = RawMarket::new(["a", "a"], ["b"]);
        assert_eq!(raw.validate(), Err(MarketError::DuplicateAgent("a".into())));
    }

    #[test]
    fn agents_are_sorted_by_name() {
        let m = MarketInstance::from_tables(
            &["zeta", "alpha"],
            &["w"],
            &[vec![1], vec![2]],
            &[vec![1, 2]],
            Utility::new(1, 2),
        )
        .unwrap();
        assert_eq!(m.firm_name(FirmId(0)), "alpha");
        // alpha was listed second, so its utilities are the second row/column
        assert_eq!(m.firm_utility(FirmId(0), Some(WorkerId(0))), r(2));
        assert_eq!(m.worker_utility(WorkerId(0), Some(FirmId(0))), r(2));
    }

    #[test]
    fn individual_rationality() {
        let m = m2();
        assert!(is_individually_rational(&m, &m.empty_matching()));
        let mu = m
            .matching_from_names(&[("f1", "w1"), ("f2", "w2")])
            .unwrap();
        assert!(is_individually_rational(&m, &mu));
        let m = m2_raw().worker_utility("w1", "f1", r(-1)).validate().unwrap();
        let mu = m.matching_from_names(&[("f1", "w1")]).unwrap();
        assert!(!is_individually_rational(&m, &mu));
    }

    #[test]
    fn blocking_pairs_of_m2() {
        let m = m2();
        let firm_opt = m
            .matching_from_names(&[("f1", "w1"), ("f2", "w2")])
            .unwrap();
        let worker_opt = m
            .matching_from_names(&[("f1", "w2"), ("f2", "w1")])
            .unwrap();
        assert!(blocking_pairs(&m, &firm_opt).is_empty());
        assert!(blocking_pairs(&m, &worker_opt).is_empty());
        assert_eq!(
            blocking_pairs(&m, &m.empty_matching()),
            vec![
                (FirmId(0), WorkerId(0)),
                (FirmId(0), WorkerId(1)),
                (FirmId(1), WorkerId(0)),
                (FirmId(1), WorkerId(1)),
            ]
        );
        assert!(is_stable(&m, &firm_opt));
        assert!(is_stable(&m, &worker_opt));
        assert!(!is_stable(&m, &m.empty_matching()));
    }

    #[test]
    fn active_sets_per_regime() {
        let m = m2();
        let mu = m.matching_from_names(&[("f1", "w1")]).unwrap();
        let (fc, wc) = active_sets(&m, CommitmentRegime::NoCommitment, &mu);
        assert!(fc.is_empty() && wc.is_empty());
        let (fc, wc) = active_sets(&m, CommitmentRegime::FirmOnly, &mu);
        assert_eq!(fc, BTreeSet::from([FirmId(0)]));
        assert!(wc.is_empty());
        let (fc, wc) = active_sets(&m, CommitmentRegime::WorkerOnly, &m.empty_matching());
        assert!(fc.is_empty() && wc.is_empty());
        let (fc, wc) = active_sets(&m, CommitmentRegime::TwoSided, &mu);
        assert_eq!(fc, BTreeSet::from([FirmId(0)]));
        assert_eq!(wc, BTreeSet::from([WorkerId(0)]));
    }

    #[test]
    fn matching_rejects_double_assignment() {
        assert_eq!(
            Matching::from_pairs(2, 2, [(FirmId(0), WorkerId(0)), (FirmId(0), WorkerId(1))]),
            Err(MatchingError::FirmTwice(0))
        );
        assert_eq!(
            Matching::from_pairs(2, 2, [(FirmId(0), WorkerId(0)), (FirmId(1), WorkerId(0))]),
            Err(MatchingError::WorkerTwice(0))
        );
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("none".parse(), Ok(CommitmentRegime::NoCommitment));
        assert_eq!("firm".parse(), Ok(CommitmentRegime::FirmOnly));
        assert!("sideways".parse::<CommitmentRegime>().is_err());
        for r in CommitmentRegime::ALL {
            assert_eq!(r.label().parse(), Ok(r));
        }
    }
}
