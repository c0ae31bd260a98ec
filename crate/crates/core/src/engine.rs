//! The repeated two-stage game: firms offer, workers respond, and the realized
//! matching becomes next period's state.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use thiserror::Error;

use crate::market::{
    Agent, CommitmentRegime, FirmId, MarketInstance, Matching, Utility, WorkerId,
};
use crate::strategies::{ProfileMemory, StationaryStrategyProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("infeasible offer by {firm}: {reason}")]
    InfeasibleOffer { firm: String, reason: String },
    #[error("infeasible response by {worker}: {reason}")]
    InfeasibleResponse { worker: String, reason: String },
    #[error("no recurring state within {max_periods} periods")]
    NoStationaryTail {
        max_periods: usize,
        periods: Vec<PeriodRecord>,
    },
}

/// `o_f` for every firm; `None` means the firm makes no offer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OfferProfile(Vec<Option<WorkerId>>);

impl OfferProfile {
    pub fn new(offers: Vec<Option<WorkerId>>) -> Self {
        OfferProfile(offers)
    }

    pub fn offer(&self, f: FirmId) -> Option<WorkerId> {
        self.0[f.0]
    }

    pub fn as_slice(&self) -> &[Option<WorkerId>] {
        &self.0
    }

    /// `O_w`: the firms that made an offer to `w`, in index order.
    pub fn received(&self, w: WorkerId) -> Vec<FirmId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == Some(w))
            .map(|(i, _)| FirmId(i))
            .collect()
    }

    pub fn set(&mut self, f: FirmId, offer: Option<WorkerId>) {
        self.0[f.0] = offer;
    }
}

/// `r_w` for every worker; `None` means the worker rejects everything.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResponseProfile(Vec<Option<FirmId>>);

impl ResponseProfile {
    pub fn new(responses: Vec<Option<FirmId>>) -> Self {
        ResponseProfile(responses)
    }

    pub fn response(&self, w: WorkerId) -> Option<FirmId> {
        self.0[w.0]
    }

    pub fn as_slice(&self) -> &[Option<FirmId>] {
        &self.0
    }
}

/// `O_f(prev)`.
pub fn feasible_offers(
    m: &MarketInstance,
    regime: CommitmentRegime,
    prev: &Matching,
    f: FirmId,
) -> BTreeSet<Option<WorkerId>> {
    if regime.firm_inactive(prev, f) {
        return BTreeSet::from([prev.firm_partner(f)]);
    }
    std::iter::once(None).chain(m.workers().map(Some)).collect()
}

/// `R_w(prev, O_w)`. An inactive worker whose employer did not renew is
/// released for the period and can only stay single.
pub fn admissible_responses(
    _m: &MarketInstance,
    regime: CommitmentRegime,
    prev: &Matching,
    w: WorkerId,
    received: &[FirmId],
) -> BTreeSet<Option<FirmId>> {
    if regime.worker_inactive(prev, w) {
        let employer = prev.worker_partner(w);
        return match employer {
            Some(f) if received.contains(&f) => BTreeSet::from([Some(f)]),
            _ => BTreeSet::from([None]),
        };
    }
    std::iter::once(None)
        .chain(received.iter().copied().map(Some))
        .collect()
}

/// Realized matching of one period, after checking both stages against `prev`.
pub fn play_period(
    m: &MarketInstance,
    regime: CommitmentRegime,
    prev: &Matching,
    offers: &OfferProfile,
    responses: &ResponseProfile,
) -> Result<Matching, EngineError> {
    if offers.0.len() != m.n_firms() || responses.0.len() != m.n_workers() {
        return Err(EngineError::InfeasibleOffer {
            firm: "-".into(),
            reason: "profile size does not match the market".into(),
        });
    }
    for f in m.firms() {
        let o = offers.offer(f);
        if !feasible_offers(m, regime, prev, f).contains(&o) {
            return Err(EngineError::InfeasibleOffer {
                firm: m.firm_name(f).to_string(),
                reason: format!(
                    "committed to {} but offered {}",
                    worker_label(m, prev.firm_partner(f), f),
                    worker_label(m, o, f)
                ),
            });
        }
    }
    for w in m.workers() {
        let r = responses.response(w);
        let received = offers.received(w);
        if !admissible_responses(m, regime, prev, w, &received).contains(&r) {
            let reason = match r {
                Some(f) if !received.contains(&f) => {
                    format!("accepted {} without an offer from it", m.firm_name(f))
                }
                _ => format!(
                    "committed to {} but responded {}",
                    firm_label(m, prev.worker_partner(w), w),
                    firm_label(m, r, w)
                ),
            };
            return Err(EngineError::InfeasibleResponse {
                worker: m.worker_name(w).to_string(),
                reason,
            });
        }
    }
    Ok(Matching::from_responses(m.n_firms(), &responses.0))
}

fn worker_label(m: &MarketInstance, o: Option<WorkerId>, f: FirmId) -> String {
    match o {
        Some(w) => m.worker_name(w).to_string(),
        None => m.firm_name(f).to_string(),
    }
}

fn firm_label(m: &MarketInstance, r: Option<FirmId>, w: WorkerId) -> String {
    match r {
        Some(f) => m.firm_name(f).to_string(),
        None => m.worker_name(w).to_string(),
    }
}

/// What the profile conditions on at the start of a period.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayState {
    pub prev: Matching,
    pub memory: ProfileMemory,
}

/// A departure from the profile by a single agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Deviation {
    /// In the first period only, `firm` offers `offer` instead.
    Offer {
        firm: FirmId,
        offer: Option<WorkerId>,
    },
    /// In the first period only, `worker` responds `response` instead.
    Response {
        worker: WorkerId,
        response: Option<FirmId>,
    },
    /// `worker` turns down every offer worth at most `reservation`, accepts
    /// the best one above it, and follows the profile afterwards.
    ResignAndWait {
        worker: WorkerId,
        reservation: Utility,
    },
}

impl Deviation {
    pub fn agent(&self) -> Agent {
        match *self {
            Deviation::Offer { firm, .. } => Agent::Firm(firm),
            Deviation::Response { worker, .. } | Deviation::ResignAndWait { worker, .. } => {
                Agent::Worker(worker)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodRecord {
    pub offers: OfferProfile,
    pub responses: ResponseProfile,
    pub matching: Matching,
}

/// A finite prefix of play followed by a detected periodic tail.
///
/// Periods are 1-based: `matching_at(t)` for `t ≥ tail_start` repeats with
/// period `cycle_len`. All canonical profiles produce `cycle_len == 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Matching,
    pub periods: Vec<PeriodRecord>,
    /// State at the beginning of each recorded period.
    pub states: Vec<PlayState>,
    pub tail_start: usize,
    pub cycle_len: usize,
}

impl Trace {
    pub fn matching_at(&self, t: usize) -> &Matching {
        assert!(t >= 1, "periods are numbered from 1");
        let idx = if t <= self.periods.len() {
            t
        } else {
            self.tail_start + (t - self.tail_start) % self.cycle_len
        };
        &self.periods[idx - 1].matching
    }

    /// The matching played from `tail_start` on, when the tail is constant.
    pub fn tail_matching(&self) -> Option<&Matching> {
        (self.cycle_len == 1).then(|| self.matching_at(self.tail_start))
    }

    /// The periods a firm can reconstruct: its own offers and the public
    /// matchings.
    pub fn firm_view(&self, f: FirmId) -> Vec<(Option<WorkerId>, &Matching)> {
        self.periods
            .iter()
            .map(|p| (p.offers.offer(f), &p.matching))
            .collect()
    }

    /// The periods a worker can reconstruct: the offers she received and the
    /// public matchings.
    pub fn worker_view(&self, w: WorkerId) -> Vec<(Vec<FirmId>, &Matching)> {
        self.periods
            .iter()
            .map(|p| (p.offers.received(w), &p.matching))
            .collect()
    }

    /// One line per period: `t | f1→x; f2→y | w1→a; w2→b | pairs`.
    pub fn render(&self, m: &MarketInstance) -> String {
        let mut out = String::new();
        for (i, p) in self.periods.iter().enumerate() {
            writeln!(out, "{}", render_period(m, i + 1, p)).unwrap();
        }
        writeln!(out, "tail {} cycle {}", self.tail_start, self.cycle_len).unwrap();
        out
    }
}

pub fn render_period(m: &MarketInstance, t: usize, p: &PeriodRecord) -> String {
    let offers: Vec<String> = m
        .firms()
        .map(|f| format!("{}→{}", m.firm_name(f), worker_label(m, p.offers.offer(f), f)))
        .collect();
    let responses: Vec<String> = m
        .workers()
        .map(|w| {
            format!(
                "{}→{}",
                m.worker_name(w),
                firm_label(m, p.responses.response(w), w)
            )
        })
        .collect();
    format!(
        "{t} | {} | {} | {}",
        offers.join("; "),
        responses.join("; "),
        m.display_matching(&p.matching)
    )
}

/// Periods simulated before giving up on recurrence.
pub fn default_max_periods(m: &MarketInstance) -> usize {
    2 * m.n_firms() * m.n_workers() + 4
}

/// Play `profile` from `μ^0 = μ_∅`.
pub fn simulate(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    max_periods: usize,
) -> Result<Trace, EngineError> {
    simulate_from(m, regime, profile, profile.initial_state(m), None, max_periods)
}

fn deviation_response(
    m: &MarketInstance,
    regime: CommitmentRegime,
    prev: &Matching,
    w: WorkerId,
    reservation: Utility,
    received: &[FirmId],
) -> Option<FirmId> {
    let admissible = admissible_responses(m, regime, prev, w, received);
    let better = admissible
        .iter()
        .flatten()
        .copied()
        .filter(|&f| m.worker_utility(w, Some(f)) > reservation)
        .max_by_key(|&f| m.worker_utility(w, Some(f)));
    match better {
        Some(f) => Some(f),
        None if admissible.contains(&None) => None,
        None => *admissible.iter().next().unwrap(),
    }
}

/// Play `profile` from an arbitrary state, with an optional unilateral
/// deviation starting in the first simulated period.
pub fn simulate_from(
    m: &MarketInstance,
    regime: CommitmentRegime,
    profile: &StationaryStrategyProfile,
    start: PlayState,
    deviation: Option<&Deviation>,
    max_periods: usize,
) -> Result<Trace, EngineError> {
    let start_matching = start.prev.clone();
    let mut seen: HashMap<(PlayState, bool), usize> = HashMap::new();
    let mut periods: Vec<PeriodRecord> = Vec::new();
    let mut states: Vec<PlayState> = Vec::new();
    let mut state = start;
    let mut deviating = deviation.is_some();
    let mut t = 1;
    let (tail_start, cycle_len) = loop {
        let key = (state.clone(), deviating);
        if let Some(&t0) = seen.get(&key) {
            break (t0, t - t0);
        }
        if t > max_periods {
            return Err(EngineError::NoStationaryTail {
                max_periods,
                periods,
            });
        }
        seen.insert(key, t);

        let mut offers = profile.offers(m, regime, &state);
        if let (true, Some(Deviation::Offer { firm, offer })) = (deviating, deviation) {
            offers.set(*firm, *offer);
        }
        let mut responses = Vec::with_capacity(m.n_workers());
        for w in m.workers() {
            let received = offers.received(w);
            let r = match (deviating, deviation) {
                (true, Some(Deviation::Response { worker, response })) if *worker == w => {
                    *response
                }
                (true, Some(Deviation::ResignAndWait { worker, reservation })) if *worker == w => {
                    deviation_response(m, regime, &state.prev, w, *reservation, &received)
                }
                _ => profile.worker_response(m, regime, &state, w, &received),
            };
            responses.push(r);
        }
        let responses = ResponseProfile::new(responses);
        let matching = play_period(m, regime, &state.prev, &offers, &responses)?;

        deviating = match deviation {
            Some(Deviation::ResignAndWait { worker, .. }) if deviating => {
                responses.response(*worker).is_none()
            }
            _ => false,
        };
        let memory = profile.next_memory(&state, &offers, &matching);
        states.push(state);
        periods.push(PeriodRecord {
            offers,
            responses,
            matching: matching.clone(),
        });
        state = PlayState {
            prev: matching,
            memory,
        };
        t += 1;
    };

    // Shift the tail start back while the period before it already matches
    // the cycle, so a trace constant from period 1 reports tail_start = 1.
    let mut tail_start = tail_start;
    while tail_start > 1
        && periods[tail_start - 2].matching == periods[tail_start - 2 + cycle_len].matching
    {
        tail_start -= 1;
    }
    Ok(Trace {
        start: start_matching,
        periods,
        states,
        tail_start,
        cycle_len,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscountedPayoff {
    pub agent: Agent,
    pub value: BigRational,
}

pub fn big(r: Utility) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Back to a machine-sized rational, when it fits.
pub fn to_utility(r: &BigRational) -> Option<Utility> {
    use num_traits::ToPrimitive;
    Some(Utility::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Σ_t δ^{t−1} u(μ^t(agent))` in closed form: the prefix before the tail is
/// summed directly and the periodic tail as a geometric series.
pub fn discounted_payoff(m: &MarketInstance, trace: &Trace, agent: Agent) -> DiscountedPayoff {
    let delta = big(m.discount(agent));
    let u = |t: usize| big(m.utility_in(agent, trace.matching_at(t)));
    let mut value = BigRational::zero();
    let mut weight = BigRational::one();
    for t in 1..trace.tail_start {
        value += &weight * u(t);
        weight *= &delta;
    }
    let mut cycle = BigRational::zero();
    let mut inner = BigRational::one();
    for j in 0..trace.cycle_len {
        cycle += &inner * u(trace.tail_start + j);
        inner *= &delta;
    }
    value += weight * cycle / (BigRational::one() - inner);
    DiscountedPayoff { agent, value }
}

/// `Σ_{t ≤ horizon} δ^{t−1} u(μ^t(agent))`.
///
/// Summed as `Σ p^{t−1} q^{T−t} n_t / (L q^{T−1})` over integers, with
/// `δ = p/q` and `L` the common denominator of the utilities, so long
/// horizons do not pay for a gcd every period.
pub fn truncated_payoff(
    m: &MarketInstance,
    trace: &Trace,
    agent: Agent,
    horizon: usize,
) -> BigRational {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    if horizon == 0 {
        return BigRational::zero();
    }
    let delta = m.discount(agent);
    let (p, q) = (BigInt::from(*delta.numer()), BigInt::from(*delta.denom()));
    let us: Vec<Utility> = (1..=horizon)
        .map(|t| m.utility_in(agent, trace.matching_at(t)))
        .collect();
    let l = us.iter().fold(1i64, |acc, u| acc / gcd(acc, *u.denom()) * u.denom());
    let mut acc = BigInt::zero();
    let mut p_pow = BigInt::one();
    for u in &us {
        acc = acc * &q + &p_pow * BigInt::from(u.numer() * (l / u.denom()));
        p_pow *= &p;
    }
    BigRational::new(acc, BigInt::from(l) * Pow::pow(&q, horizon - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::tests::m2;
    use crate::market::is_individually_rational;
    use crate::strategies::{
        profile_firm_commit_restrictive, profile_idle, profile_no_commitment,
        profile_target_offers,
    };

    fn r(n: i64, d: i64) -> BigRational {
        big(Utility::new(n, d))
    }

    fn w(i: usize) -> Option<WorkerId> {
        Some(WorkerId(i))
    }

    fn f(i: usize) -> Option<FirmId> {
        Some(FirmId(i))
    }

    #[test]
    fn feasible_offer_sets() {
        let m = m2();
        let prev = m.matching_from_names(&[("f1", "w1")]).unwrap();
        assert_eq!(
            feasible_offers(&m, CommitmentRegime::FirmOnly, &prev, FirmId(0)),
            BTreeSet::from([w(0)])
        );
        let all = BTreeSet::from([None, w(0), w(1)]);
        assert_eq!(
            feasible_offers(&m, CommitmentRegime::NoCommitment, &prev, FirmId(0)),
            all
        );
        assert_eq!(
            feasible_offers(&m, CommitmentRegime::WorkerOnly, &prev, FirmId(0)),
            all
        );
    }

    #[test]
    fn admissible_response_sets() {
        let m = m2();
        let both = [FirmId(0), FirmId(1)];
        assert_eq!(
            admissible_responses(&m, CommitmentRegime::NoCommitment, &m.empty_matching(), WorkerId(0), &both),
            BTreeSet::from([None, f(0), f(1)])
        );
        let prev = m.matching_from_names(&[("f1", "w1")]).unwrap();
        assert_eq!(
            admissible_responses(&m, CommitmentRegime::WorkerOnly, &prev, WorkerId(0), &both),
            BTreeSet::from([f(0)])
        );
        assert_eq!(
            admissible_responses(&m, CommitmentRegime::WorkerOnly, &prev, WorkerId(0), &[FirmId(1)]),
            BTreeSet::from([None])
        );
    }

    #[test]
    fn play_period_examples() {
        let m = m2();
        let empty = m.empty_matching();
        let got = play_period(
            &m,
            CommitmentRegime::NoCommitment,
            &empty,
            &OfferProfile::new(vec![w(0), w(1)]),
            &ResponseProfile::new(vec![f(0), f(1)]),
        )
        .unwrap();
        assert_eq!(got, m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap());

        let got = play_period(
            &m,
            CommitmentRegime::NoCommitment,
            &empty,
            &OfferProfile::new(vec![w(0), w(0)]),
            &ResponseProfile::new(vec![f(1), None]),
        )
        .unwrap();
        assert_eq!(got, m.matching_from_names(&[("f2", "w1")]).unwrap());

        let prev = m.matching_from_names(&[("f1", "w1")]).unwrap();
        let err = play_period(
            &m,
            CommitmentRegime::FirmOnly,
            &prev,
            &OfferProfile::new(vec![w(1), None]),
            &ResponseProfile::new(vec![None, None]),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::InfeasibleOffer { ref firm, .. } if firm == "f1"));

        let err = play_period(
            &m,
            CommitmentRegime::NoCommitment,
            &empty,
            &OfferProfile::new(vec![None, None]),
            &ResponseProfile::new(vec![f(0), None]),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::InfeasibleResponse { ref worker, .. } if worker == "w1"));
    }

    #[test]
    fn simulate_examples() {
        let m = m2();
        let mu_f = m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap();
        let mu_w = m.matching_from_names(&[("f1", "w2"), ("f2", "w1")]).unwrap();

        let t = simulate(&m, CommitmentRegime::NoCommitment, &profile_no_commitment(&m, &mu_f).unwrap(), 10)
            .unwrap();
        assert_eq!(t.tail_start, 1);
        assert_eq!(t.tail_matching(), Some(&mu_f));

        let t = simulate(
            &m,
            CommitmentRegime::FirmOnly,
            &profile_firm_commit_restrictive(&m, &mu_w).unwrap(),
            10,
        )
        .unwrap();
        assert_eq!(t.tail_start, 1);
        assert_eq!(t.tail_matching(), Some(&mu_w));

        for regime in CommitmentRegime::ALL {
            let t = simulate(&m, regime, &profile_idle(&m), 10).unwrap();
            assert_eq!(t.tail_start, 1);
            assert_eq!(t.tail_matching(), Some(&m.empty_matching()));
        }
    }

    #[test]
    fn unstable_target_can_cycle_or_drift() {
        let m = m2();
        let odd = m.matching_from_names(&[("f2", "w1")]).unwrap();
        let p = profile_target_offers(&m, &odd).unwrap();
        let t = simulate(&m, CommitmentRegime::NoCommitment, &p, 10).unwrap();
        assert_eq!(t.tail_matching(), Some(&odd));
        for period in &t.periods {
            assert!(is_individually_rational(&m, &period.matching));
        }
    }

    #[test]
    fn one_shot_deviation_reverts() {
        let m = m2();
        let mu_f = m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap();
        let p = profile_no_commitment(&m, &mu_f).unwrap();
        let dev = Deviation::Offer { firm: FirmId(0), offer: w(1) };
        let t = simulate_from(&m, CommitmentRegime::NoCommitment, &p, p.initial_state(&m), Some(&dev), 10)
            .unwrap();
        // w2 prefers f1 to f2, so she takes the deviating offer.
        assert_eq!(t.periods[0].matching, m.matching_from_names(&[("f1", "w2")]).unwrap());
        assert_eq!(t.tail_start, 2);
        assert_eq!(t.tail_matching(), Some(&mu_f));
        // f1: 1 + δ·2/(1−δ) = 1 + 2 = 3 against 4 on path.
        assert_eq!(discounted_payoff(&m, &t, Agent::Firm(FirmId(0))).value, r(3, 1));
    }

    #[test]
    fn payoff_examples() {
        let m = m2();
        let mu_f = m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap();
        let constant = Trace {
            start: m.empty_matching(),
            periods: vec![PeriodRecord {
                offers: OfferProfile::new(vec![w(0), w(1)]),
                responses: ResponseProfile::new(vec![f(0), f(1)]),
                matching: mu_f.clone(),
            }],
            states: vec![],
            tail_start: 1,
            cycle_len: 1,
        };
        assert_eq!(discounted_payoff(&m, &constant, Agent::Firm(FirmId(0))).value, r(4, 1));

        let idle = PeriodRecord {
            offers: OfferProfile::new(vec![None, None]),
            responses: ResponseProfile::new(vec![None, None]),
            matching: m.empty_matching(),
        };
        let delayed = Trace {
            start: m.empty_matching(),
            periods: vec![idle.clone(), idle.clone(), constant.periods[0].clone()],
            states: vec![],
            tail_start: 3,
            cycle_len: 1,
        };
        // u = 2 for f1 at μ_F: δ²·u/(1−δ) = u/2 = 1.
        assert_eq!(discounted_payoff(&m, &delayed, Agent::Firm(FirmId(0))).value, r(1, 1));

        let empty = Trace {
            periods: vec![idle],
            ..constant.clone()
        };
        assert!(discounted_payoff(&m, &empty, Agent::Worker(WorkerId(1))).value.is_zero());
    }

    #[test]
    fn periodic_tail_payoff() {
        let m = m2();
        let a = m.matching_from_names(&[("f1", "w1")]).unwrap();
        let b = m.empty_matching();
        let rec = |mu: &Matching| PeriodRecord {
            offers: OfferProfile::new(vec![None, None]),
            responses: ResponseProfile::new(vec![None, None]),
            matching: mu.clone(),
        };
        let t = Trace {
            start: b.clone(),
            periods: vec![rec(&a), rec(&b)],
            states: vec![],
            tail_start: 1,
            cycle_len: 2,
        };
        // 2 + 0 + 2/4 + 0 + ... = 2/(1 − 1/4) = 8/3.
        assert_eq!(discounted_payoff(&m, &t, Agent::Firm(FirmId(0))).value, r(8, 3));
        assert_eq!(t.matching_at(5), &a);
        assert_eq!(t.matching_at(6), &b);
        assert_eq!(t.tail_matching(), None);
    }

    #[test]
    fn render_uses_arrow_grammar() {
        let m = m2();
        let mu_f = m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap();
        let t = simulate(&m, CommitmentRegime::NoCommitment, &profile_no_commitment(&m, &mu_f).unwrap(), 10)
            .unwrap();
        assert_eq!(
            t.render(&m),
            "1 | f1→w1; f2→w2 | w1→f1; w2→f2 | (f1,w1) (f2,w2)\n\
             2 | f1→w1; f2→w2 | w1→f1; w2→f2 | (f1,w1) (f2,w2)\n\
             tail 1 cycle 1\n"
        );
    }
}
