//! Vacancy chains after a worker resigns from a stable matching, and the
//! discount thresholds derived from them.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use thiserror::Error;

use crate::algorithms::{deferred_acceptance, ProposingSide};
use crate::engine::{big, render_period, OfferProfile, PeriodRecord, ResponseProfile};
use crate::market::{is_stable, FirmId, MarketInstance, Matching, Utility, WorkerId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestabilizationError {
    #[error("matching {0} is not stable")]
    NotStable(String),
    #[error("worker {0} is unmatched, so she has nothing to resign from")]
    WorkerUnmatched(String),
    #[error("no firm ever makes worker {0} a better offer")]
    NoImprovingOffer(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestabilizationEvent {
    pub period: usize,
    pub firm: FirmId,
    pub worker: WorkerId,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestabilizationOutcome {
    pub resigning_worker: WorkerId,
    pub initial: Matching,
    pub final_matching: Matching,
    /// Periods after the resignation period up to and including the one in
    /// which `ν(w)`'s offer is accepted.
    pub periods_waited: usize,
    pub event_log: Vec<RestabilizationEvent>,
    /// Full offers and responses of every period, for rendering as a trace.
    pub periods: Vec<PeriodRecord>,
}

impl RestabilizationOutcome {
    pub fn render(&self, m: &MarketInstance) -> String {
        let mut out = String::new();
        for (i, p) in self.periods.iter().enumerate() {
            out.push_str(&render_period(m, i + 1, p));
            out.push('\n');
        }
        for e in &self.event_log {
            out.push_str(&format!(
                "event {} {} {} {}\n",
                e.period,
                m.firm_name(e.firm),
                m.worker_name(e.worker),
                if e.accepted { "accepted" } else { "rejected" }
            ));
        }
        out
    }
}

fn check_stable(m: &MarketInstance, mu: &Matching) -> Result<(), RestabilizationError> {
    if !m.admits(mu) || !is_stable(m, mu) {
        return Err(RestabilizationError::NotStable(m.display_matching(mu)));
    }
    Ok(())
}

/// Runs the vacancy chain triggered by `w` quitting `μ(w)`.
///
/// Period 1: `w` rejects her employer and everybody else renews. In every
/// later period each vacant firm (one that was matched under `μ` and has lost
/// its worker) continues down its list from `μ(f)`: it offers the worker it
/// likes best among those it ranks no higher than `μ(f)` that have not turned
/// it down, are acceptable to it, and would leave their current position for
/// it. Workers take their best offer if it beats where they are;
/// `w` only takes offers beating `u_w(μ(w))`. The chain runs until no vacant
/// firm has anyone left to ask.
pub fn restabilize(
    m: &MarketInstance,
    mu: &Matching,
    w: WorkerId,
) -> Result<RestabilizationOutcome, RestabilizationError> {
    check_stable(m, mu)?;
    let Some(f0) = mu.worker_partner(w) else {
        return Err(RestabilizationError::WorkerUnmatched(m.worker_name(w).to_string()));
    };
    let reservation = m.worker_utility(w, Some(f0));

    let mut event_log = vec![RestabilizationEvent {
        period: 1,
        firm: f0,
        worker: w,
        accepted: false,
    }];
    let mut records = Vec::new();
    let mut current = mu.without_firm(f0);
    {
        let offers = OfferProfile::new(m.firms().map(|f| mu.firm_partner(f)).collect());
        let responses =
            ResponseProfile::new(m.workers().map(|x| current.worker_partner(x)).collect());
        records.push(PeriodRecord {
            offers,
            responses,
            matching: current.clone(),
        });
    }

    let mut rejected: Vec<BTreeSet<WorkerId>> = vec![BTreeSet::new(); m.n_firms()];
    rejected[f0.0].insert(w);
    let mut accepted_at: Option<usize> = None;
    let mut period = 1;

    loop {
        let vacant: Vec<FirmId> = m
            .firms()
            .filter(|&f| mu.firm_partner(f).is_some() && current.firm_partner(f).is_none())
            .collect();
        let floor = |x: WorkerId, cur: &Matching| {
            if x == w && cur.worker_partner(x).is_none() {
                reservation
            } else {
                m.worker_utility(x, cur.worker_partner(x))
            }
        };
        let mut offers: Vec<Option<WorkerId>> = m.firms().map(|f| current.firm_partner(f)).collect();
        let mut any = false;
        for &f in &vacant {
            let ceiling = m.firm_utility(f, mu.firm_partner(f));
            let target = m
                .workers()
                .filter(|x| !rejected[f.0].contains(x))
                .filter(|&x| {
                    let u = m.firm_utility(f, Some(x));
                    u > Utility::zero() && u <= ceiling
                })
                .filter(|&x| m.worker_utility(x, Some(f)) > m.worker_utility(x, current.worker_partner(x)))
                .max_by_key(|&x| m.firm_utility(f, Some(x)));
            offers[f.0] = target;
            any |= target.is_some();
        }
        if !any {
            break;
        }
        period += 1;
        let offers = OfferProfile::new(offers);
        let mut responses = Vec::with_capacity(m.n_workers());
        for x in m.workers() {
            let stay = current.worker_partner(x);
            let best_new = offers
                .received(x)
                .into_iter()
                .filter(|&f| Some(f) != stay)
                .max_by_key(|&f| m.worker_utility(x, Some(f)));
            let r = match best_new {
                Some(f) if m.worker_utility(x, Some(f)) > floor(x, &current) => Some(f),
                _ => stay,
            };
            for f in offers.received(x) {
                if Some(f) == stay {
                    continue;
                }
                let accepted = r == Some(f);
                event_log.push(RestabilizationEvent {
                    period,
                    firm: f,
                    worker: x,
                    accepted,
                });
                if !accepted {
                    rejected[f.0].insert(x);
                }
            }
            if x == w && r != stay {
                accepted_at = Some(period);
            }
            responses.push(r);
        }
        current = Matching::from_responses(m.n_firms(), &responses);
        records.push(PeriodRecord {
            offers,
            responses: ResponseProfile::new(responses),
            matching: current.clone(),
        });
    }

    let Some(accepted_at) = accepted_at else {
        return Err(RestabilizationError::NoImprovingOffer(m.worker_name(w).to_string()));
    };
    Ok(RestabilizationOutcome {
        resigning_worker: w,
        initial: mu.clone(),
        final_matching: current,
        periods_waited: accepted_at - 1,
        event_log,
        periods: records,
    })
}

/// A threshold of the form `base^(1/root)` with `0 < base ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub base: Utility,
    pub root: u32,
}

impl Threshold {
    pub const ONE: Threshold = Threshold {
        base: Utility::new_raw(1, 1),
        root: 1,
    };

    pub fn is_one(&self) -> bool {
        self.base == Utility::one()
    }

    pub fn value(&self) -> f64 {
        self.base.to_f64().unwrap().powf(1.0 / f64::from(self.root))
    }

    /// Exact test of `δ > base^(1/root)`.
    pub fn is_exceeded_by(&self, delta: &BigRational) -> bool {
        Pow::pow(delta, self.root) > big(self.base)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root == 1 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "({})^(1/{})", self.base, self.root)
        }
    }
}

/// `c^w = (u_w(μ(w)) / u_w(ν(w)))^(1/k(w))`, or 1 when `w` cannot improve.
pub fn worker_threshold(
    m: &MarketInstance,
    mu: &Matching,
    w: WorkerId,
) -> Result<Threshold, RestabilizationError> {
    match restabilize(m, mu, w) {
        Ok(out) => {
            let stay = m.worker_utility(w, mu.worker_partner(w));
            let better = m.worker_utility(w, out.final_matching.worker_partner(w));
            Ok(Threshold {
                base: stay / better,
                root: out.periods_waited as u32,
            })
        }
        Err(RestabilizationError::NoImprovingOffer(_))
        | Err(RestabilizationError::WorkerUnmatched(_)) => Ok(Threshold::ONE),
        Err(e) => Err(e),
    }
}

/// `c^f = u_f(μ(f)) / u_f(μ_F(f))`, or 1 when `f` is unmatched under `μ`.
pub fn firm_threshold(
    m: &MarketInstance,
    mu: &Matching,
    f: FirmId,
) -> Result<Threshold, RestabilizationError> {
    check_stable(m, mu)?;
    if mu.firm_partner(f).is_none() {
        return Ok(Threshold::ONE);
    }
    let firm_opt = deferred_acceptance(m, ProposingSide::Firms);
    Ok(Threshold {
        base: m.firm_utility(f, mu.firm_partner(f)) / m.firm_utility(f, firm_opt.firm_partner(f)),
        root: 1,
    })
}

/// The closed form `Σ_{t ≥ from} δ^{t−1} u = δ^{from−1} u / (1 − δ)`.
pub fn geometric_tail(delta: &BigRational, u: Utility, from: u32) -> BigRational {
    Pow::pow(delta, from - 1) * big(u) / (BigRational::one() - delta)
}

pub fn big_from_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
