//! Stable matchings: deferred acceptance for the two side-optimal matchings and
//! a brute-force enumeration of the whole stable set used as an oracle.

use std::collections::VecDeque;

use num_traits::Zero;
use thiserror::Error;

use crate::market::{is_stable, Agent, FirmId, MarketInstance, Matching, Utility, WorkerId};

/// Largest side size accepted by the brute-force routines.
pub const ENUMERATION_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgorithmError {
    #[error("instance is {firms}x{workers}; brute force is limited to {ENUMERATION_LIMIT}x{ENUMERATION_LIMIT}")]
    InstanceTooLarge { firms: usize, workers: usize },
    #[error("no stable matching is simultaneously optimal for every {0}")]
    InternalLatticeViolation(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProposingSide {
    Firms,
    Workers,
}

/// Deferred acceptance with the given side proposing.
///
/// Proposers are processed in index order and propose in descending order of
/// their own utility, never to unacceptable partners. Receivers hold their
/// best acceptable offer so far.
pub fn deferred_acceptance(m: &MarketInstance, side: ProposingSide) -> Matching {
    let (n_prop, n_recv) = match side {
        ProposingSide::Firms => (m.n_firms(), m.n_workers()),
        ProposingSide::Workers => (m.n_workers(), m.n_firms()),
    };
    let prop_util = |p: usize, r: usize| -> Utility {
        match side {
            ProposingSide::Firms => m.firm_utility(FirmId(p), Some(WorkerId(r))),
            ProposingSide::Workers => m.worker_utility(WorkerId(p), Some(FirmId(r))),
        }
    };
    let recv_util = |r: usize, p: usize| -> Utility {
        match side {
            ProposingSide::Firms => m.worker_utility(WorkerId(r), Some(FirmId(p))),
            ProposingSide::Workers => m.firm_utility(FirmId(r), Some(WorkerId(p))),
        }
    };

    let mut lists: Vec<VecDeque<usize>> = (0..n_prop)
        .map(|p| {
            let mut acceptable: Vec<usize> =
                (0..n_recv).filter(|&r| prop_util(p, r) > Utility::zero()).collect();
            acceptable.sort_by_key(|&a| std::cmp::Reverse(prop_util(p, a)));
            acceptable.into()
        })
        .collect();
    let mut held: Vec<Option<usize>> = vec![None; n_recv];
    let mut free: VecDeque<usize> = (0..n_prop).collect();

    while let Some(p) = free.pop_front() {
        let Some(r) = lists[p].pop_front() else {
            continue;
        };
        let offer = recv_util(r, p);
        if offer <= Utility::zero() {
            free.push_back(p);
            continue;
        }
        match held[r] {
            None => held[r] = Some(p),
            Some(q) if offer > recv_util(r, q) => {
                held[r] = Some(p);
                free.push_back(q);
            }
            Some(_) => free.push_back(p),
        }
    }

    let pairs = held.iter().enumerate().filter_map(|(r, p)| {
        p.map(|p| match side {
            ProposingSide::Firms => (FirmId(p), WorkerId(r)),
            ProposingSide::Workers => (FirmId(r), WorkerId(p)),
        })
    });
    Matching::from_pairs(m.n_firms(), m.n_workers(), pairs)
        .expect("deferred acceptance holds at most one proposer per receiver")
}

fn check_size(m: &MarketInstance) -> Result<(), AlgorithmError> {
    if m.n_firms() > ENUMERATION_LIMIT || m.n_workers() > ENUMERATION_LIMIT {
        return Err(AlgorithmError::InstanceTooLarge {
            firms: m.n_firms(),
            workers: m.n_workers(),
        });
    }
    Ok(())
}

/// Every partial one-to-one matching of `m`, each exactly once.
///
/// Order: firms are assigned in index order, each trying "unmatched" first and
/// then workers in index order.
pub fn enumerate_all_matchings(m: &MarketInstance) -> Result<Vec<Matching>, AlgorithmError> {
    check_size(m)?;
    fn extend(
        f: usize,
        nf: usize,
        nw: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<(FirmId, WorkerId)>,
        out: &mut Vec<Matching>,
    ) {
        if f == nf {
            out.push(Matching::from_pairs(nf, nw, current.iter().copied()).unwrap());
            return;
        }
        extend(f + 1, nf, nw, used, current, out);
        for w in 0..nw {
            if !used[w] {
                used[w] = true;
                current.push((FirmId(f), WorkerId(w)));
                extend(f + 1, nf, nw, used, current, out);
                current.pop();
                used[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(
        0,
        m.n_firms(),
        m.n_workers(),
        &mut vec![false; m.n_workers()],
        &mut Vec::new(),
        &mut out,
    );
    Ok(out)
}

/// The stable set of a market together with its two side-optimal members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSetReport {
    pub all_matchings_count: usize,
    pub stable: Vec<Matching>,
    pub firm_optimal: Matching,
    pub worker_optimal: Matching,
}

pub fn enumerate_stable_set(m: &MarketInstance) -> Result<StableSetReport, AlgorithmError> {
    let all = enumerate_all_matchings(m)?;
    let all_matchings_count = all.len();
    let stable: Vec<Matching> = all.into_iter().filter(|mu| is_stable(m, mu)).collect();

    let optimum = |side: &'static str, agents: Vec<Agent>| {
        stable
            .iter()
            .find(|cand| {
                stable.iter().all(|other| {
                    agents
                        .iter()
                        .all(|&a| m.utility_in(a, cand) >= m.utility_in(a, other))
                })
            })
            .cloned()
            .ok_or(AlgorithmError::InternalLatticeViolation(side))
    };
    let firm_optimal = optimum("firm", m.firms().map(Agent::Firm).collect())?;
    let worker_optimal = optimum("worker", m.workers().map(Agent::Worker).collect())?;
    Ok(StableSetReport {
        all_matchings_count,
        stable,
        firm_optimal,
        worker_optimal,
    })
}

/// Result of comparing unmatched agents across the stable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleAgentCheck {
    pub holds: bool,
    /// Two stable matchings and an agent single in the first but not the second.
    pub witness: Option<(Matching, Matching, Agent)>,
}

pub fn check_single_agent_property(m: &MarketInstance) -> Result<SingleAgentCheck, AlgorithmError> {
    let report = enumerate_stable_set(m)?;
    let reference = &report.stable[0];
    let reference_single = reference.unmatched();
    for other in &report.stable[1..] {
        let single = other.unmatched();
        if let Some(&agent) = reference_single.symmetric_difference(&single).next() {
            let (a, b) = if reference_single.contains(&agent) {
                (reference.clone(), other.clone())
            } else {
                (other.clone(), reference.clone())
            };
            return Ok(SingleAgentCheck {
                holds: false,
                witness: Some((a, b, agent)),
            });
        }
    }
    Ok(SingleAgentCheck {
        holds: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::tests::m2;
    use crate::market::Utility;

    fn m1() -> MarketInstance {
        MarketInstance::from_tables(
            &["f1", "f2"],
            &["w1", "w2"],
            &[vec![2, 1], vec![1, 2]],
            &[vec![2, 1], vec![1, 2]],
            Utility::new(1, 2),
        )
        .unwrap()
    }

    #[test]
    fn deferred_acceptance_on_m2() {
        let m = m2();
        assert_eq!(
            deferred_acceptance(&m, ProposingSide::Firms),
            m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap()
        );
        assert_eq!(
            deferred_acceptance(&m, ProposingSide::Workers),
            m.matching_from_names(&[("f1", "w2"), ("f2", "w1")]).unwrap()
        );
    }

    #[test]
    fn unacceptable_worker_stays_single() {
        let m = MarketInstance::from_tables(
            &["f1", "f2"],
            &["w1", "w2"],
            &[vec![2, 1], vec![1, 2]],
            &[vec![-1, -2], vec![2, 1]],
            Utility::new(1, 2),
        )
        .unwrap();
        let mu = deferred_acceptance(&m, ProposingSide::Firms);
        assert_eq!(mu.worker_partner(WorkerId(0)), None);
        assert!(is_stable(&m, &mu));
    }

    #[test]
    fn matching_counts() {
        let m = m2();
        assert_eq!(enumerate_all_matchings(&m).unwrap().len(), 7);
        let one = MarketInstance::from_tables(&["f"], &["w"], &[vec![1]], &[vec![1]], Utility::new(1, 2))
            .unwrap();
        assert_eq!(enumerate_all_matchings(&one).unwrap().len(), 2);
        let three = MarketInstance::from_tables(
            &["a", "b", "c"],
            &["x", "y", "z"],
            &[vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]],
            &[vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]],
            Utility::new(1, 2),
        )
        .unwrap();
        assert_eq!(enumerate_all_matchings(&three).unwrap().len(), 34);
    }

    #[test]
    fn too_large_is_refused() {
        let names: Vec<String> = (0..8).map(|i| format!("a{i}")).collect();
        let ws: Vec<String> = (0..1).map(|i| format!("w{i}")).collect();
        let f: Vec<&str> = names.iter().map(String::as_str).collect();
        let w: Vec<&str> = ws.iter().map(String::as_str).collect();
        let m = MarketInstance::from_tables(
            &f,
            &w,
            &(0..8).map(|_| vec![1]).collect::<Vec<_>>(),
            &[(1..=8).collect()],
            Utility::new(1, 2),
        )
        .unwrap();
        assert!(matches!(
            enumerate_all_matchings(&m),
            Err(AlgorithmError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn stable_sets() {
        let m = m2();
        let rep = enumerate_stable_set(&m).unwrap();
        assert_eq!(rep.stable.len(), 2);
        assert_eq!(rep.firm_optimal, deferred_acceptance(&m, ProposingSide::Firms));
        assert_eq!(rep.worker_optimal, deferred_acceptance(&m, ProposingSide::Workers));

        let m = m1();
        let rep = enumerate_stable_set(&m).unwrap();
        let only = m.matching_from_names(&[("f1", "w1"), ("f2", "w2")]).unwrap();
        assert_eq!(rep.stable, vec![only.clone()]);
        assert_eq!(rep.firm_optimal, only);
        assert_eq!(rep.worker_optimal, only);

        let pair = MarketInstance::from_tables(&["f"], &["w"], &[vec![3]], &[vec![4]], Utility::new(1, 3))
            .unwrap();
        let rep = enumerate_stable_set(&pair).unwrap();
        assert_eq!(rep.stable, vec![pair.matching_from_names(&[("f", "w")]).unwrap()]);
    }

    #[test]
    fn single_agent_property_on_small_markets() {
        assert!(check_single_agent_property(&m2()).unwrap().holds);
        assert!(check_single_agent_property(&m1()).unwrap().holds);
    }
}
