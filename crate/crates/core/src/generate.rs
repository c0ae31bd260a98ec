//! Seeded random markets.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::{MarketInstance, RawMarket, Utility};

/// Largest side size `generate_market` accepts.
pub const MAX_SIDE: usize = 7;

/// Nonzero integers in `[−3, 12]`; twelve of the fifteen are acceptable.
const UTILITY_POOL: [i64; 15] = [-3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// A random market with `n_firms` firms `f1…` and `n_workers` workers `w1…`.
///
/// Each agent draws distinct utilities for its potential partners from
/// `[−3, 12] \ {0}` and a discount factor `k/100` with `k ∈ [6, 94]`. The
/// result depends only on the three arguments.
pub fn generate_market(seed: u64, n_firms: usize, n_workers: usize) -> MarketInstance {
    assert!(
        (1..=MAX_SIDE).contains(&n_firms) && (1..=MAX_SIDE).contains(&n_workers),
        "market sides must have between 1 and {MAX_SIDE} agents"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let firms: Vec<String> = (1..=n_firms).map(|i| format!("f{i}")).collect();
    let workers: Vec<String> = (1..=n_workers).map(|i| format!("w{i}")).collect();
    let mut raw = RawMarket::new(firms.clone(), workers.clone());
    let draw = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Utility> {
        sample(rng, UTILITY_POOL.len(), n)
            .into_iter()
            .map(|i| Utility::from_integer(UTILITY_POOL[i]))
            .collect()
    };
    for f in &firms {
        for (w, u) in workers.iter().zip(draw(&mut rng, n_workers)) {
            raw = raw.firm_utility(f, w, u);
        }
    }
    for w in &workers {
        for (f, u) in firms.iter().zip(draw(&mut rng, n_firms)) {
            raw = raw.worker_utility(w, f, u);
        }
    }
    for a in firms.iter().chain(workers.iter()) {
        let k: i64 = rng.gen_range(6..=94);
        raw = raw.discount(a, Utility::new(k, 100));
    }
    raw.validate()
        .expect("generated utilities are distinct and nonzero, discounts lie in (0, 1)")
}
