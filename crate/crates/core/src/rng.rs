//! Seeded random streams. Every stochastic routine takes an explicit seed so
//! that runs are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for Monte Carlo trial `trial` under `master`.
pub fn trial_stream(master: u64, trial: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

/// Sample `k` distinct values from `0..n` excluding `exclude`, in draw order.
pub fn sample_distinct<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    exclude: &[usize],
) -> Option<Vec<usize>> {
    let mut pool: Vec<usize> = (0..n).filter(|i| !exclude.contains(i)).collect();
    if pool.len() < k {
        return None;
    }
    // partial Fisher-Yates
    for slot in 0..k {
        let j = rng.random_range(slot..pool.len());
        pool.swap(slot, j);
    }
    pool.truncate(k);
    Some(pool)
}
