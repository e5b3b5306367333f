//! Deterministic parallel execution.
//!
//! Work is cut into fixed tasks (one per orbit, or one per chunk of Monte
//! Carlo samples). Task `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so results do not depend on the number of workers or on
//! scheduling. Partial accumulators are merged pairwise in task order.

use cuspflow_core::dynamics::DkAcc;
use cuspflow_core::stats::Accumulator;
use cuspflow_core::theta::SubgroupAcc;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::error::CliResult;

/// Partial results that combine associatively.
pub trait Merge: Sized {
    fn merge(&self, other: &Self) -> Self;
}

impl Merge for Accumulator {
    fn merge(&self, other: &Self) -> Self {
        Accumulator::merge(self, other)
    }
}

impl Merge for DkAcc {
    fn merge(&self, other: &Self) -> Self {
        DkAcc::merge(self, other)
    }
}

impl Merge for SubgroupAcc {
    fn merge(&self, other: &Self) -> Self {
        SubgroupAcc::merge(self, other)
    }
}

impl Merge for Vec<u64> {
    fn merge(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
}

/// Balanced pairwise reduction in index order.
pub fn merge_tree<T: Merge + Clone>(parts: &[T]) -> Option<T> {
    match parts.len() {
        0 => None,
        1 => Some(parts[0].clone()),
        n => {
            let (a, b) = parts.split_at(n / 2);
            Some(merge_tree(a)?.merge(&merge_tree(b)?))
        }
    }
}

/// The RNG stream of task `i`.
pub fn task_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

#[derive(Debug, Clone, Copy)]
pub struct Runner {
    pub seed: u64,
    pub workers: usize,
    /// Samples per task in [`Runner::accumulate`].
    pub chunk: u64,
}

impl Runner {
    pub fn new(seed: u64, workers: usize, chunk: u64) -> Self {
        Runner {
            seed,
            workers: workers.max(1),
            chunk: chunk.max(1),
        }
    }

    /// Run `f(i, rng_i)` for tasks `first .. first + n`, results in task order.
    pub fn map<T, F>(&self, first: u64, n: u64, f: F) -> CliResult<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &mut ChaCha8Rng) -> CliResult<T> + Sync,
    {
        let seed = self.seed;
        let run = || {
            (first..first + n)
                .into_par_iter()
                .map(|i| f(i, &mut task_rng(seed, i)))
                .collect::<CliResult<Vec<T>>>()
        };
        if self.workers == 1 {
            return (first..first + n).map(|i| f(i, &mut task_rng(seed, i))).collect();
        }
        rayon::ThreadPoolBuilder::new().num_threads(self.workers).build()?.install(run)
    }

    /// Split `n_samples` into chunks on streams `first, first + 1, …`, run
    /// `f(chunk_len, rng)` on each and merge the results.
    pub fn accumulate<T, F>(&self, first: u64, n_samples: u64, f: F) -> CliResult<T>
    where
        T: Merge + Clone + Send,
        F: Fn(u64, &mut ChaCha8Rng) -> CliResult<T> + Sync,
    {
        let chunk = self.chunk;
        let tasks = n_samples.div_ceil(chunk).max(1);
        let parts = self.map(first, tasks, |i, rng| {
            let start = (i - first) * chunk;
            f(chunk.min(n_samples - start), rng)
        })?;
        Ok(merge_tree(&parts).expect("at least one task"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cuspflow_core::rng::uniform;

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |n: u64, rng: &mut ChaCha8Rng| {
            let mut a = Accumulator::new();
            for _ in 0..n {
                a.push(uniform(rng));
            }
            Ok(a)
        };
        let one = Runner::new(9, 1, 100).accumulate(0, 1050, f).unwrap();
        let three = Runner::new(9, 3, 100).accumulate(0, 1050, f).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.n, 1050);
        assert!((one.mean - 0.5).abs() < 0.05);
    }

    #[test]
    fn streams_differ() {
        use rand_core::RngCore;
        let (mut a, mut b) = (task_rng(1, 0), task_rng(1, 1));
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(task_rng(1, 5).next_u64(), task_rng(1, 5).next_u64());
    }

    #[test]
    fn merge_tree_matches_sequential_counts() {
        let parts = vec![vec![1u64, 2], vec![3, 4], vec![5, 6]];
        assert_eq!(merge_tree(&parts).unwrap(), vec![9, 12]);
        assert!(merge_tree::<Vec<u64>>(&[]).is_none());
    }
}
