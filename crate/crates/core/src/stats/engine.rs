//! Deterministic fan-out over independent paths.
//!
//! Path `i` always draws from stream `i` of the labelled [`StreamFactory`].
//! Paths are grouped into fixed chunks of [`CHUNK`]; each chunk is processed
//! serially and chunk results are combined in chunk order, so the output does
//! not depend on the number of workers.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{PathRng, StreamFactory};
use crate::stats::accum::Accumulator;

pub const CHUNK: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub n_paths: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(seed: u64, n_paths: u64) -> Self {
        RunConfig {
            seed,
            n_paths,
            workers: None,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        RunConfig {
            workers: Some(workers),
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidSpec("number of paths must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidSpec("number of workers must be positive".into()));
        }
        Ok(())
    }
}

fn chunks(n_paths: u64) -> Vec<Range<u64>> {
    (0..n_paths.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(n_paths))
        .collect()
}

#[cfg(feature = "parallel")]
fn run_chunks<T, F>(config: &RunConfig, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    let ranges = chunks(config.n_paths);
    let go = || ranges.into_par_iter().map(&job).collect::<Result<Vec<T>>>();
    match config.workers {
        None => go(),
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("worker pool: {e}")))?
            .install(go),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_chunks<T, F>(config: &RunConfig, job: F) -> Result<Vec<T>>
where
    F: Fn(Range<u64>) -> Result<T>,
{
    chunks(config.n_paths).into_iter().map(job).collect()
}

/// Runs `path` once per path and returns the results in path order.
pub fn collect<T, F>(config: &RunConfig, label: &str, path: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut PathRng) -> Result<T> + Sync,
{
    config.validate()?;
    let streams = StreamFactory::new(config.seed, label);
    let parts = run_chunks(config, |range| {
        range
            .map(|i| path(i, &mut streams.stream(i)))
            .collect::<Result<Vec<T>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Lets every path push observations into `width` accumulators and merges
/// them deterministically.
pub fn accumulate<F>(config: &RunConfig, label: &str, width: usize, path: F) -> Result<Vec<Accumulator>>
where
    F: Fn(&mut PathRng, &mut [Accumulator]) -> Result<()> + Sync,
{
    config.validate()?;
    let streams = StreamFactory::new(config.seed, label);
    let parts = run_chunks(config, |range| {
        let mut acc = vec![Accumulator::default(); width];
        for i in range {
            path(&mut streams.stream(i), &mut acc)?;
        }
        Ok(acc)
    })?;
    let mut total = vec![Accumulator::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunking_covers_all_paths() {
        assert_eq!(chunks(1), vec![0..1]);
        assert_eq!(chunks(CHUNK), vec![0..CHUNK]);
        assert_eq!(chunks(CHUNK + 3), vec![0..CHUNK, CHUNK..CHUNK + 3]);
    }

    #[test]
    fn collect_is_ordered_and_reproducible() {
        let cfg = RunConfig::new(3, 1000).with_workers(3);
        let a = collect(&cfg, "c", |i, rng| Ok((i, rng.gen::<u32>()))).unwrap();
        assert!(a.iter().enumerate().all(|(k, (i, _))| k as u64 == *i));
        let b = collect(&cfg.with_workers(1), "c", |i, rng| Ok((i, rng.gen::<u32>()))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accumulate_is_worker_independent() {
        let run = |w| {
            accumulate(&RunConfig::new(5, 3000).with_workers(w), "a", 2, |rng, acc| {
                let x: f64 = rng.gen();
                acc[0].push(x);
                acc[1].push(x.ln());
                Ok(())
            })
            .unwrap()
        };
        let one = run(1);
        for w in [2, 4, 7] {
            assert_eq!(run(w), one);
        }
        assert_eq!(one[0].count, 3000);
    }

    #[test]
    fn errors_propagate() {
        let err = collect(&RunConfig::new(1, 10), "e", |i, _| {
            if i == 7 {
                Err(Error::EmptySample)
            } else {
                Ok(())
            }
        });
        assert!(matches!(err, Err(Error::EmptySample)));
        assert!(collect(&RunConfig::new(1, 0), "e", |_, _| Ok(())).is_err());
        assert!(collect(&RunConfig::new(1, 5).with_workers(0), "e", |_, _| Ok(())).is_err());
    }
}
