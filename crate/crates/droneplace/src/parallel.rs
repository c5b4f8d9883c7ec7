//! Thread budget and executors.
//!
//! `DRONEPLACE_THREADS` caps every pool this crate builds. Work is split
//! into independent pure tasks whose results are collected in task order,
//! so outputs never depend on the thread count.

use std::thread;

use droneplace_core::ddp::DdpOutcome;
use droneplace_core::eddp::RegionExecutor;
use droneplace_core::Result;

pub const THREADS_ENV: &str = "DRONEPLACE_THREADS";

/// Thread budget: `DRONEPLACE_THREADS` if set to a positive integer,
/// otherwise the available parallelism.
pub fn thread_budget() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Rayon pool with exactly `threads` workers.
pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool construction")
}

/// Runs partition regions on scoped OS threads, at most `threads` at once.
#[derive(Debug, Clone, Copy)]
pub struct ThreadedRegions {
    pub threads: usize,
}

impl RegionExecutor for ThreadedRegions {
    fn run(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<DdpOutcome> + Sync)) -> Vec<Result<DdpOutcome>> {
        if self.threads <= 1 || jobs <= 1 {
            return (0..jobs).map(job).collect();
        }
        let mut out = Vec::with_capacity(jobs);
        let batch = self.threads;
        let mut start = 0;
        while start < jobs {
            let end = (start + batch).min(jobs);
            let results: Vec<Result<DdpOutcome>> = thread::scope(|s| {
                let handles: Vec<_> = (start..end).map(|r| s.spawn(move || job(r))).collect();
                handles.into_iter().map(|h| h.join().expect("region worker panicked")).collect()
            });
            out.extend(results);
            start = end;
        }
        out
    }
}
