use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{HarnessError, Result};

pub const THREADS_ENV: &str = "HYPERSTAT_THREADS";

/// Worker count from `HYPERSTAT_THREADS`; `None` when unset (rayon's default).
pub fn threads_from_env() -> Result<Option<usize>> {
    std::env::var(THREADS_ENV).ok().map_or(Ok(None), |v| parse_threads(&v).map(Some))
}

fn parse_threads(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(HarnessError::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
    }
}

/// A pool of `threads` workers, or as capped by the environment when `None`.
pub fn worker_pool(threads: Option<usize>) -> Result<ThreadPool> {
    let threads = match threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    let mut builder = ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| HarnessError::Pool(e.to_string()))
}
