//! Fixed-size worker pool shared by the pair scan, the superstep engine and
//! selective recomputation.

use std::fmt;
use std::sync::Arc;

use rayon::{ThreadPool, ThreadPoolBuilder};

#[derive(Clone)]
pub struct Workers {
    pool: Arc<ThreadPool>,
    count: usize,
}

impl Workers {
    /// Builds a pool with `count` threads; zero is treated as one.
    pub fn new(count: usize) -> Self {
        let count = count.max(1);
        let pool = ThreadPoolBuilder::new()
            .num_threads(count)
            .thread_name(|i| format!("leashwatch-{i}"))
            .build()
            .expect("failed to spawn worker threads");
        Self {
            pool: Arc::new(pool),
            count,
        }
    }

    pub fn single() -> Self {
        Self::new(1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn install<R, F>(&self, f: F) -> R
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        self.pool.install(f)
    }
}

impl fmt::Debug for Workers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Workers").field("count", &self.count).finish()
    }
}
