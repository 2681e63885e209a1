use geowalk_core::exec::Executor;
use rayon::prelude::*;

/// Worker pool sized by `--jobs`. Results come back in index order, so
/// output does not depend on the number of workers.
pub struct Pool(rayon::ThreadPool);

impl Pool {
    /// `jobs = 0` picks the number of available cores.
    pub fn new(jobs: usize) -> Result<Self, crate::Error> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map(Self)
            .map_err(|e| crate::Error::Runtime(format!("cannot start worker pool: {e}")))
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.0.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
