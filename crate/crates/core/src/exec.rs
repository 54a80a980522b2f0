//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work fans out over rayon.
//! Without it, or with [`Executor::Sequential`], everything runs in order on
//! the calling thread. Both paths return results in input order.

/// How batch work is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    /// Rayon execution. `threads == 0` uses the global pool; otherwise a
    /// dedicated pool of that size is built for the call.
    #[cfg(feature = "parallel")]
    Parallel {
        threads: usize,
    },
}

// Derivable only when `parallel` is off.
#[allow(clippy::derivable_impls)]
impl Default for Executor {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Executor::Parallel { threads: 0 }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Executor::Sequential
        }
    }
}

impl Executor {
    /// Parallel with a dedicated pool of `threads` workers when available.
    pub fn bounded(threads: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            Executor::Parallel {
                threads: threads.max(1),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Executor::Sequential
        }
    }

    pub fn is_parallel(&self) -> bool {
        !matches!(self, Executor::Sequential)
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => items.into_iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel { threads } => {
                use rayon::prelude::*;
                self.install(*threads, || items.into_par_iter().map(f).collect())
            }
        }
    }

    /// Maps `f` over a borrowed slice, preserving order.
    pub fn map_ref<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel { threads } => {
                use rayon::prelude::*;
                self.install(*threads, || items.par_iter().map(f).collect())
            }
        }
    }

    /// Runs both closures, concurrently when parallel.
    pub fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        match self {
            Executor::Sequential => (a(), b()),
            #[cfg(feature = "parallel")]
            Executor::Parallel { threads } => self.install(*threads, || rayon::join(a, b)),
        }
    }

    #[cfg(feature = "parallel")]
    fn install<R: Send>(&self, threads: usize, op: impl FnOnce() -> R + Send) -> R {
        if threads == 0 {
            return op();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_on_every_executor() {
        let input: Vec<u32> = (0..200).collect();
        let expected: Vec<u32> = input.iter().map(|x| x * 3).collect();
        for exec in [
            Executor::Sequential,
            Executor::default(),
            Executor::bounded(3),
        ] {
            assert_eq!(exec.map(input.clone(), |x| x * 3), expected);
            assert_eq!(exec.map_ref(&input, |x| x * 3), expected);
        }
    }

    #[test]
    fn join_returns_both() {
        assert_eq!(Executor::bounded(2).join(|| 1, || "b"), (1, "b"));
        assert_eq!(Executor::Sequential.join(|| 1, || 2), (1, 2));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn bounded_pool_uses_worker_threads() {
        use std::collections::HashSet;
        use std::sync::Mutex;
        let seen = Mutex::new(HashSet::new());
        Executor::bounded(4).map((0..64).collect::<Vec<_>>(), |_| {
            std::thread::sleep(std::time::Duration::from_millis(1));
            seen.lock().unwrap().insert(std::thread::current().id());
        });
        assert!(seen.lock().unwrap().len() > 1);
    }
}
