//! Bounded fan-out of independent per-document jobs onto worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `jobs` closures on at most `concurrency` workers, returning results
/// in job order. Results depend only on each job's index, so any concurrency
/// level produces the same output vector.
pub fn run_parallel<T, F>(jobs: usize, concurrency: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if jobs == 0 {
        return Vec::new();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    let workers = concurrency.clamp(1, jobs);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= jobs {
                    return;
                }
                let result = work(index);
                results.lock().unwrap()[index] = Some(result);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every job ran"))
        .collect()
}
