//! Ordered first-hit search over an index range, split into fixed-size
//! chunks. The reported hit and the accumulated step count depend only on
//! the chunk size, never on the number of workers.

use std::sync::atomic::{AtomicU64, Ordering};
use std::ops::AddAssign;
use std::sync::Mutex;

use crate::error::Result;

pub const DEFAULT_CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome<T, A = u64> {
    /// Smallest index whose probe reported a hit, with its payload.
    pub first: Option<(u64, T)>,
    /// Probes executed in the prefix ending at the hit (or all of them).
    pub evaluated: u64,
    /// Steps summed over the same prefix.
    pub steps: A,
}

struct ChunkResult<T, A> {
    chunk: u64,
    evaluated: u64,
    steps: A,
    hit: Option<(u64, Result<T>)>,
}

/// Runs `probe(index, &mut steps)` over `0..total` and returns the smallest
/// index with `Ok(Some(_))`. An `Err` from a probe counts as a hit; if it is
/// the earliest one it is returned as the overall error.
pub fn first_hit<T, A, F>(
    total: u64,
    workers: usize,
    chunk: u64,
    probe: F,
) -> Result<SearchOutcome<T, A>>
where
    T: Send,
    A: Default + AddAssign + Send,
    F: Fn(u64, &mut A) -> Result<Option<T>> + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    let run_chunk = |c: u64| -> ChunkResult<T, A> {
        let start = c * chunk;
        let end = (start + chunk).min(total);
        let mut steps = A::default();
        for idx in start..end {
            match probe(idx, &mut steps) {
                Ok(None) => {}
                Ok(Some(t)) => return hit(c, idx, start, steps, Ok(t)),
                Err(e) => return hit(c, idx, start, steps, Err(e)),
            }
        }
        ChunkResult {
            chunk: c,
            evaluated: end - start,
            steps,
            hit: None,
        }
    };

    let mut results: Vec<ChunkResult<T, A>> = if workers <= 1 || n_chunks <= 1 {
        let mut out = Vec::new();
        for c in 0..n_chunks {
            let r = run_chunk(c);
            let stop = r.hit.is_some();
            out.push(r);
            if stop {
                break;
            }
        }
        out
    } else {
        let next = AtomicU64::new(0);
        let earliest = AtomicU64::new(u64::MAX);
        let collected = Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for _ in 0..workers.min(n_chunks as usize) {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let c = next.fetch_add(1, Ordering::SeqCst);
                        if c >= n_chunks || c > earliest.load(Ordering::SeqCst) {
                            break;
                        }
                        let r = run_chunk(c);
                        if r.hit.is_some() {
                            earliest.fetch_min(c, Ordering::SeqCst);
                        }
                        local.push(r);
                    }
                    collected.lock().expect("no worker panicked").extend(local);
                });
            }
        });
        collected.into_inner().expect("no worker panicked")
    };

    results.sort_by_key(|r| r.chunk);
    let mut evaluated = 0;
    let mut steps = A::default();
    for (expected, r) in results.into_iter().enumerate() {
        debug_assert_eq!(r.chunk, expected as u64, "chunks before the first hit all ran");
        evaluated += r.evaluated;
        steps += r.steps;
        if let Some((idx, payload)) = r.hit {
            return Ok(SearchOutcome {
                first: Some((idx, payload?)),
                evaluated,
                steps,
            });
        }
    }
    Ok(SearchOutcome {
        first: None,
        evaluated,
        steps,
    })
}

fn hit<T, A>(c: u64, idx: u64, start: u64, steps: A, payload: Result<T>) -> ChunkResult<T, A> {
    ChunkResult {
        chunk: c,
        evaluated: idx - start + 1,
        steps,
        hit: Some((idx, payload)),
    }
}

/// Maps `f` over `items` on up to `workers` threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let per = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(per)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}
