//! Deterministic data-parallel evaluation over the family.
//!
//! Work is cut into B-stripes; results of each batch of stripes are
//! collected in stripe order before the single consumer sees them, so the
//! output never depends on the thread count.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use selmerlab::{CurvePair, FamilyWindow};

use crate::{CliError, CliResult, RunConfig};

/// Stripes evaluated per batch and thread.
const STRIPES_PER_THREAD: usize = 4;

#[derive(Debug, Clone)]
pub enum WorkUnit {
    /// Every member with this B.
    Stripe(i64),
    /// An explicit run of members sharing one B, in increasing A.
    Curves(Vec<CurvePair>),
}

impl WorkUnit {
    pub fn curves<'a>(&'a self, window: &'a FamilyWindow) -> Box<dyn Iterator<Item = CurvePair> + 'a> {
        match self {
            WorkUnit::Stripe(b) => Box::new(window.stripe(*b)),
            WorkUnit::Curves(cs) => Box::new(cs.iter().copied()),
        }
    }
}

/// The whole window, or a seeded uniform sample of it grouped by B.
pub fn work_units(window: &FamilyWindow, sample: Option<u64>, seed: u64) -> CliResult<Vec<WorkUnit>> {
    let Some(k) = sample else {
        return Ok(window.stripes().into_iter().map(WorkUnit::Stripe).collect());
    };
    let n = window.iter().count();
    let k = usize::try_from(k).map_err(|_| CliError::Config(format!("--sample {k} too large")))?;
    if k > n {
        return Err(CliError::Config(format!("--sample {k} exceeds the {n} curves in the window")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, n, k).into_vec();
    chosen.sort_unstable();
    let mut units: Vec<WorkUnit> = Vec::new();
    let mut next = chosen.into_iter().peekable();
    for (i, c) in window.iter().enumerate() {
        if next.peek() != Some(&i) {
            continue;
        }
        next.next();
        match units.last_mut() {
            Some(WorkUnit::Curves(cs)) if cs[0].b == c.b => cs.push(c),
            _ => units.push(WorkUnit::Curves(vec![c])),
        }
    }
    Ok(units)
}

/// Maps `f` over the units in parallel and feeds results to `sink` in unit
/// order.
pub fn ordered_map<T, F, S>(cfg: &RunConfig, units: &[WorkUnit], f: F, mut sink: S) -> CliResult<()>
where
    T: Send,
    F: Fn(&WorkUnit) -> T + Sync,
    S: FnMut(T) -> CliResult<()>,
{
    let pool = cfg.pool()?;
    let batch = pool.current_num_threads().max(1) * STRIPES_PER_THREAD;
    for chunk in units.chunks(batch) {
        let results: Vec<T> = pool.install(|| chunk.par_iter().map(&f).collect());
        for r in results {
            sink(r)?;
        }
    }
    Ok(())
}
