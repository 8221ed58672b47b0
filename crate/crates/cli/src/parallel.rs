//! Parallel survival-curve driver: particle-index ranges are distributed
//! across the rayon pool and the per-range histograms merged; results are
//! bit-identical for any worker count because every particle's stream is
//! keyed by `(seed, index)` alone.

use mupolab_core::geometry::BoundaryModel;
use mupolab_core::montecarlo::{survival_curve_range, SurvivalCurve};
use rayon::prelude::*;

const CHUNK: u64 = 50_000;

pub fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MUPOLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("thread pool")
}

pub fn survival_curve_parallel(
    model: &BoundaryModel,
    n_particles: u64,
    edges: &[f64],
    t_max: f64,
    seed: u64,
) -> SurvivalCurve {
    let pool = thread_pool();
    pool.install(|| {
        let chunks: Vec<(u64, u64)> = (0..n_particles)
            .step_by(CHUNK as usize)
            .map(|first| (first, CHUNK.min(n_particles - first)))
            .collect();
        chunks
            .par_iter()
            .map(|(first, count)| survival_curve_range(model, seed, *first, *count, edges, t_max))
            .reduce(
                || SurvivalCurve::empty(edges.to_vec(), seed, t_max),
                |mut a, b| {
                    a.merge(&b);
                    a
                },
            )
    })
}
