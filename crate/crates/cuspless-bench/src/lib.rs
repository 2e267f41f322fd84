//! Shared helpers for the evaluation benchmarks.

use cuspless::geodesic::GeodesicInit;
use nalgebra::Vector2;

/// Fixed twisted initial data used across all benchmarks, together with an
/// arclength safely inside the cuspless range. Mirrors the pair timed by the
/// library's relative-performance check so criterion numbers and the check
/// verdict describe the same workload.
pub fn bench_init(beta: f64) -> (GeodesicInit, f64) {
    let g = GeodesicInit::new(Vector2::new(0.4, 0.1), Vector2::new(-0.2, 0.6 * beta), beta)
        .expect("fixed admissible data");
    let l = 0.9 * g.s_max().min(4.0 / beta);
    (g, l)
}
