//! Benchmark fixtures shared by the criterion targets.

use qcmap::catalog::{builtin_map, Params};
use qcmap::{GridSpec, PlanarMap};

/// A builtin map with the given parameters.
pub fn catalog_map(name: &str, params: &[(&str, f64)]) -> PlanarMap {
    let params: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_map(name, &params).and_then(|d| d.build()).expect("fixture map builds")
}

/// A coarse grid that keeps one iteration short.
pub fn bench_grid() -> GridSpec {
    GridSpec { refine_rounds: 1, ..GridSpec::new(24, 48, 1.0 - 1e-4) }
}
