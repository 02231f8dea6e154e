//! Numerical toolkit for planar mappings of the unit disk.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod catalog;
pub mod coefficients;
pub mod ellipticity;
pub mod error;
pub mod expr;
pub mod grid;
pub mod jet;
pub mod kernels;
pub mod lengths;
pub mod map;
pub mod potential;
pub mod quad;

pub use bounds::{
    coefficient_bounds_report, derivative_bounds_report, point_bounds_report, BoundContext, BoundReport, BoundStatus,
    InequalityId,
};
pub use catalog::{builtin_map, catalog, kalaj_extremal, MapDefinition};
pub use coefficients::{bloch_norm, extract_coeffs, BlochReport, CoeffTable, MajorantSpec};
pub use ellipticity::{
    beta_constant, check_analytic_domination, check_chord_criterion, check_quotient_equivalence, frontier, invert_map,
    min_kprime, qc_constant, CauchyPair, EllipticityParams, FrontierReport, HypothesisReport, QcReport, QcStatus,
};
pub use error::{MapError, Result};
pub use expr::{parse_expr, Expr, ParseError};
pub use grid::{grid_sup, GridSpec, SupEstimate};
pub use jet::{disk_distance, finite_difference_jet, jet_metrics, DerivedMetrics, DiskPoint, WirtingerJet};
pub use kernels::{green_eval, poisson_eval, KernelEval};
pub use lengths::{length_sup, perimeter, radial_length, subharmonic_radial_check, LengthKind, LengthReport};
pub use map::{AnalyticPair, PlanarMap};
pub use potential::{
    green_potential, laplacian_residual, laplacian_residual_extrapolated, poisson_integral, solve_poisson,
    GreenPotential, Order, PoissonIntegral, PoissonSolutionMap, QuadratureConfig,
};
