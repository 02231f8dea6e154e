//! Perimeter and radial-length functionals and their suprema.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellipticity::{margin, HypothesisReport};
use crate::error::{MapError, Result};
use crate::expr::Expr;
use crate::grid::GridSpec;
use crate::jet::{DiskPoint, WirtingerJet};
use crate::map::PlanarMap;
use crate::quad::{odd_at_least, periodic_trapezoid, simpson};

/// Relative change under node doubling accepted as converged.
pub const LENGTH_TOLERANCE: f64 = 1e-6;
/// Upper limit used in place of `r = 1` for radial lengths.
pub const RADIAL_LIMIT: f64 = 1.0 - 1e-6;
pub const DEFAULT_PERIMETER_NODES: usize = 512;
pub const DEFAULT_RADIAL_NODES: usize = 1025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthKind {
    Perimeter,
    Radial,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub kind: LengthKind,
    pub radius: f64,
    pub theta: Option<f64>,
    pub value: f64,
    pub node_count: usize,
    /// Doubling the nodes changed the value by at most `1e-6` relative.
    pub converged: bool,
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `r |f_z − e^{−2iθ} f_z̄|` at `re^{iθ}`.
fn perimeter_integrand(jet: &WirtingerJet, r: f64, theta: f64) -> f64 {
    r * (jet.dz - Complex64::from_polar(1.0, -2.0 * theta) * jet.dzbar).norm()
}

/// `|f_z + e^{−2iθ} f_z̄|` at `ρe^{iθ}`.
fn radial_integrand(jet: &WirtingerJet, theta: f64) -> f64 {
    (jet.dz + Complex64::from_polar(1.0, -2.0 * theta) * jet.dzbar).norm()
}

fn perimeter_sum(map: &PlanarMap, r: f64, nodes: usize) -> Result<f64> {
    let values = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / nodes as f64;
            let jet = map.jet(DiskPoint::from_polar(r, theta)?)?;
            Ok(perimeter_integrand(&jet, r, theta))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(periodic_trapezoid(&values))
}

/// Perimeter `ℓ_f(r)` of the image of the circle of radius `r`.
///
/// The value reported is the one with `2·nodes` points; the run with `nodes`
/// points only decides `converged`.
pub fn perimeter(map: &PlanarMap, r: f64, nodes: usize) -> Result<LengthReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(MapError::InvalidParameter(format!("radius {r} must lie in (0, 1)")));
    }
    if nodes < 3 {
        return Err(MapError::InvalidParameter("perimeter needs at least 3 nodes".into()));
    }
    let coarse = perimeter_sum(map, r, nodes)?;
    let fine = perimeter_sum(map, r, 2 * nodes)?;
    Ok(LengthReport {
        kind: LengthKind::Perimeter,
        radius: r,
        theta: None,
        value: fine,
        node_count: 2 * nodes,
        converged: relative_change(coarse, fine) <= LENGTH_TOLERANCE,
    })
}

/// Jet on the ray, stepping off an origin where the jet is undefined.
fn ray_jet(map: &PlanarMap, rho: f64, theta: f64) -> Result<WirtingerJet> {
    let p = DiskPoint::from_polar(rho, theta)?;
    match map.jet(p) {
        Err(MapError::SingularJet { .. }) if rho == 0.0 => map.jet(DiskPoint::from_polar(1e-12, theta)?),
        other => other,
    }
}

fn radial_simpson(map: &PlanarMap, upper: f64, theta: f64, nodes: usize) -> Result<(f64, f64)> {
    let h = upper / (nodes - 1) as f64;
    let values = (0..nodes)
        .into_par_iter()
        .map(|k| Ok(radial_integrand(&ray_jet(map, k as f64 * h, theta)?, theta)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((simpson(&values, h), values[nodes - 1]))
}

/// Radial length `ℓ*_f(r, θ)` of the image of the segment `[0, re^{iθ}]`.
///
/// For `r = 1` the integral runs to `1 − 1e−6` and the last stretch is
/// added with the integrand frozen at the upper limit.
pub fn radial_length(map: &PlanarMap, r: f64, theta: f64, nodes: usize) -> Result<LengthReport> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(MapError::InvalidParameter(format!("radius {r} must lie in (0, 1]")));
    }
    let n = odd_at_least(nodes.max(3));
    let upper = r.min(RADIAL_LIMIT);
    let (coarse, _) = radial_simpson(map, upper, theta, n)?;
    let (fine, edge) = radial_simpson(map, upper, theta, 2 * n - 1)?;
    let value = fine + edge * (r - upper);
    Ok(LengthReport {
        kind: LengthKind::Radial,
        radius: r,
        theta: Some(theta),
        value,
        node_count: 2 * n - 1,
        converged: relative_change(coarse, fine) <= LENGTH_TOLERANCE,
    })
}

/// A length supremum with the samples it was taken over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSup {
    pub kind: LengthKind,
    pub value: f64,
    /// Radius (perimeter) or angle (radial) attaining `value`.
    pub argument: f64,
    /// `(radius or angle, length)` samples.
    pub samples: Vec<(f64, f64)>,
    /// Perimeter kind: the ladder never decreased by more than `1e−9`
    /// relative.
    pub monotone: bool,
    pub notes: Vec<String>,
}

/// `ℓ_f(1)` as the largest perimeter on the grid radii, or `ℓ*_f(1)` as the
/// largest radial length over the grid angles with one local refinement.
///
/// Both are lower estimates of the supremum over the open disk.
pub fn length_sup(map: &PlanarMap, kind: LengthKind, grid: &GridSpec) -> Result<LengthSup> {
    grid.validate()?;
    match kind {
        LengthKind::Perimeter => {
            let nodes = grid.angular_count.max(DEFAULT_PERIMETER_NODES);
            let samples = grid
                .radii()
                .into_iter()
                .map(|r| Ok((r, perimeter(map, r, nodes)?.value)))
                .collect::<Result<Vec<_>>>()?;
            let monotone = samples.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
            let (argument, value) = best(&samples);
            let mut notes = vec![format!("lower estimate: ladder ends at r = {}", grid.max_radius)];
            if !monotone {
                notes.push("perimeter ladder is not monotone".into());
            }
            Ok(LengthSup { kind, value, argument, samples, monotone, notes })
        }
        LengthKind::Radial => {
            let at = |theta: f64| radial_length(map, 1.0, theta, DEFAULT_RADIAL_NODES).map(|l| (theta, l.value));
            let mut samples = (0..grid.angular_count).map(|j| at(grid.angle(j))).collect::<Result<Vec<_>>>()?;
            let (t0, _) = best(&samples);
            let dt = 2.0 * PI / grid.angular_count as f64 / 4.0;
            for k in (-4..=4).filter(|k| *k != 0) {
                samples.push(at(t0 + k as f64 * dt)?);
            }
            let (argument, value) = best(&samples);
            let notes = vec![format!("lower estimate: rays end at r = {RADIAL_LIMIT} plus a frozen tail")];
            Ok(LengthSup { kind, value, argument, samples, monotone: true, notes })
        }
        LengthKind::Boundary => {
            let b = boundary_length(map)?;
            let samples = b.polylines.iter().map(|&(n, l)| (n as f64, l)).collect();
            Ok(LengthSup { kind, value: b.value, argument: 1.0, samples, monotone: true, notes: b.notes })
        }
    }
}

/// Largest sample, earlier samples winning ties.
fn best(samples: &[(f64, f64)]) -> (f64, f64) {
    samples.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b })
}

/// Length of the closed polyline through `f(e^{2πij/n})`.
pub fn boundary_polyline(map: &PlanarMap, n: usize) -> Result<f64> {
    let pts = boundary_points(map, n)?;
    Ok((0..n).map(|j| (pts[(j + 1) % n] - pts[j]).norm()).sum())
}

fn boundary_points(map: &PlanarMap, n: usize) -> Result<Vec<Complex64>> {
    (0..n).into_par_iter().map(|j| map.boundary_value(2.0 * PI * j as f64 / n as f64)).collect()
}

/// Boundary length estimated from polylines, extrapolated in `1/n²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLength {
    pub value: f64,
    /// `R = value / (2π)`.
    pub half_length_over_pi: f64,
    pub polylines: Vec<(usize, f64)>,
    pub notes: Vec<String>,
}

pub fn boundary_length(map: &PlanarMap) -> Result<BoundaryLength> {
    let polylines =
        [1024, 2048, 4096].into_iter().map(|n| Ok((n, boundary_polyline(map, n)?))).collect::<Result<Vec<_>>>()?;
    let (l1, l2) = (polylines[1].1, polylines[2].1);
    let value = l2 + (l2 - l1) / 3.0;
    let mut notes = vec!["rectifiability of the boundary image is assumed".to_string()];
    if relative_change(l1, l2) > 1e-3 {
        notes.push("polyline lengths still changing by more than 1e-3".into());
    }
    Ok(BoundaryLength { value, half_length_over_pi: value / (2.0 * PI), polylines, notes })
}

/// Perimeters on the ladder `r = 1 − 2^{−k}`, `k = 1..=levels`, with the
/// limit estimated by extrapolating the last two rungs linearly in `1 − r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterLadder {
    pub rungs: Vec<(f64, f64)>,
    pub limit: f64,
    pub increasing: bool,
}

pub fn perimeter_ladder(map: &PlanarMap, levels: usize, nodes: usize) -> Result<PerimeterLadder> {
    if levels < 2 {
        return Err(MapError::InvalidParameter("perimeter ladder needs at least two levels".into()));
    }
    let rungs = (1..=levels)
        .map(|k| {
            let r = 1.0 - 0.5f64.powi(k as i32);
            Ok((r, perimeter(map, r, nodes)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let increasing = rungs.windows(2).all(|w| w[1].1 >= w[0].1);
    let limit = 2.0 * rungs[levels - 1].1 - rungs[levels - 2].1;
    Ok(PerimeterLadder { rungs, limit, increasing })
}

/// Turning-angle diagnostic for the boundary polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityDiagnostic {
    pub total_turning: f64,
    /// Most negative turn against the orientation of the curve.
    pub worst_turn: f64,
    /// Every turn has the sign of the total and the total is `±2π`.
    pub convex: bool,
}

pub fn convexity_diagnostic(map: &PlanarMap, n: usize) -> Result<ConvexityDiagnostic> {
    let pts = boundary_points(map, n)?;
    let turns: Vec<f64> = (0..n)
        .map(|j| {
            let a = pts[(j + 1) % n] - pts[j];
            let b = pts[(j + 2) % n] - pts[(j + 1) % n];
            (b * a.conj()).arg()
        })
        .collect();
    let total_turning: f64 = turns.iter().sum();
    let sign = total_turning.signum();
    let worst_turn = turns.iter().map(|t| t * sign).fold(f64::INFINITY, f64::min);
    let convex = (total_turning.abs() - 2.0 * PI).abs() < 1e-6 && worst_turn >= -1e-12;
    Ok(ConvexityDiagnostic { total_turning, worst_turn, convex })
}

const SEGMENT_NODES: usize = 9;

/// Cumulative integrals `∫₀^{r_i} φ(ρe^{iθ_j}) dρ`, one row per grid angle.
fn ray_integrals(phi: &Expr, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let radii = grid.radii();
    (0..grid.angular_count)
        .into_par_iter()
        .map(|j| {
            let theta = grid.angle(j);
            let (mut acc, mut lo) = (0.0, 0.0);
            let mut cumulative = Vec::with_capacity(radii.len());
            for &hi in &radii {
                let h = (hi - lo) / (SEGMENT_NODES - 1) as f64;
                let values = (0..SEGMENT_NODES)
                    .map(|k| {
                        let z = Complex64::from_polar(lo + k as f64 * h, theta);
                        phi.eval_real(z).map_err(|e| {
                            MapError::InvalidParameter(format!("weight is not real-valued at {z}: {}", e.message))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                acc += simpson(&values, h);
                cumulative.push(acc);
                lo = hi;
            }
            Ok(cumulative)
        })
        .collect()
}

/// `(𝒜(r_i), index of the maximizing angle)` per grid radius.
fn radial_sups(rays: &[Vec<f64>], len: usize) -> Vec<(f64, usize)> {
    let mut sup = vec![(f64::NEG_INFINITY, 0usize); len];
    for (j, ray) in rays.iter().enumerate() {
        for (i, v) in ray.iter().enumerate() {
            if *v > sup[i].0 {
                sup[i] = (*v, j);
            }
        }
    }
    sup
}

/// `(r, 𝒜(r))` on every grid radius, where `𝒜(r) = sup_θ ∫₀^r φ(ρe^{iθ}) dρ`.
pub fn radial_integral_profile(phi: &Expr, grid: &GridSpec) -> Result<Vec<(f64, f64)>> {
    grid.validate()?;
    let sups = radial_sups(&ray_integrals(phi, grid)?, grid.radial_count);
    Ok(grid.radii().into_iter().zip(sups.into_iter().map(|s| s.0)).collect())
}

/// Checks the radial integral bound for a subharmonic weight `φ`.
///
/// The hypothesis is `𝒜(max_radius) ≤ 1` and the conclusion `𝒜(r) ≤ r` at
/// every grid radius. Subharmonicity of `φ` is taken on trust. The worst
/// margin covers both.
pub fn subharmonic_radial_check(phi: &Expr, grid: &GridSpec) -> Result<HypothesisReport> {
    grid.validate()?;
    let radii = grid.radii();
    let sups = radial_sups(&ray_integrals(phi, grid)?, radii.len());
    let at = |i: usize, j: usize| DiskPoint::from_polar(radii[i], grid.angle(j));

    let mut report = HypothesisReport::new("subharmonic-radial");
    let last = radii.len() - 1;
    let area_max = sups[last].0;
    let hypothesis = margin(1.0, area_max);
    let p = at(last, sups[last].1)?;
    report.record(hypothesis, (p, p));
    for (i, &(v, j)) in sups.iter().enumerate() {
        let p = at(i, j)?;
        report.record(margin(radii[i], v), (p, p));
    }
    report.derived_constants.insert("A_max".into(), area_max);
    report.derived_constants.insert("hypothesis_margin".into(), hypothesis);
    report.notes.push("subharmonicity of the weight is assumed, not verified".into());
    if hypothesis < 0.0 {
        report.notes.push("hypothesis A(max_radius) <= 1 fails; the conclusion is not implied".into());
    }
    report.finish()
}
