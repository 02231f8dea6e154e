//! Polar sampling grids and deterministic supremum search.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::jet::DiskPoint;

/// Largest allowed `max_radius`.
pub const MAX_GRID_RADIUS: f64 = 1.0 - 1e-6;

/// Fraction of grid points allowed to fail evaluation before a scan errors.
pub const FAILURE_FRACTION: f64 = 0.01;

/// Polar grid `r_i = max_radius (i+1)/radial_count`, `θ_j = 2πj/angular_count`.
///
/// The origin is not a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial_count: usize,
    pub angular_count: usize,
    pub max_radius: f64,
    pub refine_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radial_count: 96, angular_count: 192, max_radius: 1.0 - 1e-4, refine_rounds: 3 }
    }
}

impl GridSpec {
    pub fn new(radial_count: usize, angular_count: usize, max_radius: f64) -> Self {
        GridSpec { radial_count, angular_count, max_radius, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_count == 0 || self.angular_count == 0 {
            return Err(MapError::InvalidParameter("grid counts must be positive".into()));
        }
        if !(self.max_radius > 0.0 && self.max_radius <= MAX_GRID_RADIUS) {
            return Err(MapError::InvalidParameter(format!(
                "max_radius = {} must lie in (0, 1 - 1e-6]",
                self.max_radius
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.radial_count * self.angular_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.max_radius * (i + 1) as f64 / self.radial_count as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular_count as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.radial_count).map(|i| self.radius(i)).collect()
    }

    /// Point with flat index `k = i * angular_count + j`.
    pub fn point(&self, k: usize) -> DiskPoint {
        let (i, j) = (k / self.angular_count, k % self.angular_count);
        DiskPoint::from_polar(self.radius(i), self.angle(j)).expect("grid radius below one")
    }

    pub fn points(&self) -> impl Iterator<Item = DiskPoint> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }
}

/// Result of a supremum search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    /// Largest value found on the grid or during refinement.
    pub value: f64,
    pub witness: DiskPoint,
    /// Largest value on the base grid alone.
    pub grid_value: f64,
    pub failures: usize,
    pub evaluated: usize,
}

/// Evaluates `f` on every grid point in parallel. Failures become `None`.
pub fn grid_values<F>(grid: &GridSpec, f: F) -> Vec<Option<f64>>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    (0..grid.len()).into_par_iter().map(|k| f(grid.point(k)).ok().filter(|v| !v.is_nan())).collect()
}

/// Index of the maximum, ties broken towards the lower index.
fn argmax(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| *v > b) {
                best = Some((k, *v));
            }
        }
    }
    best.map(|(k, _)| k)
}

pub(crate) fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > FAILURE_FRACTION * total as f64 {
        Err(MapError::TooManyFailures { failed, total })
    } else {
        Ok(())
    }
}

/// Grid supremum of `f`, refined `refine_rounds` times around the running
/// maximizer with a 9×9 local grid whose spacing shrinks by 4 each round.
///
/// Failed evaluations are skipped; more than 1% failures on the base grid is
/// an error. Ties keep the earlier point.
pub fn grid_sup<F>(grid: &GridSpec, f: F) -> Result<SupEstimate>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    grid.validate()?;
    let values = grid_values(grid, &f);
    let failures = values.iter().filter(|v| v.is_none()).count();
    check_failures(failures, values.len())?;
    let k = argmax(&values).ok_or(MapError::TooManyFailures { failed: failures, total: values.len() })?;
    let grid_value = values[k].unwrap();
    let mut best = (grid_value, grid.point(k));
    let mut evaluated = values.len();
    let (dr, dt) = (grid.max_radius / grid.radial_count as f64, 2.0 * PI / grid.angular_count as f64);
    for round in 1..=grid.refine_rounds {
        let scale = 4f64.powi(round as i32);
        let (r0, t0) = (best.1.modulus(), best.1.value().arg());
        let candidates: Vec<DiskPoint> = (-4..=4)
            .flat_map(|a| (-4..=4).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let r = r0 + a as f64 * dr / scale;
                let t = t0 + b as f64 * dt / scale;
                (r > 0.0 && r <= grid.max_radius).then(|| DiskPoint::from_polar(r, t).ok()).flatten()
            })
            .collect();
        let local: Vec<Option<f64>> = candidates.par_iter().map(|p| f(*p).ok().filter(|v| !v.is_nan())).collect();
        evaluated += local.len();
        if let Some(j) = argmax(&local) {
            let v = local[j].unwrap();
            if v > best.0 {
                best = (v, candidates[j]);
            }
        }
    }
    Ok(SupEstimate { value: best.0, witness: best.1, grid_value, failures, evaluated })
}

/// Per-radius supremum over angles; `None` where every angle failed.
pub fn shell_sups(grid: &GridSpec, values: &[Option<f64>]) -> Vec<Option<f64>> {
    values
        .chunks(grid.angular_count)
        .map(|row| row.iter().flatten().copied().fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = GridSpec::new(4, 8, 0.8);
        assert_eq!(g.radii(), vec![0.2, 0.4, 0.6000000000000001, 0.8]);
        assert_eq!(g.len(), 32);
        let p = g.point(9);
        assert!((p.modulus() - 0.4).abs() < 1e-15);
        assert!((p.value().arg() - PI / 4.0).abs() < 1e-15);
        assert!(GridSpec::new(4, 8, 1.0).validate().is_err());
        assert!(GridSpec::new(4, 8, MAX_GRID_RADIUS).validate().is_ok());
    }

    #[test]
    fn refinement_finds_off_grid_maximum() {
        let target = DiskPoint::from_polar(0.437, 1.23).unwrap();
        let grid = GridSpec { refine_rounds: 4, ..GridSpec::new(20, 40, 0.99) };
        let f = |p: DiskPoint| Ok(-(p.value() - target.value()).norm());
        let sup = grid_sup(&grid, f).unwrap();
        assert!(sup.value >= sup.grid_value);
        assert!(sup.value > -2e-3, "{}", sup.value);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let grid = GridSpec { refine_rounds: 0, ..GridSpec::new(3, 4, 0.9) };
        let sup = grid_sup(&grid, |_| Ok(1.0)).unwrap();
        assert_eq!(sup.witness, grid.point(0));
    }

    #[test]
    fn failures_are_skipped_up_to_one_percent() {
        let grid = GridSpec::new(10, 20, 0.9);
        let one_bad = |p: DiskPoint| if p == grid.point(3) { Err(MapError::CoincidentPoints) } else { Ok(p.modulus()) };
        let sup = grid_sup(&grid, one_bad).unwrap();
        assert_eq!(sup.failures, 1);
        let many_bad = |p: DiskPoint| if p.modulus() < 0.2 { Err(MapError::CoincidentPoints) } else { Ok(1.0) };
        assert!(matches!(grid_sup(&grid, many_bad), Err(MapError::TooManyFailures { .. })));
    }
}
