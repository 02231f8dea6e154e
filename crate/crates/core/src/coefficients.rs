//! Fourier coefficients of harmonic maps, majorants and Bloch-type norms.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::expr::{parse_expr_in, Expr};
use crate::grid::{grid_values, shell_sups, GridSpec};
use crate::jet::DiskPoint;
use crate::map::PlanarMap;

pub const DEFAULT_DEGREE: usize = 32;
pub const DEFAULT_RADII: [f64; 3] = [0.4, 0.6, 0.8];
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// `f = Σ aₙ zⁿ + Σ b̄ₙ z̄ⁿ` read off a harmonic map.
///
/// `b[n]` holds the literal coefficient `b̄ₙ` of `z̄ⁿ`; `b[0]` is always zero.
/// Moduli agree, so every bound uses `|b[n]|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub radii_used: Vec<f64>,
    /// `max_i,n |cₙ⁽ⁱ⁾ - cₙ⁽ᵒᵘᵗ⁾| rᵢⁿ` over both coefficient families.
    pub disagreement: f64,
    pub tolerance: f64,
    pub valid: bool,
}

impl CoeffTable {
    pub fn degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// `|aₙ| + |bₙ|`, zero beyond the table.
    pub fn lhs(&self, n: usize) -> f64 {
        let a = self.a.get(n).map_or(0.0, |c| c.norm());
        let b = self.b.get(n).map_or(0.0, |c| c.norm());
        a + b
    }
}

/// Circle coefficients `c_k`, `k = -n..=n`, of `h(r e^{iθ})` from `samples`
/// equally spaced nodes.
fn circle_coefficients<H>(h: &H, r: f64, n: usize, samples: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)>
where
    H: Fn(Complex64) -> Result<Complex64>,
{
    let mut buf = (0..samples)
        .map(|k| h(Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / samples as f64)))
        .collect::<Result<Vec<_>>>()?;
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);
    let scale = 1.0 / samples as f64;
    let pos = (0..=n).map(|k| buf[k] * scale).collect();
    let neg = (0..=n).map(|k| if k == 0 { Complex64::new(0.0, 0.0) } else { buf[samples - k] * scale }).collect();
    Ok((pos, neg))
}

/// Coefficient extraction from an arbitrary harmonic function `h`.
pub fn extract_coeffs_from<H>(h: H, degree: usize, radii: &[f64], tolerance: f64) -> Result<CoeffTable>
where
    H: Fn(Complex64) -> Result<Complex64>,
{
    if degree == 0 {
        return Err(MapError::InvalidParameter("degree must be positive".into()));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(MapError::InvalidParameter(format!("radii {radii:?} must be non-empty and inside (0, 1)")));
    }
    let samples = (8 * degree).max(64);
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let per_radius = sorted
        .iter()
        .map(|&r| {
            let (pos, neg) = circle_coefficients(&h, r, degree, samples)?;
            let a: Vec<Complex64> = pos.iter().enumerate().map(|(n, c)| c / r.powi(n as i32)).collect();
            let b: Vec<Complex64> = neg.iter().enumerate().map(|(n, c)| c / r.powi(n as i32)).collect();
            Ok((r, a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, a_out, b_out) = per_radius.last().cloned().unwrap();
    let mut disagreement: f64 = 0.0;
    for (r, a, b) in &per_radius {
        for n in 0..=degree {
            let w = r.powi(n as i32);
            disagreement = disagreement.max((a[n] - a_out[n]).norm() * w).max((b[n] - b_out[n]).norm() * w);
        }
    }
    Ok(CoeffTable { a: a_out, b: b_out, radii_used: sorted, disagreement, tolerance, valid: disagreement <= tolerance })
}

/// Fourier coefficients of the harmonic part of `map` (for Poisson maps,
/// `f + G[g]`).
pub fn extract_coeffs(map: &PlanarMap, degree: usize, radii: &[f64]) -> Result<CoeffTable> {
    extract_coeffs_from(|z| map.harmonic_value(z), degree, radii, DEFAULT_TOLERANCE)
}

/// A majorant `ω(t)`: `ω(0) = 0`, increasing, `ω(t)/t` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSpec {
    pub omega: Expr,
    pub validated: bool,
}

/// Ladder `t_k = 2k/1000`, `k = 1..=1000`, on which majorants are checked.
const LADDER_POINTS: usize = 1000;
const LADDER_MAX: f64 = 2.0;

impl MajorantSpec {
    /// Parses `ω` as an expression in `t` and checks the majorant conditions.
    pub fn parse(text: &str) -> Result<Self> {
        let omega = parse_expr_in(text, "t").map_err(|e| MapError::InvalidParameter(format!("majorant: {e}")))?;
        Ok(Self::new(omega))
    }

    pub fn new(omega: Expr) -> Self {
        let mut spec = MajorantSpec { omega, validated: false };
        spec.validated = spec.check().is_ok();
        spec
    }

    pub fn identity() -> Self {
        Self::parse("t").expect("literal majorant")
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.omega.eval_real(Complex64::new(t, 0.0))?)
    }

    /// Reason the conditions fail, if they do.
    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(MapError::InvalidParameter(format!("not a majorant: {m}")));
        // pow(t, c) is undefined at exactly zero; use the limit from the right
        let at0 = self.eval(0.0).or_else(|_| self.eval(f64::MIN_POSITIVE))?;
        if at0.abs() > 1e-14 {
            return fail(format!("ω(0) = {at0}"));
        }
        let mut prev = (0.0, 0.0, f64::INFINITY);
        for k in 1..=LADDER_POINTS {
            let t = LADDER_MAX * k as f64 / LADDER_POINTS as f64;
            let w = self.eval(t)?;
            let q = w / t;
            if !(w > prev.1) {
                return fail(format!("not increasing at t = {t}"));
            }
            if q > prev.2 * (1.0 + 1e-12) {
                return fail(format!("ω(t)/t increases at t = {t}"));
            }
            prev = (t, w, q);
        }
        Ok(())
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            self.check()
        }
    }
}

/// `|f(0)| + sup ‖D_f(z)‖ ω(d(z)^α)` over the grid and the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochReport {
    pub value: f64,
    pub origin_modulus: f64,
    pub sup: f64,
    pub witness: DiskPoint,
    /// `(r, shell sup)` for the three outermost grid radii.
    pub boundary_ladder: Vec<(f64, f64)>,
}

pub fn bloch_norm(map: &PlanarMap, omega: &MajorantSpec, alpha: f64, grid: &GridSpec) -> Result<BlochReport> {
    omega.require_valid()?;
    if !(alpha > 0.0) {
        return Err(MapError::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    grid.validate()?;
    let weighted = |p: DiskPoint| -> Result<f64> {
        let m = map.jet(p)?.metrics();
        Ok(m.op_norm * omega.eval(p.boundary_distance().powf(alpha))?)
    };
    let sup = crate::grid::grid_sup(grid, weighted)?;
    let mut best = (sup.value, sup.witness);
    if let Ok(v) = weighted(DiskPoint::origin()) {
        if v >= best.0 {
            best = (v, DiskPoint::origin());
        }
    }
    let values = grid_values(grid, weighted);
    let shells = shell_sups(grid, &values);
    let radii = grid.radii();
    let boundary_ladder = radii
        .iter()
        .zip(&shells)
        .skip(grid.radial_count.saturating_sub(3))
        .filter_map(|(r, s)| s.map(|s| (*r, s)))
        .collect();
    let origin_modulus = map.value(Complex64::new(0.0, 0.0))?.norm();
    Ok(BlochReport { value: origin_modulus + best.0, origin_modulus, sup: best.0, witness: best.1, boundary_ladder })
}
