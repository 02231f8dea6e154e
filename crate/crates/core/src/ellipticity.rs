//! `(K, K′)`-ellipticity: pointwise defects, frontier estimates, the
//! quasiconformality constant, constant conversions, numeric inversion and
//! hypothesis checkers.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{extract_coeffs_from, MajorantSpec, DEFAULT_RADII};
use crate::error::{MapError, Result};
use crate::expr::Expr;
use crate::grid::{check_failures, grid_sup, shell_sups, GridSpec};
use crate::jet::{DerivedMetrics, DiskPoint, WirtingerJet};
use crate::map::PlanarMap;
use crate::potential::{GreenPotential, QuadratureConfig};
use crate::quad::{odd_at_least, simpson};

/// Dilatation above which the outer shells count as approaching one.
pub const UNBOUNDED_DILATATION: f64 = 1.0 - 1e-3;

/// Label attached to every grid supremum.
pub const SUP_LABEL: &str = "certified lower bound, heuristic sup";

/// Constants of `‖D_f‖² ≤ K J_f + K′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kprime")]
    pub k_prime: f64,
}

/// Constants of `|f_z̄| ≤ k₁|f_z| + k₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyPair {
    pub k1: f64,
    pub k2: f64,
}

impl EllipticityParams {
    pub fn new(k: f64, k_prime: f64) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) || !(k_prime >= 0.0 && k_prime.is_finite()) {
            return Err(MapError::InvalidParameter(format!("need K >= 1 and K' >= 0, got ({k}, {k_prime})")));
        }
        Ok(EllipticityParams { k, k_prime })
    }

    /// `(k₁, k₂) = ((K-1)/(K+1), √K′/(1+K))`.
    pub fn to_cauchy(&self) -> CauchyPair {
        CauchyPair { k1: (self.k - 1.0) / (self.k + 1.0), k2: self.k_prime.sqrt() / (1.0 + self.k) }
    }
}

impl CauchyPair {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k1) || !(k2 >= 0.0 && k2.is_finite()) {
            return Err(MapError::InvalidParameter(format!("need k1 in [0, 1) and k2 >= 0, got ({k1}, {k2})")));
        }
        Ok(CauchyPair { k1, k2 })
    }

    /// `(K, K′) = (2(1+k₁)/(1-k₁), 4k₂²/(1-k₁)²)`.
    ///
    /// Not the inverse of [`EllipticityParams::to_cauchy`]: `(1, 0)` maps to
    /// `(0, 0)` and back to `(2, 0)`.
    pub fn to_elliptic(&self) -> EllipticityParams {
        let d = 1.0 - self.k1;
        EllipticityParams { k: 2.0 * (1.0 + self.k1) / d, k_prime: 4.0 * self.k2 * self.k2 / (d * d) }
    }

    /// `|f_z̄| - k₁|f_z| - k₂`; non-positive where the inequality holds.
    pub fn excess(&self, jet: &WirtingerJet) -> f64 {
        jet.dzbar.norm() - self.k1 * jet.dz.norm() - self.k2
    }
}

/// `‖D_f‖² - K J_f`, the smallest `K′` that works at this point when positive.
pub fn pointwise_defect(jet: &WirtingerJet, k: f64) -> f64 {
    let m = jet.metrics();
    m.op_norm * m.op_norm - k * m.jacobian
}

/// `rhs - lhs`, with differences at roundoff scale reported as exactly zero.
pub fn margin(rhs: f64, lhs: f64) -> f64 {
    let m = rhs - lhs;
    if m.abs() <= 16.0 * f64::EPSILON * rhs.abs().max(lhs.abs()) {
        0.0
    } else {
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPrimeEstimate {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kprime")]
    pub k_prime: f64,
    pub witness: DiskPoint,
    pub grid_value: f64,
    pub failures: usize,
}

/// Grid supremum of `max(0, ‖D_f‖² - K J_f)` with local refinement.
pub fn min_kprime(map: &PlanarMap, k: f64, grid: &GridSpec) -> Result<KPrimeEstimate> {
    EllipticityParams::new(k, 0.0)?;
    let sup = grid_sup(grid, |p| Ok(pointwise_defect(&map.jet(p)?, k).max(0.0)))?;
    Ok(KPrimeEstimate {
        k,
        k_prime: sup.value,
        witness: sup.witness,
        grid_value: sup.grid_value,
        failures: sup.failures,
    })
}

/// A supremum that may be flagged as unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SupValue {
    Finite(f64),
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub samples: Vec<KPrimeEstimate>,
    pub sup_dilatation: SupValue,
    pub label: String,
}

/// Minimal-`K′` estimates for each `K`.
///
/// Each estimate is the supremum over its own grid search plus the witnesses
/// found for every other `K`, so estimates are non-increasing in `K` wherever
/// those witnesses are sense-preserving.
pub fn frontier(map: &PlanarMap, ks: &[f64], grid: &GridSpec) -> Result<FrontierReport> {
    let mut samples = ks.iter().map(|&k| min_kprime(map, k, grid)).collect::<Result<Vec<_>>>()?;
    let witnesses: Vec<(DiskPoint, WirtingerJet)> =
        samples.iter().filter_map(|s| map.jet(s.witness).ok().map(|j| (s.witness, j))).collect();
    for s in &mut samples {
        for (p, jet) in &witnesses {
            let d = pointwise_defect(jet, s.k).max(0.0);
            if d > s.k_prime {
                s.k_prime = d;
                s.witness = *p;
            }
        }
    }
    let qc = qc_constant(map, grid)?;
    let sup_dilatation = match qc.status {
        QcStatus::Unbounded => SupValue::Unbounded,
        _ => SupValue::Finite(qc.sup_dilatation),
    };
    Ok(FrontierReport { samples, sup_dilatation, label: SUP_LABEL.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QcStatus {
    Bounded,
    /// The outer shells' dilatation exceeds `1 - 1e-3` and is still rising.
    /// A heuristic flag, not a proof.
    Unbounded,
    /// `J_f ≤ 0` somewhere on the grid; `witness` is the first such point.
    NotSensePreserving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub status: QcStatus,
    /// Grid supremum of `‖D_f‖ / l(D_f)`; absent when not sense-preserving.
    pub value: Option<f64>,
    pub witness: DiskPoint,
    pub sup_dilatation: f64,
    /// `(r, sup of dilatation on the shell)` for the three outermost radii.
    pub outer_shells: Vec<(f64, f64)>,
    pub label: String,
}

fn grid_metrics(map: &PlanarMap, grid: &GridSpec) -> Vec<Option<DerivedMetrics>> {
    (0..grid.len()).into_par_iter().map(|k| map.jet(grid.point(k)).ok().map(|j| j.metrics())).collect()
}

/// Quasiconformality constant `sup ‖D_f‖ / l(D_f)` over the grid.
pub fn qc_constant(map: &PlanarMap, grid: &GridSpec) -> Result<QcReport> {
    grid.validate()?;
    let metrics = grid_metrics(map, grid);
    let failures = metrics.iter().filter(|m| m.is_none()).count();
    check_failures(failures, metrics.len())?;

    let dilatations: Vec<Option<f64>> =
        metrics.iter().map(|m| m.and_then(|m| if m.jacobian > 0.0 { m.dilatation } else { None })).collect();
    let shells = shell_sups(grid, &dilatations);
    let radii = grid.radii();
    let outer_shells: Vec<(f64, f64)> = radii
        .iter()
        .zip(&shells)
        .skip(grid.radial_count.saturating_sub(3))
        .filter_map(|(r, s)| s.map(|s| (*r, s)))
        .collect();
    let sup_dilatation = shells.iter().flatten().copied().fold(0.0, f64::max);

    if let Some(k) = metrics.iter().position(|m| m.is_some_and(|m| !m.is_sense_preserving())) {
        return Ok(QcReport {
            status: QcStatus::NotSensePreserving,
            value: None,
            witness: grid.point(k),
            sup_dilatation,
            outer_shells,
            label: SUP_LABEL.to_string(),
        });
    }

    let ratio = |p: DiskPoint| {
        let m = map.jet(p)?.metrics();
        if m.is_sense_preserving() {
            Ok(m.distortion_ratio())
        } else {
            Err(MapError::singular(p.value()))
        }
    };
    let sup = grid_sup(grid, ratio)?;
    let rising = outer_shells.len() == 3 && outer_shells.windows(2).all(|w| w[1].1 > w[0].1);
    let status =
        if rising && outer_shells[2].1 > UNBOUNDED_DILATATION { QcStatus::Unbounded } else { QcStatus::Bounded };
    Ok(QcReport {
        status,
        value: Some(sup.value),
        witness: sup.witness,
        sup_dilatation,
        outer_shells,
        label: SUP_LABEL.to_string(),
    })
}

/// Maximum Newton iterations in [`invert_map`].
pub const NEWTON_MAX_ITERATIONS: usize = 100;
const NEWTON_MAX_HALVINGS: usize = 20;
const NEWTON_MIN_JACOBIAN: f64 = 1e-12;

/// Solves `f(z) = w` by damped Newton steps built from the inverse
/// derivatives `(f⁻¹)_w = conj(f_z)/J_f`, `(f⁻¹)_w̄ = -f_z̄/J_f`.
pub fn invert_map(map: &PlanarMap, w: Complex64, guess: DiskPoint, tol: f64) -> Result<DiskPoint> {
    let mut z = guess;
    let mut res = map.value(z.value())? - w;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if res.norm() <= tol {
            return Ok(z);
        }
        let jet = map.jet(z)?;
        let jac = jet.metrics().jacobian;
        if !(jac > NEWTON_MIN_JACOBIAN) {
            return Err(MapError::InversionFailed(format!("Jacobian {jac:e} at {}", z.value())));
        }
        let step = (jet.dz.conj() * res - jet.dzbar * res.conj()) / jac;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            if let Ok(next) = DiskPoint::new(z.value() - step * lambda) {
                if let Ok(v) = map.value(next.value()) {
                    let r = v - w;
                    if r.norm() < res.norm() {
                        accepted = Some((next, r));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((next, r)) => {
                z = next;
                res = r;
            }
            None => {
                return Err(MapError::InversionFailed(format!(
                    "no decrease after {NEWTON_MAX_HALVINGS} halvings, residual {:e}",
                    res.norm()
                )))
            }
        }
    }
    if res.norm() <= tol {
        Ok(z)
    } else {
        Err(MapError::InversionFailed(format!(
            "no convergence in {NEWTON_MAX_ITERATIONS} iterations, residual {:e}",
            res.norm()
        )))
    }
}

/// Verdict of a hypothesis checked on finitely many samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub condition_id: String,
    pub holds_on_sample: bool,
    pub worst_margin: f64,
    /// The sample pair attaining the worst margin (both entries equal for
    /// pointwise conditions).
    pub witness: Option<(DiskPoint, DiskPoint)>,
    pub derived_constants: BTreeMap<String, f64>,
    /// Samples for which the condition could not be evaluated.
    pub indeterminate: usize,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub(crate) fn new(condition_id: &str) -> Self {
        HypothesisReport {
            condition_id: condition_id.to_string(),
            holds_on_sample: true,
            worst_margin: f64::INFINITY,
            witness: None,
            derived_constants: BTreeMap::new(),
            indeterminate: 0,
            notes: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, margin: f64, witness: (DiskPoint, DiskPoint)) {
        if margin < self.worst_margin || self.witness.is_none() {
            self.worst_margin = margin;
            self.witness = Some(witness);
        }
    }

    pub(crate) fn finish(mut self) -> Result<Self> {
        if self.witness.is_none() {
            return Err(MapError::InvalidParameter(format!("{}: no sample could be evaluated", self.condition_id)));
        }
        self.holds_on_sample = self.worst_margin >= 0.0;
        Ok(self)
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(MapError::InvalidParameter(format!("{name} = {x} must lie in [0, 1]")))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(MapError::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

fn check_pairs(pairs: &[(DiskPoint, DiskPoint)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(MapError::InvalidParameter("no sample pairs".into()));
    }
    if let Some((a, _)) = pairs.iter().find(|(a, b)| a == b) {
        return Err(MapError::InvalidParameter(format!("sample pair with equal points {}", a.value())));
    }
    Ok(())
}

/// Distinct sample points must have images at least `1e-10` apart.
fn check_univalent_on(map: &PlanarMap, pairs: &[(DiskPoint, DiskPoint)]) -> Result<()> {
    let mut pts: Vec<DiskPoint> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
    pts.sort_by(|a, b| a.value().re.total_cmp(&b.value().re).then(a.value().im.total_cmp(&b.value().im)));
    pts.dedup();
    let images = pts.iter().map(|p| map.value(p.value())).collect::<Result<Vec<_>>>()?;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (images[i] - images[j]).norm() <= 1e-10 {
                return Err(MapError::InvalidParameter(format!(
                    "map is not univalent on the samples: {} and {} share an image",
                    pts[i].value(),
                    pts[j].value()
                )));
            }
        }
    }
    Ok(())
}

/// Margins of the two-sided difference-quotient bounds
/// `ω(((1+|z₁|)(1+|z₂|))^{(1-α)/2})/C ≤ |Δf|/|Δz| ≤ C/ω((d₁d₂)^{(1-α)/2})`.
fn quotient_margins(
    map: &PlanarMap,
    omega: &MajorantSpec,
    alpha: f64,
    c: f64,
    z1: DiskPoint,
    z2: DiskPoint,
) -> Result<(f64, f64, f64)> {
    let q = (map.value(z1.value())? - map.value(z2.value())?).norm() / (z1.value() - z2.value()).norm();
    let e = (1.0 - alpha) / 2.0;
    let lower = omega.eval(((1.0 + z1.modulus()) * (1.0 + z2.modulus())).powf(e))? / c;
    let upper = c / omega.eval((z1.boundary_distance() * z2.boundary_distance()).powf(e))?;
    Ok((q, margin(q, lower), margin(upper, q)))
}

/// `∫₀¹ dt / ω(d(Φ(t))^{1-α})` along `Φ(t) = f⁻¹(f(z₁) + t(f(z₂) - f(z₁)))`.
pub fn chord_integral(
    map: &PlanarMap,
    omega: &MajorantSpec,
    alpha: f64,
    z1: DiskPoint,
    z2: DiskPoint,
    line_nodes: usize,
) -> Result<f64> {
    let n = odd_at_least(line_nodes);
    let (w1, w2) = (map.value(z1.value())?, map.value(z2.value())?);
    let mut prev = z1;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let p = if k == 0 {
            z1
        } else if k == n - 1 {
            z2
        } else {
            let w = w1 + (w2 - w1) * t;
            invert_map(map, w, prev, 1e-12 * w.norm().max(1.0))?
        };
        prev = p;
        values.push(1.0 / omega.eval(p.boundary_distance().powf(1.0 - alpha))?);
    }
    Ok(simpson(&values, 1.0 / (n - 1) as f64))
}

/// Checks the two-sided quotient condition with constant `C₁` and the chord
/// integral condition with constant `C₂` on every sample pair.
///
/// Convexity of the image is assumed, not verified.
pub fn check_chord_criterion(
    map: &PlanarMap,
    omega: &MajorantSpec,
    alpha: f64,
    c1: f64,
    c2: f64,
    pairs: &[(DiskPoint, DiskPoint)],
    line_nodes: usize,
) -> Result<HypothesisReport> {
    check_unit_interval("alpha", alpha)?;
    check_positive("C1", c1)?;
    check_positive("C2", c2)?;
    omega.require_valid()?;
    check_pairs(pairs)?;
    check_univalent_on(map, pairs)?;

    type PairResult = (Result<(f64, f64, f64)>, Result<f64>);
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(a, b)| {
            (quotient_margins(map, omega, alpha, c1, a, b), chord_integral(map, omega, alpha, a, b, line_nodes))
        })
        .collect();

    let mut report = HypothesisReport::new("chord-criterion");
    let (mut qmin, mut qmax, mut imax) = (f64::INFINITY, 0.0f64, 0.0f64);
    for (&(a, b), (quot, integral)) in pairs.iter().zip(results) {
        let (q, lo, hi) = quot?;
        qmin = qmin.min(q);
        qmax = qmax.max(q);
        report.record(lo, (a, b));
        report.record(hi, (a, b));
        match integral {
            Ok(i) => {
                imax = imax.max(i);
                report.record(margin(c2, i), (a, b));
            }
            Err(e) => {
                report.indeterminate += 1;
                report.notes.push(format!("chord {} -> {} indeterminate: {e}", a.value(), b.value()));
            }
        }
    }
    report.derived_constants.extend([
        ("alpha".to_string(), alpha),
        ("C1".to_string(), c1),
        ("C2".to_string(), c2),
        ("min_quotient".to_string(), qmin),
        ("max_quotient".to_string(), qmax),
        ("max_chord_integral".to_string(), imax),
    ]);
    report.notes.push("convexity of the image is assumed, not verified".into());
    report.finish()
}

/// Sampled `sup |g|` over the closed disk (a 33 × 128 polar grid with the
/// origin and the unit circle).
pub fn source_sup(g: &Expr) -> Result<f64> {
    let mut sup: f64 = g.eval(Complex64::new(0.0, 0.0))?.norm();
    for i in 1..=32 {
        for j in 0..128 {
            let z = Complex64::from_polar(i as f64 / 32.0, 2.0 * std::f64::consts::PI * j as f64 / 128.0);
            sup = sup.max(g.eval(z)?.norm());
        }
    }
    Ok(sup)
}

/// Checks `|f(z₁) - f(z₂)| ≤ C₃ |h₁(z₁) - h₁(z₂)|` where `h₁` is the analytic
/// part of `f + G[g]`.
///
/// Maps without a built-in decomposition get `h₁` by coefficient extraction of
/// `f + G[g]`. On success the report carries the derived `k₁ = C₃ - 1`,
/// `k₂ = C₃ ‖g‖∞ / 3` and their `(K, K′)` image.
pub fn check_analytic_domination(
    map: &PlanarMap,
    g: Option<&Expr>,
    c3: f64,
    pairs: &[(DiskPoint, DiskPoint)],
    cfg: &QuadratureConfig,
) -> Result<HypothesisReport> {
    if !(1.0..2.0).contains(&c3) {
        return Err(MapError::InvalidParameter(format!("C3 = {c3} must lie in [1, 2)")));
    }
    check_pairs(pairs)?;
    let mut report = HypothesisReport::new("analytic-domination");
    let extracted;
    let h1: Box<dyn Fn(Complex64) -> Complex64 + Sync> = match map.analytic_part(Complex64::new(0.0, 0.0)) {
        Some(_) => Box::new(|z| map.analytic_part(z).map(|(v, _)| v).unwrap_or_default()),
        None => {
            let green = match g {
                Some(g) => Some(GreenPotential::new(g.clone(), *cfg)?),
                None => None,
            };
            let harmonic = |z: Complex64| -> Result<Complex64> {
                let gz = match &green {
                    Some(gp) => gp.value(DiskPoint::new(z)?)?,
                    None => Complex64::new(0.0, 0.0),
                };
                Ok(map.value(z)? + gz)
            };
            let table = extract_coeffs_from(harmonic, 32, &DEFAULT_RADII, 1e-8)?;
            if !table.valid {
                return Err(MapError::Extraction(format!(
                    "f + G[g] is not harmonic to tolerance: disagreement {:e}",
                    table.disagreement
                )));
            }
            report.notes.push(format!("h1 extracted with disagreement {:e}", table.disagreement));
            extracted = table.a;
            Box::new(|z| crate::potential::horner(&extracted, z).0)
        }
    };
    let margins: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let df = (map.value(a.value())? - map.value(b.value())?).norm();
            let dh = (h1(a.value()) - h1(b.value())).norm();
            Ok(margin(c3 * dh, df))
        })
        .collect();
    for (&pair, m) in pairs.iter().zip(margins) {
        report.record(m?, pair);
    }
    let g_sup = match g {
        Some(g) => source_sup(g)?,
        None => 0.0,
    };
    let cauchy = CauchyPair { k1: c3 - 1.0, k2: c3 / 3.0 * g_sup };
    let elliptic = cauchy.to_elliptic();
    report.derived_constants.extend([
        ("C3".to_string(), c3),
        ("g_sup".to_string(), g_sup),
        ("k1".to_string(), cauchy.k1),
        ("k2".to_string(), cauchy.k2),
        ("K".to_string(), elliptic.k),
        ("Kprime".to_string(), elliptic.k_prime),
    ]);
    report.finish()
}

/// `Γ((1+α)/2)² / Γ(1+α)`, the factor relating the pointwise norm bounds to
/// the difference-quotient bounds.
pub fn beta_constant(alpha: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    let g = statrs::function::gamma::gamma((1.0 + alpha) / 2.0);
    Ok(g * g / statrs::function::gamma::gamma(1.0 + alpha))
}

/// Both sides of the equivalence between difference-quotient bounds (with
/// constant `C₄`) and pointwise norm bounds (with constant `C₅`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientEquivalenceReport {
    pub quotient_bounds: HypothesisReport,
    pub pointwise_bounds: HypothesisReport,
    pub beta: f64,
    /// `C₅ Γ((1+α)/2)² / Γ(1+α)`: upper quotient constant implied by the
    /// pointwise bounds.
    pub upper_from_pointwise: f64,
    /// `2^{1-α} C₅`: lower quotient constant implied by the pointwise bounds.
    pub lower_from_pointwise: f64,
}

pub fn check_quotient_equivalence(
    map: &PlanarMap,
    omega: &MajorantSpec,
    alpha: f64,
    c4: f64,
    c5: f64,
    pairs: &[(DiskPoint, DiskPoint)],
    grid: &GridSpec,
) -> Result<QuotientEquivalenceReport> {
    check_unit_interval("alpha", alpha)?;
    check_positive("C4", c4)?;
    check_positive("C5", c5)?;
    omega.require_valid()?;
    check_pairs(pairs)?;
    grid.validate()?;

    let mut quotient = HypothesisReport::new("quotient-bounds");
    for &(a, b) in pairs {
        let (_, lo, hi) = quotient_margins(map, omega, alpha, c4, a, b)?;
        quotient.record(lo, (a, b));
        quotient.record(hi, (a, b));
    }
    quotient.derived_constants.insert("C4".into(), c4);

    let e = 1.0 - alpha;
    let pointwise_margin = |p: DiskPoint| -> Result<f64> {
        let m = map.jet(p)?.metrics();
        let lower = omega.eval((1.0 + p.modulus()).powf(e))? / c5;
        let upper = c5 / omega.eval(p.boundary_distance().powf(e))?;
        Ok(margin(m.lower_norm, lower).min(margin(upper, m.op_norm)))
    };
    let margins: Vec<Option<f64>> =
        (0..grid.len()).into_par_iter().map(|k| pointwise_margin(grid.point(k)).ok()).collect();
    let failures = margins.iter().filter(|m| m.is_none()).count();
    check_failures(failures, margins.len())?;
    let mut pointwise = HypothesisReport::new("pointwise-norm-bounds");
    for (k, m) in margins.iter().enumerate() {
        if let Some(m) = m {
            pointwise.record(*m, (grid.point(k), grid.point(k)));
        }
    }
    pointwise.indeterminate = failures;
    pointwise.derived_constants.insert("C5".into(), c5);

    let beta = beta_constant(alpha)?;
    Ok(QuotientEquivalenceReport {
        quotient_bounds: quotient.finish()?,
        pointwise_bounds: pointwise.finish()?,
        beta,
        upper_from_pointwise: beta * c5,
        lower_from_pointwise: 2f64.powf(1.0 - alpha) * c5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(c(re, im)).unwrap()
    }

    fn map(s: &str) -> PlanarMap {
        PlanarMap::from_expr(parse_expr(s).unwrap())
    }

    #[test]
    fn defect_examples() {
        let id = WirtingerJet::variable(c(0.2, 0.1));
        assert_eq!(pointwise_defect(&id, 1.0), 0.0);
        let s = 2f64.powf(-2.0 / 3.0);
        let jet = WirtingerJet::new(c(0.0, 0.0), c(s * 4.75, 0.0), c(s * 2.0, 0.0));
        let m = jet.metrics();
        let d = pointwise_defect(&jet, 1.0);
        assert!((d - 2.0 * jet.dzbar.norm() * m.op_norm).abs() < 1e-12);
        assert!((d - 10.715).abs() < 1e-3);
        assert!(d <= m.op_norm * m.op_norm);
    }

    #[test]
    fn conversions() {
        let cp = EllipticityParams::new(3.0, 4.0).unwrap().to_cauchy();
        assert_eq!((cp.k1, cp.k2), (0.5, 0.5));
        let ep = CauchyPair::new(0.5, 0.5).unwrap().to_elliptic();
        assert_eq!((ep.k, ep.k_prime), (6.0, 4.0));
        let back = EllipticityParams::new(1.0, 0.0).unwrap().to_cauchy();
        assert_eq!((back.k1, back.k2), (0.0, 0.0));
        assert_eq!(back.to_elliptic(), EllipticityParams { k: 2.0, k_prime: 0.0 });
        assert!(EllipticityParams::new(0.5, 0.0).is_err());
        assert!(EllipticityParams::new(1.0, -1.0).is_err());
        assert!(CauchyPair::new(1.0, 0.0).is_err());
    }

    #[test]
    fn margin_snaps_roundoff() {
        assert_eq!(margin(1.0, 1.0 + 1e-16), 0.0);
        assert!(margin(1.0, 1.0 + 1e-12) < 0.0);
        assert_eq!(margin(3.0, 1.0), 2.0);
    }

    #[test]
    fn min_kprime_of_linear_maps() {
        let grid = GridSpec::new(16, 32, 0.99);
        assert_eq!(min_kprime(&map("z"), 1.0, &grid).unwrap().k_prime, 0.0);
        assert_eq!(min_kprime(&map("2*z"), 1.0, &grid).unwrap().k_prime, 0.0);
        let est = min_kprime(&map("z + 0.5*conj(z)"), 1.0, &grid).unwrap();
        // ‖D‖² - J = 2.25 - 0.75
        assert!((est.k_prime - 1.5).abs() < 1e-12);
    }

    #[test]
    fn qc_constant_of_affine_maps() {
        let grid = GridSpec::new(16, 32, 0.99);
        let r = qc_constant(&map("z"), &grid).unwrap();
        assert_eq!(r.status, QcStatus::Bounded);
        assert_eq!(r.value, Some(1.0));
        let r = qc_constant(&map("z + 0.5*conj(z)"), &grid).unwrap();
        assert!((r.value.unwrap() - 3.0).abs() < 1e-12);
        let r = qc_constant(&map("conj(z)"), &grid).unwrap();
        assert_eq!(r.status, QcStatus::NotSensePreserving);
        assert_eq!(r.witness, grid.point(0));
    }

    #[test]
    fn newton_inversion() {
        let w = c(0.3, 0.1);
        let z = invert_map(&map("z"), w, DiskPoint::origin(), 1e-13).unwrap();
        assert!((z.value() - w).norm() < 1e-13);
        let z = invert_map(&map("2*z"), c(1.0, 0.0), DiskPoint::origin(), 1e-13).unwrap();
        assert!((z.value() - c(0.5, 0.0)).norm() < 1e-13);
        let z = invert_map(&map("(z - 0.5)/(1 - 0.5*z)"), c(0.0, 0.0), DiskPoint::origin(), 1e-13).unwrap();
        assert!((z.value() - c(0.5, 0.0)).norm() < 1e-12);
        let err = invert_map(&map("conj(z)"), c(0.1, 0.0), p(0.2, 0.0), 1e-12).unwrap_err();
        assert!(matches!(err, MapError::InversionFailed(_)));
    }

    #[test]
    fn gamma_constant() {
        assert!((beta_constant(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((beta_constant(0.0).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert!((beta_constant(0.5).unwrap() - 1.694_426_169_587_958).abs() < 1e-10);
        assert!(beta_constant(1.5).is_err());
    }

    #[test]
    fn chord_criterion_for_identity() {
        let omega = MajorantSpec::identity();
        let pairs = [(p(0.1, 0.2), p(-0.5, 0.3)), (p(0.9, 0.0), p(0.0, -0.9))];
        let r = check_chord_criterion(&map("z"), &omega, 1.0, 1.0, 1.0, &pairs, 33).unwrap();
        assert!(r.holds_on_sample, "{r:?}");
        assert_eq!(r.worst_margin, 0.0);

        let pairs = [(p(0.98, 0.0), p(0.0, 0.98))];
        let r = check_chord_criterion(&map("z"), &omega, 0.0, 2.0, 1.0, &pairs, 401).unwrap();
        assert!(!r.holds_on_sample);
        assert!(r.derived_constants["max_chord_integral"] > 1.0);

        let pairs = [(p(0.1, 0.2), p(-0.5, 0.3))];
        let r = check_chord_criterion(&map("2*z"), &omega, 1.0, 2.0, 1.0, &pairs, 33).unwrap();
        assert!(r.holds_on_sample);
    }

    #[test]
    fn chord_criterion_rejects_non_univalent_samples() {
        let omega = MajorantSpec::identity();
        let pairs = [(p(0.5, 0.0), p(-0.5, 0.0))];
        assert!(check_chord_criterion(&map("z^2"), &omega, 1.0, 1.0, 1.0, &pairs, 33).is_err());
    }

    #[test]
    fn analytic_domination_for_affine_maps() {
        let cfg = QuadratureConfig::default();
        let pairs = [(p(0.1, 0.2), p(-0.5, 0.3)), (p(0.3, 0.0), p(-0.2, 0.0))];
        let id = crate::map::AnalyticPair::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![]).unwrap();
        let r = check_analytic_domination(&PlanarMap::from(id), None, 1.0, &pairs, &cfg).unwrap();
        assert!(r.holds_on_sample);
        assert_eq!((r.derived_constants["k1"], r.derived_constants["k2"]), (0.0, 0.0));

        let r = check_analytic_domination(&map("z + 0.6*conj(z)"), None, 1.6, &pairs, &cfg).unwrap();
        assert!(r.holds_on_sample, "{r:?}");
        assert!((r.derived_constants["k1"] - 0.6).abs() < 1e-15);
        assert!(check_analytic_domination(&map("z"), None, 2.0, &pairs, &cfg).is_err());
    }

    #[test]
    fn quotient_equivalence_for_identity() {
        let omega = MajorantSpec::identity();
        let pairs = [(p(0.1, 0.2), p(-0.5, 0.3))];
        let r =
            check_quotient_equivalence(&map("z"), &omega, 1.0, 1.0, 1.0, &pairs, &GridSpec::new(8, 16, 0.9)).unwrap();
        assert!(r.quotient_bounds.holds_on_sample && r.pointwise_bounds.holds_on_sample);
        assert_eq!(r.quotient_bounds.worst_margin, 0.0);
        assert_eq!(r.pointwise_bounds.worst_margin, 0.0);
        assert!((r.upper_from_pointwise - 1.0).abs() < 1e-12);
        let r0 =
            check_quotient_equivalence(&map("z"), &omega, 0.0, 2.0, 2.0, &pairs, &GridSpec::new(8, 16, 0.9)).unwrap();
        assert!((r0.beta - std::f64::consts::PI).abs() < 1e-12);
    }
}
