//! Coefficient and derivative inequalities evaluated on concrete maps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{extract_coeffs, CoeffTable, DEFAULT_DEGREE, DEFAULT_RADII};
use crate::ellipticity::{margin, EllipticityParams};
use crate::error::{MapError, Result};
use crate::grid::GridSpec;
use crate::jet::DiskPoint;
use crate::lengths::{boundary_length, length_sup, perimeter_ladder, LengthKind, DEFAULT_PERIMETER_NODES};
use crate::map::PlanarMap;

/// Margins above `-1e-9` count as holding.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    /// `|aₙ| + |bₙ| ≤ K ℓ_f(1) / (2nπ)`.
    #[serde(rename = "CRP-1c")]
    PerimeterCoefficient,
    /// `‖D_f(z)‖ ≤ ℓ_f(1) √K / (2π(1-|z|))`.
    #[serde(rename = "CRP-2c")]
    PerimeterDerivative,
    /// `|aₙ| + |bₙ| ≤ ℓ_f(1) / (nπ)`.
    #[serde(rename = "Mat-1")]
    HarmonicPerimeterCoefficient,
    /// `|f_z(z)| ≤ R / (1-|z|²)`.
    #[serde(rename = "kalaj-1")]
    BoundaryLengthDerivative,
    /// `|aₙ| + |bₙ| ≤ (√K′ + KR) / n`.
    #[serde(rename = "chen-1.0")]
    BoundaryLengthCoefficient,
    /// `‖D_f(z)‖ ≤ (R + (-R + √(K′ + KK′ + K²R²))/(1+K)) / (1-|z|²)`.
    #[serde(rename = "CP-K")]
    EllipticDerivative,
    /// `|aₙ| + |bₙ| ≤ K ℓ*_f(1)`.
    #[serde(rename = "eq-2017")]
    RadialCoefficient,
    /// `|aₙ| + |bₙ| ≤ √K′ + K ℓ*_f(1)`.
    #[serde(rename = "chen-1.2")]
    EllipticRadialCoefficient,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::PerimeterCoefficient,
        InequalityId::PerimeterDerivative,
        InequalityId::HarmonicPerimeterCoefficient,
        InequalityId::BoundaryLengthDerivative,
        InequalityId::BoundaryLengthCoefficient,
        InequalityId::EllipticDerivative,
        InequalityId::RadialCoefficient,
        InequalityId::EllipticRadialCoefficient,
    ];

    pub const COEFFICIENT: [InequalityId; 5] = [
        InequalityId::PerimeterCoefficient,
        InequalityId::HarmonicPerimeterCoefficient,
        InequalityId::BoundaryLengthCoefficient,
        InequalityId::RadialCoefficient,
        InequalityId::EllipticRadialCoefficient,
    ];

    pub const DERIVATIVE: [InequalityId; 3] =
        [InequalityId::BoundaryLengthDerivative, InequalityId::EllipticDerivative, InequalityId::PerimeterDerivative];

    pub fn label(self) -> &'static str {
        match self {
            InequalityId::PerimeterCoefficient => "CRP-1c",
            InequalityId::PerimeterDerivative => "CRP-2c",
            InequalityId::HarmonicPerimeterCoefficient => "Mat-1",
            InequalityId::BoundaryLengthDerivative => "kalaj-1",
            InequalityId::BoundaryLengthCoefficient => "chen-1.0",
            InequalityId::EllipticDerivative => "CP-K",
            InequalityId::RadialCoefficient => "eq-2017",
            InequalityId::EllipticRadialCoefficient => "chen-1.2",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InequalityId {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.label() == s)
            .ok_or_else(|| MapError::InvalidParameter(format!("unknown inequality {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundIndex {
    Coefficient(usize),
    Point(DiskPoint),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Holds,
    Violated,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality_id: InequalityId,
    pub index: BoundIndex,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// `rhs - lhs`.
    pub margin: Option<f64>,
    pub status: BoundStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl BoundReport {
    fn new(id: InequalityId, index: BoundIndex, lhs: Option<f64>, rhs: std::result::Result<f64, String>) -> Self {
        match (lhs, rhs) {
            (Some(l), Ok(r)) => {
                let m = margin(r, l);
                let status = if m >= -BOUND_TOLERANCE { BoundStatus::Holds } else { BoundStatus::Violated };
                BoundReport { inequality_id: id, index, lhs, rhs: Some(r), margin: Some(m), status, note: None }
            }
            (l, r) => BoundReport {
                inequality_id: id,
                index,
                lhs: l,
                rhs: r.as_ref().ok().copied(),
                margin: None,
                status: BoundStatus::Indeterminate,
                note: Some(r.err().unwrap_or_else(|| "left-hand side unavailable".into())),
            },
        }
    }
}

/// Everything the right-hand sides need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub params: EllipticityParams,
    /// Boundary length over `2π`.
    #[serde(rename = "R")]
    pub r: Option<f64>,
    /// How `R` was obtained.
    pub r_source: Option<String>,
    /// `ℓ_f(1)`.
    pub perimeter_sup: Option<f64>,
    /// `ℓ*_f(1)`.
    pub radial_sup: Option<f64>,
    pub coeffs: Option<CoeffTable>,
}

impl BoundContext {
    pub fn new(params: EllipticityParams) -> Self {
        BoundContext { params, r: None, r_source: None, perimeter_sup: None, radial_sup: None, coeffs: None }
    }

    pub fn with_r(mut self, r: f64, source: &str) -> Self {
        self.r = Some(r);
        self.r_source = Some(source.to_string());
        self
    }

    pub fn with_perimeter_sup(mut self, l: f64) -> Self {
        self.perimeter_sup = Some(l);
        self
    }

    pub fn with_radial_sup(mut self, l: f64) -> Self {
        self.radial_sup = Some(l);
        self
    }

    pub fn with_coeffs(mut self, coeffs: CoeffTable) -> Self {
        self.coeffs = Some(coeffs);
        self
    }

    /// Fills every field the caller left empty by measuring `map`.
    ///
    /// `R` comes from the extrapolated boundary polyline, `ℓ_f(1)` from the
    /// perimeter ladder `r = 1 - 2^{-k}` (the larger of its last rung and its
    /// extrapolated limit), `ℓ*_f(1)` from radial lengths on `angles` rays.
    pub fn measure(mut self, map: &PlanarMap, angles: usize) -> Result<Self> {
        if self.r.is_none() {
            self.r = Some(boundary_length(map)?.half_length_over_pi);
            self.r_source = Some("boundary polyline limit / 2π".into());
        }
        if self.perimeter_sup.is_none() {
            let ladder = perimeter_ladder(map, 14, DEFAULT_PERIMETER_NODES * 2)?;
            let last = ladder.rungs.last().map_or(0.0, |r| r.1);
            self.perimeter_sup = Some(last.max(ladder.limit));
        }
        if self.radial_sup.is_none() {
            let grid = GridSpec { refine_rounds: 0, ..GridSpec::new(1, angles.max(1), 0.5) };
            self.radial_sup = Some(length_sup(map, LengthKind::Radial, &grid)?.value);
        }
        if self.coeffs.is_none() {
            self.coeffs = Some(extract_coeffs(map, DEFAULT_DEGREE, &DEFAULT_RADII)?);
        }
        Ok(self)
    }

    fn need(field: Option<f64>, name: &str) -> std::result::Result<f64, String> {
        field.ok_or_else(|| format!("context lacks {name}"))
    }

    /// Right-hand side of a coefficient inequality at index `n ≥ 1`.
    pub fn coefficient_rhs(&self, id: InequalityId, n: usize) -> std::result::Result<f64, String> {
        let (k, kp, nf) = (self.params.k, self.params.k_prime, n as f64);
        match id {
            InequalityId::PerimeterCoefficient => {
                Ok(k * Self::need(self.perimeter_sup, "perimeter_sup")? / (2.0 * nf * PI))
            }
            InequalityId::HarmonicPerimeterCoefficient => {
                Ok(Self::need(self.perimeter_sup, "perimeter_sup")? / (nf * PI))
            }
            InequalityId::BoundaryLengthCoefficient => Ok((kp.sqrt() + k * Self::need(self.r, "R")?) / nf),
            InequalityId::RadialCoefficient => Ok(k * Self::need(self.radial_sup, "radial_sup")?),
            InequalityId::EllipticRadialCoefficient => Ok(kp.sqrt() + k * Self::need(self.radial_sup, "radial_sup")?),
            _ => Err(format!("{id} is not a coefficient inequality")),
        }
    }

    /// Right-hand side of a derivative inequality at `z`.
    pub fn derivative_rhs(&self, id: InequalityId, z: DiskPoint) -> std::result::Result<f64, String> {
        let (k, kp, m) = (self.params.k, self.params.k_prime, z.modulus());
        match id {
            InequalityId::BoundaryLengthDerivative => Ok(Self::need(self.r, "R")? / (1.0 - m * m)),
            InequalityId::EllipticDerivative => {
                let r = Self::need(self.r, "R")?;
                let bracket = r + (-r + (kp + k * kp + k * k * r * r).sqrt()) / (1.0 + k);
                Ok(bracket / (1.0 - m * m))
            }
            InequalityId::PerimeterDerivative => {
                Ok(Self::need(self.perimeter_sup, "perimeter_sup")? * k.sqrt() / (2.0 * PI * (1.0 - m)))
            }
            _ => Err(format!("{id} is not a derivative inequality")),
        }
    }
}

/// One report per coefficient inequality and `n = 1..=n_max`, with
/// `lhs = |aₙ| + |bₙ|`.
pub fn coefficient_bounds_report(ctx: &BoundContext, n_max: usize) -> Vec<BoundReport> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let lhs = match &ctx.coeffs {
            Some(t) if t.valid && n <= t.degree() => Some(t.lhs(n)),
            _ => None,
        };
        for id in InequalityId::COEFFICIENT {
            let mut report = BoundReport::new(id, BoundIndex::Coefficient(n), lhs, ctx.coefficient_rhs(id, n));
            if lhs.is_none() && report.note.as_deref() == Some("left-hand side unavailable") {
                report.note = Some(match &ctx.coeffs {
                    None => "context lacks coefficients".into(),
                    Some(t) if !t.valid => "coefficient table failed the harmonicity check".into(),
                    Some(_) => format!("index {n} beyond the extracted degree"),
                });
            }
            out.push(report);
        }
    }
    out
}

/// Reports for each derivative inequality at each of `points`.
///
/// `|f_z|` feeds the first and `‖D_f‖` the other two.
pub fn point_bounds_report(ctx: &BoundContext, map: &PlanarMap, points: &[DiskPoint]) -> Vec<BoundReport> {
    points
        .par_iter()
        .map(|&z| {
            let jet = map.jet(z).ok();
            InequalityId::DERIVATIVE
                .into_iter()
                .map(|id| {
                    let lhs = jet.map(|j| match id {
                        InequalityId::BoundaryLengthDerivative => j.dz.norm(),
                        _ => j.metrics().op_norm,
                    });
                    BoundReport::new(id, BoundIndex::Point(z), lhs, ctx.derivative_rhs(id, z))
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// [`point_bounds_report`] over every grid point.
pub fn derivative_bounds_report(ctx: &BoundContext, map: &PlanarMap, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    grid.validate()?;
    let points: Vec<DiskPoint> = grid.points().collect();
    Ok(point_bounds_report(ctx, map, &points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub worst_margin: Option<f64>,
    pub worst: Option<(InequalityId, BoundIndex)>,
    pub holds: usize,
    pub violated: usize,
    pub indeterminate: usize,
}

pub fn summarize(reports: &[BoundReport]) -> BoundSummary {
    let mut s = BoundSummary { worst_margin: None, worst: None, holds: 0, violated: 0, indeterminate: 0 };
    for r in reports {
        match r.status {
            BoundStatus::Holds => s.holds += 1,
            BoundStatus::Violated => s.violated += 1,
            BoundStatus::Indeterminate => s.indeterminate += 1,
        }
        if let Some(m) = r.margin {
            if s.worst_margin.is_none_or(|w| m < w) {
                s.worst_margin = Some(m);
                s.worst = Some((r.inequality_id, r.index));
            }
        }
    }
    s
}

/// Sanity checks on a batch of reports and the context behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    /// The `(√K′ + KR)/n` right-hand side decreases in `n`.
    pub coefficient_rhs_decreasing: bool,
    /// The elliptic derivative right-hand side increases in `|z|`.
    pub derivative_rhs_increasing: bool,
    /// For `K′ = 0` and `K ≤ 2`: whether `KR/n ≤ ℓ_f(1)/(nπ)`, i.e. the
    /// boundary-length coefficient bound is the sharper one.
    pub boundary_bound_sharper: Option<bool>,
}

pub fn diagnostics(ctx: &BoundContext, reports: &[BoundReport]) -> BoundDiagnostics {
    let mut coeff: Vec<(usize, f64)> = reports
        .iter()
        .filter(|r| r.inequality_id == InequalityId::BoundaryLengthCoefficient)
        .filter_map(|r| match (r.index, r.rhs) {
            (BoundIndex::Coefficient(n), Some(v)) => Some((n, v)),
            _ => None,
        })
        .collect();
    coeff.sort_by_key(|c| c.0);
    let mut deriv: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.inequality_id == InequalityId::EllipticDerivative)
        .filter_map(|r| match (r.index, r.rhs) {
            (BoundIndex::Point(z), Some(v)) => Some((z.modulus(), v)),
            _ => None,
        })
        .collect();
    deriv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let boundary_bound_sharper = match (ctx.r, ctx.perimeter_sup) {
        (Some(r), Some(l)) if ctx.params.k_prime == 0.0 && ctx.params.k <= 2.0 => {
            Some(ctx.params.k * r <= l / PI * (1.0 + 1e-9))
        }
        _ => None,
    };
    BoundDiagnostics {
        coefficient_rhs_decreasing: coeff.windows(2).all(|w| w[1].1 < w[0].1 || w[0].1 == 0.0),
        derivative_rhs_increasing: deriv.windows(2).all(|w| w[1].0 == w[0].0 || w[1].1 > w[0].1),
        boundary_bound_sharper,
    }
}
