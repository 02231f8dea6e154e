//! Disk mappings in their three representations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::expr::Expr;
use crate::jet::{DiskPoint, WirtingerJet};
use crate::potential::{horner, Order, PoissonSolutionMap};

/// `f = Σ analytic[n] zⁿ + Σ_{n≥1} anti[n] z̄ⁿ`.
///
/// `anti[0]` must be zero: the constant term lives in `analytic[0]`. The
/// entries of `anti` are the literal coefficients of `z̄ⁿ`, i.e. `b̄ₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPair {
    pub analytic: Vec<Complex64>,
    pub anti: Vec<Complex64>,
}

impl AnalyticPair {
    pub fn new(analytic: Vec<Complex64>, mut anti: Vec<Complex64>) -> Result<Self> {
        if anti.first().is_some_and(|c| *c != Complex64::new(0.0, 0.0)) {
            return Err(MapError::InvalidParameter("constant term belongs to the analytic part".into()));
        }
        if anti.is_empty() {
            anti.push(Complex64::new(0.0, 0.0));
        }
        if analytic.iter().chain(&anti).any(|c| !c.is_finite()) {
            return Err(MapError::InvalidParameter("non-finite series coefficient".into()));
        }
        Ok(AnalyticPair { analytic, anti })
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        horner(&self.analytic, z).0 + horner(&self.anti, z.conj()).0
    }

    pub fn jet(&self, z: Complex64) -> WirtingerJet {
        let (hv, hd) = horner(&self.analytic, z);
        let (gv, gd) = horner(&self.anti, z.conj());
        WirtingerJet::new(hv + gv, hd, gd)
    }

    /// Value and derivative of the analytic part `h₁`.
    pub fn analytic_part(&self, z: Complex64) -> (Complex64, Complex64) {
        horner(&self.analytic, z)
    }
}

/// A mapping of the unit disk.
#[derive(Debug)]
pub enum PlanarMap {
    /// An expression in `z`. `origin_value` overrides the value at exactly
    /// `z = 0`, where the jet is then reported as singular.
    Expr {
        ast: Expr,
        origin_value: Option<Complex64>,
    },
    Series(AnalyticPair),
    Poisson(Box<PoissonSolutionMap>),
}

impl PlanarMap {
    pub fn from_expr(ast: Expr) -> Self {
        PlanarMap::Expr { ast, origin_value: None }
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        match self {
            PlanarMap::Expr { ast, origin_value } => match origin_value {
                Some(v) if z == Complex64::new(0.0, 0.0) => Ok(*v),
                _ => Ok(ast.eval(z)?),
            },
            PlanarMap::Series(pair) => Ok(pair.value(z)),
            PlanarMap::Poisson(p) => Ok(p.eval(DiskPoint::new(z)?, Order::Value)?.value),
        }
    }

    pub fn jet(&self, z: DiskPoint) -> Result<WirtingerJet> {
        let zv = z.value();
        let jet = match self {
            PlanarMap::Expr { ast, origin_value } => {
                if origin_value.is_some() && zv == Complex64::new(0.0, 0.0) {
                    return Err(MapError::singular(zv));
                }
                ast.jet(zv)?
            }
            PlanarMap::Series(pair) => pair.jet(zv),
            PlanarMap::Poisson(p) => p.eval(z, Order::Jet)?,
        };
        if jet.is_finite() {
            Ok(jet)
        } else {
            Err(MapError::singular(zv))
        }
    }

    /// Value on the unit circle at angle `theta`.
    pub fn boundary_value(&self, theta: f64) -> Result<Complex64> {
        match self {
            PlanarMap::Poisson(p) => p.boundary_value(theta),
            _ => self.value(Complex64::from_polar(1.0, theta)),
        }
    }

    /// The harmonic part `f + G[g]`; equal to `f` outside the Poisson form.
    pub fn harmonic_value(&self, z: Complex64) -> Result<Complex64> {
        match self {
            PlanarMap::Poisson(p) => {
                DiskPoint::new(z)?;
                Ok(p.poisson().eval(z, Order::Value).value)
            }
            _ => self.value(z),
        }
    }

    /// Value and derivative of the analytic part `h₁` when the
    /// representation carries it.
    pub fn analytic_part(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        match self {
            PlanarMap::Series(pair) => Some(pair.analytic_part(z)),
            PlanarMap::Poisson(p) => Some(horner(&p.poisson().analytic_coefficients(), z)),
            PlanarMap::Expr { .. } => None,
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            PlanarMap::Expr { ast, .. } => ast.to_string(),
            PlanarMap::Series(pair) => {
                format!("series with {} analytic and {} anti-analytic terms", pair.analytic.len(), pair.anti.len())
            }
            PlanarMap::Poisson(p) => format!("P[{}] - G[{}]", p.psi, p.g),
        }
    }
}

impl From<AnalyticPair> for PlanarMap {
    fn from(pair: AnalyticPair) -> Self {
        PlanarMap::Series(pair)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn series_matches_expression() {
        let pair =
            AnalyticPair::new(vec![c(0.1, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]).unwrap();
        let expr = PlanarMap::from_expr(parse_expr("0.1 + z + 0.3*conj(z)^2").unwrap());
        let series = PlanarMap::from(pair);
        let z = DiskPoint::new(c(0.4, -0.3)).unwrap();
        let a = expr.jet(z).unwrap();
        let b = series.jet(z).unwrap();
        assert!((a.value - b.value).norm() < 1e-15);
        assert!((a.dz - b.dz).norm() < 1e-15);
        assert!((a.dzbar - b.dzbar).norm() < 1e-15);
        assert_eq!(series.analytic_part(z.value()).unwrap().1, c(1.0, 0.0));
        assert!(expr.analytic_part(z.value()).is_none());
    }

    #[test]
    fn series_rejects_constant_anti_term() {
        assert!(AnalyticPair::new(vec![], vec![c(1.0, 0.0)]).is_err());
        assert!(AnalyticPair::new(vec![c(f64::NAN, 0.0)], vec![]).is_err());
    }

    #[test]
    fn origin_override_flags_the_jet() {
        let map = PlanarMap::Expr {
            ast: parse_expr("z*pow(log(e/abs(z)^2), 0.25)").unwrap(),
            origin_value: Some(c(0.0, 0.0)),
        };
        assert_eq!(map.value(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(map.jet(DiskPoint::origin()), Err(MapError::SingularJet { .. })));
        assert!(map.jet(DiskPoint::new(c(0.5, 0.0)).unwrap()).is_ok());
    }
}
