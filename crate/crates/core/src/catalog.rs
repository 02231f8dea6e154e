//! Named maps: the worked examples and standard extremals.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::expr::parse_expr;
use crate::map::{AnalyticPair, PlanarMap};
use crate::potential::{solve_poisson, QuadratureConfig};

pub type Params = BTreeMap<String, f64>;

/// How a catalog map is represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    Expression { expr: String, origin_value: Option<Complex64> },
    Series { pair: AnalyticPair },
    Poisson { psi: String, g: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDefinition {
    pub name: String,
    pub parameters: Params,
    pub description: String,
    pub representation: Representation,
    /// Bound on `|F - F_N|` over the closed disk for truncated series.
    pub truncation_bound: Option<f64>,
    pub notes: Vec<String>,
}

impl MapDefinition {
    fn expression(name: &str, parameters: Params, description: &str, expr: String) -> Self {
        MapDefinition {
            name: name.into(),
            parameters,
            description: description.into(),
            representation: Representation::Expression { expr, origin_value: None },
            truncation_bound: None,
            notes: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<PlanarMap> {
        self.build_with(&QuadratureConfig::default())
    }

    /// `cfg` only matters for the Poisson representation.
    pub fn build_with(&self, cfg: &QuadratureConfig) -> Result<PlanarMap> {
        let parse = |s: &str| parse_expr(s).map_err(|e| MapError::InvalidParameter(format!("catalog expression: {e}")));
        match &self.representation {
            Representation::Expression { expr, origin_value } => {
                Ok(PlanarMap::Expr { ast: parse(expr)?, origin_value: *origin_value })
            }
            Representation::Series { pair } => Ok(PlanarMap::Series(pair.clone())),
            Representation::Poisson { psi, g } => solve_poisson(&parse(psi)?, &parse(g)?, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub default: Option<f64>,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub parameters: Vec<ParamSpec>,
    pub description: String,
}

fn spec(name: &str, default: Option<f64>, constraint: &str) -> ParamSpec {
    ParamSpec { name: name.into(), default, constraint: constraint.into() }
}

/// Every builtin name with its parameter schema.
pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name: &str, parameters, description: &str| CatalogEntry {
        name: name.into(),
        parameters,
        description: description.into(),
    };
    vec![
        entry("identity", vec![], "f(z) = z"),
        entry("scale", vec![spec("c", None, "real, nonzero")], "f(z) = c z"),
        entry(
            "moebius",
            vec![
                spec("a", None, "|a| < 1 with a_im"),
                spec("a_im", Some(0.0), "imaginary part of a"),
                spec("t", Some(0.0), "rotation angle"),
            ],
            "f(z) = e^{it} (z - a)/(1 - conj(a) z), a disk automorphism",
        ),
        entry(
            "example13",
            vec![spec("alpha", None, "0 < alpha < 1/2")],
            "f(z) = z (log(e/|z|²))^alpha with f(0) = 0; quasiconformal, not Lipschitz at 0",
        ),
        entry("example15", vec![], "f(z) = 3z|z|² - z|z|⁸; (1, 729/2^{16/3})-elliptic but not quasiconformal"),
        entry(
            "polyharmonic",
            vec![
                spec("a<n>", Some(0.0), "coefficient of z^n, n >= 0 (a<n>_im for the imaginary part)"),
                spec("b<n>", Some(0.0), "b_n, so conj(b_n) multiplies conj(z)^n, n >= 1 (b<n>_im likewise)"),
            ],
            "harmonic polynomial sum a_n z^n + sum conj(b_n) conj(z)^n",
        ),
        entry(
            "kalaj-extremal",
            vec![
                spec("R", Some(1.0), "positive"),
                spec("mu<n>", Some(0.0), "coefficient of t^n in mu, sup |mu| <= 1 on the circle (mu<n>_im likewise)"),
                spec("degree", Some(DEFAULT_SERIES_DEGREE as f64), "series degree, at least 8"),
            ],
            "R (∫ dt/(1 + t² mu) + conj ∫ mu dt/(1 + t² mu)), extremal for |f_z| <= R/(1-|z|²)",
        ),
    ]
}

fn take(params: &mut Params, key: &str) -> Option<f64> {
    params.remove(key)
}

fn require(params: &mut Params, key: &str, name: &str) -> Result<f64> {
    take(params, key).ok_or_else(|| MapError::InvalidParameter(format!("{name} needs parameter {key}")))
}

fn reject_rest(params: &Params, name: &str) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(MapError::InvalidParameter(format!("{name} has no parameter {k}"))),
        None => Ok(()),
    }
}

/// Coefficients keyed `<prefix><n>` and `<prefix><n>_im`.
fn indexed(params: &mut Params, prefix: &str) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::new();
    let keys: Vec<String> = params.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
    for key in keys {
        let rest = &key[prefix.len()..];
        let (digits, imag) = match rest.strip_suffix("_im") {
            Some(d) => (d, true),
            None => (rest, false),
        };
        let Ok(n) = digits.parse::<usize>() else { continue };
        if n > 256 {
            return Err(MapError::InvalidParameter(format!("index in {key} exceeds 256")));
        }
        let v = params.remove(&key).unwrap_or_default();
        if out.len() <= n {
            out.resize(n + 1, Complex64::new(0.0, 0.0));
        }
        if imag {
            out[n].im = v;
        } else {
            out[n].re = v;
        }
    }
    Ok(out)
}

fn complex_literal(c: Complex64) -> String {
    format!("({} + {}*i)", c.re, c.im)
}

pub const DEFAULT_SERIES_DEGREE: usize = 64;

/// Builds a catalog map by name. Unknown parameters are rejected.
pub fn builtin_map(name: &str, params: &Params) -> Result<MapDefinition> {
    let mut rest = params.clone();
    let def = match name {
        "identity" => MapDefinition::expression(name, Params::new(), "f(z) = z", "z".into()),
        "scale" => {
            let c = require(&mut rest, "c", name)?;
            if c == 0.0 || !c.is_finite() {
                return Err(MapError::InvalidParameter("scale needs a finite nonzero c".into()));
            }
            MapDefinition::expression(name, Params::from([("c".into(), c)]), "f(z) = c z", format!("({c})*z"))
        }
        "moebius" => {
            let a = Complex64::new(require(&mut rest, "a", name)?, take(&mut rest, "a_im").unwrap_or(0.0));
            let t = take(&mut rest, "t").unwrap_or(0.0);
            if !(a.norm() < 1.0) || !t.is_finite() {
                return Err(MapError::InvalidParameter(format!("moebius needs |a| < 1, got {a}")));
            }
            let (al, rot) = (complex_literal(a), complex_literal(Complex64::from_polar(1.0, t)));
            MapDefinition::expression(
                name,
                Params::from([("a".into(), a.re), ("a_im".into(), a.im), ("t".into(), t)]),
                "disk automorphism e^{it} (z - a)/(1 - conj(a) z)",
                format!("{rot}*(z - {al})/(1 - conj({al})*z)"),
            )
        }
        "example13" => {
            let alpha = require(&mut rest, "alpha", name)?;
            if !(alpha > 0.0 && alpha < 0.5) {
                return Err(MapError::InvalidParameter(format!("example13 needs 0 < alpha < 1/2, got {alpha}")));
            }
            MapDefinition {
                representation: Representation::Expression {
                    expr: format!("z*pow(log(e/abs(z)^2), {alpha})"),
                    origin_value: Some(Complex64::new(0.0, 0.0)),
                },
                notes: vec!["f(0) = 0 by definition; the jet at the origin is singular".into()],
                ..MapDefinition::expression(
                    name,
                    Params::from([("alpha".into(), alpha)]),
                    "quasiconformal self-map of the disk that is not Lipschitz at the origin",
                    String::new(),
                )
            }
        }
        "example15" => MapDefinition::expression(
            name,
            Params::new(),
            "elliptic but not quasiconformal self-map 3z|z|² - z|z|⁸",
            "3*z*abs(z)^2 - z*abs(z)^8".into(),
        ),
        "polyharmonic" => {
            let a = indexed(&mut rest, "a")?;
            let b = indexed(&mut rest, "b")?;
            if b.first().is_some_and(|c| c.norm() != 0.0) {
                return Err(MapError::InvalidParameter("polyharmonic has no b0; put constants in a0".into()));
            }
            let anti: Vec<Complex64> = b.iter().map(|c| c.conj()).collect();
            MapDefinition {
                representation: Representation::Series { pair: AnalyticPair::new(a, anti)? },
                ..MapDefinition::expression(name, params.clone(), "harmonic polynomial", String::new())
            }
        }
        "kalaj-extremal" => {
            let r = take(&mut rest, "R").unwrap_or(1.0);
            let degree = take(&mut rest, "degree").unwrap_or(DEFAULT_SERIES_DEGREE as f64);
            if degree.fract() != 0.0 || !(8.0..=4096.0).contains(&degree) {
                return Err(MapError::InvalidParameter(format!("degree {degree} must be an integer in [8, 4096]")));
            }
            let mu = indexed(&mut rest, "mu")?;
            reject_rest(&rest, name)?;
            let mut def = kalaj_extremal(r, &mu, degree as usize)?;
            def.parameters = params.clone();
            return Ok(def);
        }
        _ => return Err(MapError::InvalidParameter(format!("unknown catalog map {name:?}"))),
    };
    reject_rest(&rest, name)?;
    Ok(def)
}

/// `Σ c_k t^k`.
fn poly(c: &[Complex64], t: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * t + a)
}

fn max_on_circle(c: &[Complex64], radius: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|j| poly(c, Complex64::from_polar(radius, 2.0 * PI * j as f64 / samples as f64)).norm())
        .fold(0.0, f64::max)
}

const CIRCLE_SAMPLES: usize = 4096;

/// The harmonic map `F = R(∫₀^z dt/(1+t²μ) + conj ∫₀^z μ dt/(1+t²μ))` for a
/// polynomial `μ` with `|μ| ≤ 1` on the circle, expanded to `degree`.
///
/// `F_z = R/(1+z²μ)` and `F_z̄ = conj(Rμ/(1+z²μ))`. The truncation bound
/// comes from Cauchy estimates on a circle of radius `s > 1` where
/// `|t²μ(t)| < 1`; when no such circle is found the bound is absent and a
/// note says so.
pub fn kalaj_extremal(r: f64, mu: &[Complex64], degree: usize) -> Result<MapDefinition> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(MapError::InvalidParameter(format!("R = {r} must be positive")));
    }
    if degree < 8 {
        return Err(MapError::InvalidParameter(format!("series degree {degree} must be at least 8")));
    }
    let mu_sup = max_on_circle(mu, 1.0, CIRCLE_SAMPLES);
    if mu_sup > 1.0 + 1e-12 {
        return Err(MapError::InvalidParameter(format!("sup |mu| on the circle is {mu_sup} > 1")));
    }
    // q = 1/(1 + t²μ) by the recurrence q_k = -Σ_j μ_j q_{k-2-j}.
    let mut q = vec![Complex64::new(0.0, 0.0); degree];
    q[0] = Complex64::new(1.0, 0.0);
    for k in 1..degree {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, m) in mu.iter().enumerate() {
            if j + 2 <= k {
                acc += m * q[k - 2 - j];
            }
        }
        q[k] = -acc;
    }
    let p: Vec<Complex64> =
        (0..degree).map(|k| mu.iter().enumerate().filter(|(j, _)| *j <= k).map(|(j, m)| m * q[k - j]).sum()).collect();
    let integrate = |c: &[Complex64]| -> Vec<Complex64> {
        std::iter::once(Complex64::new(0.0, 0.0))
            .chain(c.iter().enumerate().map(|(k, v)| v * r / (k + 1) as f64))
            .collect()
    };
    let analytic = integrate(&q);
    let anti: Vec<Complex64> = integrate(&p).into_iter().map(|c| c.conj()).collect();

    let mut t2mu = vec![Complex64::new(0.0, 0.0); 2];
    t2mu.extend_from_slice(mu);
    let mut notes = Vec::new();
    let bound = (1..=40)
        .map(|k| 1.0 + 0.025 * k as f64)
        .filter_map(|s| {
            let m = max_on_circle(&t2mu, s, CIRCLE_SAMPLES);
            (m < 1.0).then(|| {
                let tail = s.powi(-(degree as i32)) / ((1.0 - 1.0 / s) * (1.0 - m));
                r * (1.0 + max_on_circle(mu, s, CIRCLE_SAMPLES)) * tail
            })
        })
        .fold(None, |best: Option<f64>, b| Some(best.map_or(b, |x| x.min(b))));
    if bound.is_none() {
        notes.push("series does not converge uniformly on the closed disk: |z² mu| reaches 1 near the circle".into());
    }
    let mut parameters = Params::from([("R".into(), r), ("degree".into(), degree as f64)]);
    for (k, m) in mu.iter().enumerate() {
        parameters.insert(format!("mu{k}"), m.re);
        if m.im != 0.0 {
            parameters.insert(format!("mu{k}_im"), m.im);
        }
    }
    Ok(MapDefinition {
        name: "kalaj-extremal".into(),
        parameters,
        description: "harmonic diffeomorphism onto a convex domain of boundary length 2πR".into(),
        representation: Representation::Series { pair: AnalyticPair::new(analytic, anti)? },
        truncation_bound: bound,
        notes,
    })
}

/// Harmonic sense-preserving diffeomorphisms used by the regression suites.
pub fn harmonic_samples() -> Vec<MapDefinition> {
    let p = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<Params>();
    [
        ("identity", p(&[])),
        ("scale", p(&[("c", 2.0)])),
        ("moebius", p(&[("a", 0.5)])),
        ("moebius", p(&[("a", 0.3), ("a_im", -0.4), ("t", 1.0)])),
        ("polyharmonic", p(&[("a1", 1.0), ("b2", 0.3)])),
        ("polyharmonic", p(&[("a0", 0.2), ("a1", 1.0), ("b1", 0.25), ("a2", 0.1)])),
        ("kalaj-extremal", p(&[("mu0", 0.5)])),
        ("kalaj-extremal", p(&[("R", 2.0), ("mu1", 0.6)])),
    ]
    .iter()
    .map(|(n, ps)| builtin_map(n, ps).expect("sample parameters are valid"))
    .collect()
}

/// Sense-preserving catalog maps, harmonic or not, with default parameters.
pub fn sense_preserving_samples() -> Vec<MapDefinition> {
    let mut out = harmonic_samples();
    out.push(builtin_map("example15", &Params::new()).expect("valid"));
    for alpha in [0.1, 0.25, 0.4] {
        out.push(builtin_map("example13", &Params::from([("alpha".into(), alpha)])).expect("valid"));
    }
    out
}
