use anyhow::{bail, Context};
use num_complex::Complex64;
use qcmap::bounds::{diagnostics, summarize, BoundStatus};
use qcmap::coefficients::DEFAULT_RADII;
use qcmap::ellipticity::HypothesisReport;
use qcmap::lengths::{boundary_length, LengthKind, DEFAULT_PERIMETER_NODES, DEFAULT_RADIAL_NODES};
use qcmap::{
    builtin_map, catalog, check_analytic_domination, check_chord_criterion, coefficient_bounds_report,
    derivative_bounds_report, extract_coeffs, frontier, laplacian_residual, length_sup, parse_expr, perimeter,
    point_bounds_report, radial_length, solve_poisson, subharmonic_radial_check, BoundContext, DiskPoint,
    EllipticityParams, Expr, GridSpec, MajorantSpec, PlanarMap, QuadratureConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{Document, Summary};

fn parse(text: &str) -> anyhow::Result<Expr> {
    parse_expr(text).with_context(|| format!("parsing {text:?}"))
}

fn build_map(source: &MapSource, cfg: &QuadratureConfig) -> anyhow::Result<PlanarMap> {
    Ok(match source {
        MapSource::Expression { expr } => PlanarMap::from_expr(parse(expr)?),
        MapSource::Catalog { name, params } => builtin_map(name, params)?.build_with(cfg)?,
        MapSource::Poisson { psi, g } => solve_poisson(&parse(psi)?, &parse(g)?, cfg)?,
    })
}

fn to_values<T: Serialize>(items: &[T]) -> anyhow::Result<Vec<Value>> {
    items.iter().map(|i| Ok(serde_json::to_value(i)?)).collect()
}

/// Config block: the invocation as parsed plus everything resolved from it.
fn config(command: &Command, resolved: Value) -> anyhow::Result<Value> {
    Ok(json!({ "invocation": serde_json::to_value(command)?, "resolved": resolved }))
}

fn hypothesis_document(command: &Command, resolved: Value, report: HypothesisReport) -> anyhow::Result<Document> {
    let summary = Summary::verdict(Some(report.worst_margin), report.holds_on_sample);
    Ok(Document { config: config(command, resolved)?, reports: vec![serde_json::to_value(report)?], summary })
}

#[derive(Serialize)]
struct PointMetrics {
    z: DiskPoint,
    value: Option<Complex64>,
    dz: Option<Complex64>,
    dzbar: Option<Complex64>,
    op_norm: Option<f64>,
    lower_norm: Option<f64>,
    jacobian: Option<f64>,
    dilatation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn point_metrics(map: &PlanarMap, z: DiskPoint) -> PointMetrics {
    let mut row = PointMetrics {
        z,
        value: None,
        dz: None,
        dzbar: None,
        op_norm: None,
        lower_norm: None,
        jacobian: None,
        dilatation: None,
        error: None,
    };
    match map.jet(z) {
        Ok(jet) => {
            let m = jet.metrics();
            row.value = Some(jet.value);
            row.dz = Some(jet.dz);
            row.dzbar = Some(jet.dzbar);
            row.op_norm = Some(m.op_norm);
            row.lower_norm = Some(m.lower_norm);
            row.jacobian = Some(m.jacobian);
            row.dilatation = m.dilatation;
        }
        Err(e) => {
            row.value = map.value(z.value()).ok();
            row.error = Some(e.to_string());
        }
    }
    row
}

fn sample_grid() -> GridSpec {
    GridSpec { refine_rounds: 0, ..GridSpec::new(4, 8, 0.9) }
}

pub fn run(command: &Command) -> anyhow::Result<(Document, &OutputArgs)> {
    let doc = match command {
        Command::Analyze(a) => {
            let (source, cfg) = (a.map.source()?, a.quad.resolve()?);
            let map = build_map(&source, &cfg)?;
            let (points, grid) = match &a.points {
                Some(text) => (parse_points(text)?, None),
                None => {
                    let grid = a.grid.resolve(sample_grid())?;
                    (grid.points().collect(), Some(grid))
                }
            };
            let rows: Vec<PointMetrics> = points.iter().map(|&z| point_metrics(&map, z)).collect();
            let failures = rows.iter().filter(|r| r.error.is_some()).count();
            Document {
                config: config(command, json!({ "map": source, "grid": grid, "quadrature": cfg }))?,
                reports: to_values(&rows)?,
                summary: Summary::data().with("failed_points", failures)?,
            }
        }
        Command::Frontier(a) => {
            let (source, cfg, grid) = (a.map.source()?, a.quad.resolve()?, a.grid.resolve(GridSpec::default())?);
            let map = build_map(&source, &cfg)?;
            let report = frontier(&map, &a.k, &grid)?;
            Document {
                config: config(command, json!({ "map": source, "grid": grid, "quadrature": cfg }))?,
                reports: vec![serde_json::to_value(&report)?],
                summary: Summary::data(),
            }
        }
        Command::Bounds(a) => bounds(command, a)?,
        Command::Coeffs(a) => {
            let (source, cfg) = (a.map.source()?, a.quad.resolve()?);
            let map = build_map(&source, &cfg)?;
            let radii = a.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
            let table = extract_coeffs(&map, a.degree, &radii)?;
            if !table.valid {
                eprintln!("warning: radii disagree by {:e}; the map may not be harmonic", table.disagreement);
            }
            Document {
                config: config(command, json!({ "map": source, "quadrature": cfg, "radii": radii }))?,
                summary: Summary::data().with("valid", table.valid)?,
                reports: vec![serde_json::to_value(table)?],
            }
        }
        Command::Length(a) => {
            let (source, cfg) = (a.map.source()?, a.quad.resolve()?);
            let map = build_map(&source, &cfg)?;
            let kind = match a.kind {
                LengthChoice::Perimeter => LengthKind::Perimeter,
                LengthChoice::Radial => LengthKind::Radial,
                LengthChoice::Boundary => LengthKind::Boundary,
            };
            let mut resolved = json!({ "map": source, "quadrature": cfg });
            let reports = if a.sup {
                let grid = a.grid.resolve(GridSpec::default())?;
                resolved["grid"] = serde_json::to_value(grid)?;
                vec![serde_json::to_value(length_sup(&map, kind, &grid)?)?]
            } else {
                match kind {
                    LengthKind::Boundary => vec![serde_json::to_value(boundary_length(&map)?)?],
                    LengthKind::Perimeter => {
                        let nodes = a.nodes.unwrap_or(DEFAULT_PERIMETER_NODES);
                        let reports = a.r.iter().map(|&r| perimeter(&map, r, nodes)).collect::<Result<Vec<_>, _>>()?;
                        to_values(&reports)?
                    }
                    LengthKind::Radial => {
                        let nodes = a.nodes.unwrap_or(DEFAULT_RADIAL_NODES);
                        let reports =
                            a.r.iter()
                                .map(|&r| radial_length(&map, r, a.theta, nodes))
                                .collect::<Result<Vec<_>, _>>()?;
                        to_values(&reports)?
                    }
                }
            };
            Document { config: config(command, resolved)?, reports, summary: Summary::data() }
        }
        Command::Solve(a) => {
            let (cfg, grid) = (a.quad.resolve()?, a.grid.resolve(sample_grid())?);
            let g = parse(&a.g)?;
            let map = solve_poisson(&parse(&a.psi)?, &g, &cfg)?;
            #[derive(Serialize)]
            struct Sample {
                z: DiskPoint,
                value: Complex64,
                residual: Option<f64>,
            }
            let rows = grid
                .points()
                .map(|z| Ok(Sample { z, value: map.value(z.value())?, residual: laplacian_residual(&map, &g, z).ok() }))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let worst = rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
            Document {
                config: config(command, json!({ "grid": grid, "quadrature": cfg }))?,
                reports: to_values(&rows)?,
                summary: Summary::data().with("max_residual", worst)?,
            }
        }
        Command::CheckThm11(a) => {
            let (source, cfg, pairs) = (a.map.source()?, a.quad.resolve()?, a.pairs.resolve()?);
            let map = build_map(&source, &cfg)?;
            let omega = MajorantSpec::parse(&a.omega)?;
            let report = check_chord_criterion(&map, &omega, a.alpha, a.c1, a.c2, &pairs, a.line_nodes)?;
            hypothesis_document(command, json!({ "map": source, "quadrature": cfg, "pairs": pairs }), report)?
        }
        Command::CheckProp14(a) => {
            let (source, cfg, pairs) = (a.map.source()?, a.quad.resolve()?, a.pairs.resolve()?);
            let map = build_map(&source, &cfg)?;
            let g = match (&a.source, &source) {
                (Some(text), _) => Some(parse(text)?),
                (None, MapSource::Poisson { g, .. }) => Some(parse(g)?),
                (None, _) => None,
            };
            let report = check_analytic_domination(&map, g.as_ref(), a.c3, &pairs, &cfg)?;
            hypothesis_document(command, json!({ "map": source, "quadrature": cfg, "pairs": pairs }), report)?
        }
        Command::CheckSubharmonic(a) => {
            let grid = a.grid.resolve(GridSpec::default())?;
            let report = subharmonic_radial_check(&parse(&a.phi)?, &grid)?;
            hypothesis_document(command, json!({ "grid": grid }), report)?
        }
        Command::Catalog(_) => {
            Document { config: config(command, json!({}))?, reports: to_values(&catalog())?, summary: Summary::data() }
        }
    };
    Ok((doc, output_args(command)))
}

fn bounds(command: &Command, a: &BoundsArgs) -> anyhow::Result<Document> {
    let (source, cfg) = (a.map.source()?, a.quad.resolve()?);
    if a.n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    let map = build_map(&source, &cfg)?;
    let mut ctx = BoundContext::new(EllipticityParams::new(a.k, a.k_prime)?);
    if let Some(r) = a.r {
        ctx = ctx.with_r(r, "given");
    }
    if let Some(l) = a.perimeter_sup {
        ctx = ctx.with_perimeter_sup(l);
    }
    if let Some(l) = a.radial_sup {
        ctx = ctx.with_radial_sup(l);
    }
    let degree = a.n_max.max(qcmap::coefficients::DEFAULT_DEGREE);
    ctx = ctx.with_coeffs(extract_coeffs(&map, degree, &DEFAULT_RADII)?);
    if a.measure {
        ctx = ctx.measure(&map, 64)?;
    }
    let mut reports = coefficient_bounds_report(&ctx, a.n_max);
    let mut resolved = json!({ "map": source, "quadrature": cfg });
    if a.derivatives {
        let grid = a.grid.resolve(GridSpec { refine_rounds: 0, ..GridSpec::new(24, 48, 0.99) })?;
        resolved["grid"] = serde_json::to_value(grid)?;
        reports.extend(derivative_bounds_report(&ctx, &map, &grid)?);
    }
    if let Some(text) = &a.points {
        reports.extend(point_bounds_report(&ctx, &map, &parse_points(text)?));
    }
    let s = summarize(&reports);
    let holds = !reports.iter().any(|r| r.status == BoundStatus::Violated);
    let diag = diagnostics(&ctx, &reports);
    let mut ctx_view = serde_json::to_value(&ctx)?;
    ctx_view["coeffs"] = json!({ "degree": degree, "valid": ctx.coeffs.as_ref().map(|c| c.valid) });
    resolved["context"] = ctx_view;
    Ok(Document {
        config: config(command, resolved)?,
        reports: to_values(&reports)?,
        summary: Summary::verdict(s.worst_margin, holds)
            .with("worst", s.worst)?
            .with("holds", s.holds)?
            .with("violated", s.violated)?
            .with("indeterminate", s.indeterminate)?
            .with("diagnostics", diag)?,
    })
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Analyze(a) => &a.out,
        Command::Frontier(a) => &a.out,
        Command::Bounds(a) => &a.out,
        Command::Coeffs(a) => &a.out,
        Command::Length(a) => &a.out,
        Command::Solve(a) => &a.out,
        Command::CheckThm11(a) => &a.out,
        Command::CheckProp14(a) => &a.out,
        Command::CheckSubharmonic(a) => &a.out,
        Command::Catalog(a) => &a.out,
    }
}
