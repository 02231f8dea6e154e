//! The twelve acceptance criteria. Prints one PASS/FAIL line each and exits
//! non-zero when any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use qcmap::bounds::{summarize, BoundIndex, BoundStatus, InequalityId};
use qcmap::catalog::{builtin_map, harmonic_samples, sense_preserving_samples, MapDefinition, Params};
use qcmap::coefficients::DEFAULT_RADII;
use qcmap::ellipticity::{source_sup, QcStatus};
use qcmap::lengths::{boundary_length, radial_integral_profile, DEFAULT_RADIAL_NODES};
use qcmap::{
    beta_constant, coefficient_bounds_report, derivative_bounds_report, extract_coeffs, grid_sup, laplacian_residual,
    length_sup, min_kprime, parse_expr, point_bounds_report, qc_constant, radial_length, solve_poisson,
    subharmonic_radial_check, AnalyticPair, BoundContext, CauchyPair, DiskPoint, EllipticityParams, GreenPotential,
    LengthKind, PlanarMap, QuadratureConfig,
};
use qcmap::{GridSpec, Order};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn catalog(name: &str, pairs: &[(&str, f64)]) -> PlanarMap {
    builtin_map(name, &params(pairs)).unwrap().build().unwrap()
}

/// `max over r of 18 r⁴ (3 − 4r⁶)(1 − r⁶)`, by golden-section search in
/// `s = r⁶ ∈ [0, 3/4]`.
fn golden_section_oracle() -> f64 {
    let g = |s: f64| 18.0 * s.powf(2.0 / 3.0) * (3.0 - 4.0 * s) * (1.0 - s);
    let (mut a, mut b) = (0.0, 0.75);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-15 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    g((a + b) / 2.0)
}

/// Frozen high-precision value of the same maximum.
const KPRIME_ORACLE: f64 = 10.852_622_065_615_34;

fn example15_constants() -> Outcome {
    let f = catalog("example15", &[]);
    let grid = GridSpec::default();
    let exact = 729.0 / 2f64.powf(16.0 / 3.0);
    let sup = grid_sup(&grid, |p| {
        let m = f.jet(p)?.metrics();
        Ok(m.op_norm * m.op_norm)
    })
    .map_err(|e| e.to_string())?;
    let est = min_kprime(&f, 1.0, &grid).map_err(|e| e.to_string())?;
    let oracle = golden_section_oracle();
    let near = (sup.witness.modulus() - 2f64.powf(-1.0 / 3.0)).abs();
    check(
        (sup.value - exact).abs() <= 1e-6
            && near < 1e-2
            && est.k_prime > 10.5
            && est.k_prime < 11.2
            && est.k_prime <= 18.08153
            && (est.k_prime - oracle).abs() <= 1e-6
            && (oracle - KPRIME_ORACLE).abs() <= 1e-9,
        format!(
            "sup ‖D‖² = {:.10} (exact {exact:.10}) at |z| = {:.5}; K' = {:.10}, oracle {oracle:.10}",
            sup.value,
            sup.witness.modulus(),
            est.k_prime
        ),
    )
}

fn example15_not_quasiconformal() -> Outcome {
    let f = catalog("example15", &[]);
    let r = 1.0 - 1e-4;
    let d = f.jet(DiskPoint::from_polar(r, 0.3).unwrap()).unwrap().metrics().dilatation.unwrap_or(f64::INFINITY);
    let qc = qc_constant(&f, &GridSpec::default()).map_err(|e| e.to_string())?;
    let rising = qc.outer_shells.windows(2).all(|w| w[1].1 > w[0].1);
    check(
        d > 0.999 && rising && qc.status == QcStatus::Unbounded,
        format!(
            "dilatation at 1-1e-4 = {d:.8} (needs > 0.999); outer shells rising: {rising}; qc_constant status {:?}",
            qc.status
        ),
    )
}

fn green_derivative_bound() -> Outcome {
    let cfg = QuadratureConfig::default();
    let grid = GridSpec { refine_rounds: 0, ..GridSpec::new(40, 64, 1.0 - 1e-3) };
    let mut detail = Vec::new();
    let mut ok = true;
    let derivative_sup = |g: &qcmap::Expr, grid: &GridSpec| -> Result<f64, String> {
        let gp = GreenPotential::new(g.clone(), cfg).map_err(|e| e.to_string())?;
        let mut sup: f64 = 0.0;
        for p in grid.points() {
            let j = gp.eval(p, Order::Jet).map_err(|e| e.to_string())?;
            sup = sup.max(j.dz.norm()).max(j.dzbar.norm());
        }
        Ok(sup)
    };
    for src in ["1", "z", "re(z)", "abs(z)^2"] {
        let g = parse_expr(src).unwrap();
        let bound = source_sup(&g).map_err(|e| e.to_string())? / 3.0 + 1e-6;
        let sup = derivative_sup(&g, &grid)?;
        ok &= sup <= bound;
        detail.push(format!("g = {src}: {sup:.6} <= {bound:.6}"));
    }
    // The supremum for g ≡ 1 is approached only at the circle.
    let outer = GridSpec { refine_rounds: 0, ..GridSpec::new(40, 64, 1.0 - 1e-5) };
    let unit = derivative_sup(&parse_expr("1").unwrap(), &outer)?;
    ok &= (unit - 0.25).abs() <= 1e-5;
    detail.push(format!("g = 1 up to 1-1e-5: {unit:.8}"));
    check(ok, detail.join("; "))
}

fn poisson_solver() -> Outcome {
    let cfg = QuadratureConfig::default();
    let g = parse_expr("1").unwrap();
    let f = solve_poisson(&parse_expr("0").unwrap(), &g, &cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = (f.value(Complex64::new(0.0, 0.0)).unwrap() + 0.25).norm();
    for p in (GridSpec { refine_rounds: 0, ..GridSpec::new(18, 32, 0.9) }).points() {
        let z = p.value();
        worst = worst.max((f.value(z).map_err(|e| e.to_string())? - (z.norm_sqr() - 1.0) / 4.0).norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut residual: f64 = 0.0;
    for _ in 0..100 {
        let p = DiskPoint::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)).unwrap();
        residual = residual.max(laplacian_residual(&f, &g, p).map_err(|e| e.to_string())?);
    }
    check(worst <= 1e-5 && residual <= 1e-4, format!("max error {worst:.3e}; max Laplacian residual {residual:.3e}"))
}

fn coefficient_extraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let deg = rng.gen_range(1..=8);
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let a: Vec<Complex64> = (0..=deg).map(|_| c()).collect();
        let mut anti: Vec<Complex64> = (0..=deg).map(|_| c()).collect();
        anti[0] = Complex64::new(0.0, 0.0);
        let f = PlanarMap::from(AnalyticPair::new(a.clone(), anti.clone()).unwrap());
        let t = extract_coeffs(&f, 8, &DEFAULT_RADII).map_err(|e| e.to_string())?;
        for n in 0..=deg {
            worst = worst.max((t.a[n] - a[n]).norm()).max((t.b[n] - anti[n]).norm());
        }
    }
    let m = catalog("moebius", &[("a", 0.5)]);
    let t = extract_coeffs(&m, 32, &DEFAULT_RADII).map_err(|e| e.to_string())?;
    let moebius = (1..=6).map(|n| (t.a[n].re - 3.0 / 2f64.powi(n as i32 + 1)).abs()).fold(0.0, f64::max);
    check(worst <= 1e-10 && moebius <= 1e-9, format!("random maps: {worst:.2e}; Moebius: {moebius:.2e}"))
}

fn sharpness_rows() -> Outcome {
    let unit = EllipticityParams::new(1.0, 0.0).unwrap();
    let row = |reports: Vec<qcmap::BoundReport>, id: InequalityId, index: BoundIndex| {
        reports.into_iter().find(|r| r.inequality_id == id && r.index == index).unwrap()
    };
    let equal = |r: &qcmap::BoundReport, tol: f64| r.status == BoundStatus::Holds && r.margin.unwrap().abs() <= tol;

    let id = catalog("identity", &[]);
    let ctx = BoundContext::new(unit).with_r(1.0, "given").with_coeffs(extract_coeffs(&id, 8, &DEFAULT_RADII).unwrap());
    let a =
        row(coefficient_bounds_report(&ctx, 1), InequalityId::BoundaryLengthCoefficient, BoundIndex::Coefficient(1));

    let c = 1.7;
    let scaled = catalog("scale", &[("c", c)]);
    let radial = length_sup(&scaled, LengthKind::Radial, &GridSpec::new(1, 64, 0.5)).map_err(|e| e.to_string())?;
    let ctx = BoundContext::new(unit)
        .with_radial_sup(radial.value)
        .with_coeffs(extract_coeffs(&scaled, 8, &DEFAULT_RADII).unwrap());
    let b =
        row(coefficient_bounds_report(&ctx, 1), InequalityId::EllipticRadialCoefficient, BoundIndex::Coefficient(1));

    let m = catalog("moebius", &[("a", 0.5)]);
    let boundary = boundary_length(&m).map_err(|e| e.to_string())?;
    let ctx = BoundContext::new(unit).with_r(boundary.half_length_over_pi, "boundary polyline limit / 2π");
    let za = DiskPoint::new(Complex64::new(0.5, 0.0)).unwrap();
    let k = row(point_bounds_report(&ctx, &m, &[za]), InequalityId::BoundaryLengthDerivative, BoundIndex::Point(za));

    check(
        equal(&a, 1e-9) && equal(&b, 1e-9) && equal(&k, 1e-8) && (boundary.value - 2.0 * PI).abs() <= 1e-3,
        format!(
            "chen-1.0 margin {:.2e}; chen-1.2 margin {:.2e} (radial sup {:.12}); kalaj-1 margin {:.2e} (R = {:.12})",
            a.margin.unwrap(),
            b.margin.unwrap(),
            radial.value,
            k.margin.unwrap(),
            boundary.half_length_over_pi
        ),
    )
}

fn conversions() -> Outcome {
    let fwd = EllipticityParams::new(3.0, 4.0).unwrap().to_cauchy();
    let back = CauchyPair::new(0.5, 0.5).unwrap().to_elliptic();
    let exact = (fwd.k1, fwd.k2) == (0.5, 0.5) && (back.k, back.k_prime) == (6.0, 4.0);
    let grid = GridSpec::default();
    let (mut worst_fwd, mut worst_back, mut points) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for def in sense_preserving_samples() {
        let f = def.build().unwrap();
        for p in grid.points() {
            let jet = f.jet(p).map_err(|e| format!("{}: {e}", def.name))?;
            let m = jet.metrics();
            if m.jacobian <= 0.0 {
                continue;
            }
            points += 1;
            let scale = 1.0 + m.op_norm * m.op_norm;
            for k in [1.0, 2.0, 4.0] {
                let kp = qcmap::ellipticity::pointwise_defect(&jet, k).max(0.0);
                let c = EllipticityParams::new(k, kp).unwrap().to_cauchy();
                worst_fwd = worst_fwd.max(c.excess(&jet) / scale);
            }
            for k1 in [0.0, 0.5, 0.9] {
                let k2 = (jet.dzbar.norm() - k1 * jet.dz.norm()).max(0.0);
                let e = CauchyPair::new(k1, k2).unwrap().to_elliptic();
                worst_back = worst_back.max((m.op_norm * m.op_norm - e.k * m.jacobian - e.k_prime) / (e.k * scale));
            }
        }
    }
    check(
        exact && worst_fwd <= 1e-12 && worst_back <= 1e-12,
        format!("exact conversions: {exact}; {points} jets, worst forward {worst_fwd:.2e}, backward {worst_back:.2e}"),
    )
}

fn example13() -> Outcome {
    let f = catalog("example13", &[("alpha", 0.25)]);
    let qc = qc_constant(&f, &GridSpec::default()).map_err(|e| e.to_string())?;
    let k = qc.value.unwrap_or(f64::NAN);
    let norm = f.jet(DiskPoint::from_polar(1e-6, 0.0).unwrap()).unwrap().metrics().op_norm;
    check(
        (k - 2.0).abs() <= 1e-2 && qc.status == QcStatus::Bounded && norm > 10.0,
        format!("qc constant {k:.6} ({:?}); ‖D_f‖ at |z| = 1e-6 is {norm:.6} (needs > 10)", qc.status),
    )
}

fn gamma_constant() -> Outcome {
    let (one, zero, half) = (beta_constant(1.0).unwrap(), beta_constant(0.0).unwrap(), beta_constant(0.5).unwrap());
    let oracle = 1.694_426_169_587_958;
    check(
        (one - 1.0).abs() <= 1e-12 && (zero - PI).abs() <= 1e-12 && (half - oracle).abs() <= 1e-10,
        format!("beta(1) = {one}, beta(0) = {zero}, beta(1/2) = {half}"),
    )
}

fn radial_length_example15() -> Outcome {
    let f = catalog("example15", &[]);
    let l = radial_length(&f, 1.0, 0.0, DEFAULT_RADIAL_NODES).map_err(|e| e.to_string())?;
    check((l.value - 2.0).abs() <= 1e-6, format!("radial length {:.12}", l.value))
}

fn subharmonic_checker() -> Outcome {
    let grid = GridSpec::default();
    let mut detail = Vec::new();
    let mut ok = true;
    for p in 1..=3 {
        let phi = parse_expr(&format!("{}*abs(z)^{p}", p + 1)).unwrap();
        let report = subharmonic_radial_check(&phi, &grid).map_err(|e| e.to_string())?;
        let profile = radial_integral_profile(&phi, &grid).map_err(|e| e.to_string())?;
        let shape = profile.iter().map(|(r, a)| (a - r.powi(p + 1)).abs()).fold(0.0, f64::max);
        ok &= report.holds_on_sample && shape <= 1e-10;
        detail.push(format!("p = {p}: holds {} (A(r) - r^{} <= {shape:.1e})", report.holds_on_sample, p + 1));
    }
    let report = subharmonic_radial_check(&parse_expr("1").unwrap(), &grid).map_err(|e| e.to_string())?;
    ok &= report.holds_on_sample && report.worst_margin == 0.0;
    detail.push(format!("phi = 1: holds {} with margin {}", report.holds_on_sample, report.worst_margin));
    check(ok, detail.join("; "))
}

fn catalog_regression() -> Outcome {
    let grid = GridSpec { refine_rounds: 0, ..GridSpec::default() };
    let mut total = 0;
    let mut violated = Vec::new();
    for def in harmonic_samples() {
        let (n, bad) = bounds_for(&def, &grid)?;
        total += n;
        violated.extend(bad);
    }
    check(violated.is_empty(), format!("{total} reports, violated: {violated:?}"))
}

fn bounds_for(def: &MapDefinition, grid: &GridSpec) -> Result<(usize, Vec<String>), String> {
    let f = def.build().map_err(|e| e.to_string())?;
    let qc = qc_constant(&f, grid).map_err(|e| e.to_string())?;
    let k = qc.value.ok_or("not sense-preserving")?;
    let ctx = BoundContext::new(EllipticityParams::new(k, 0.0).unwrap()).measure(&f, 64).map_err(|e| e.to_string())?;
    let mut reports = coefficient_bounds_report(&ctx, 8);
    reports.extend(derivative_bounds_report(&ctx, &f, grid).map_err(|e| e.to_string())?);
    // Points where the derivative bounds are attained.
    let mut special = vec![DiskPoint::origin()];
    if def.name == "moebius" {
        special.push(DiskPoint::new(Complex64::new(def.parameters["a"], def.parameters["a_im"])).unwrap());
    }
    reports.extend(point_bounds_report(&ctx, &f, &special));
    let s = summarize(&reports);
    let bad = reports
        .iter()
        .filter(|r| r.status != BoundStatus::Holds)
        .map(|r| format!("{} {} {:?} margin {:?} ({:?})", def.name, r.inequality_id, r.index, r.margin, r.status))
        .collect();
    if let Some(w) = s.worst_margin {
        println!("    {} {:?}: worst margin {w:.3e} at {:?}", def.name, def.parameters, s.worst);
    }
    Ok((reports.len(), bad))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("example15 ellipticity constant", example15_constants),
        ("example15 not quasiconformal", example15_not_quasiconformal),
        ("Green potential derivative bound", green_derivative_bound),
        ("Poisson solver", poisson_solver),
        ("Coefficient extraction", coefficient_extraction),
        ("Sharpness rows", sharpness_rows),
        ("Constant conversions", conversions),
        ("example13 quasiconformal but not Lipschitz", example13),
        ("Gamma constant", gamma_constant),
        ("example15 radial length", radial_length_example15),
        ("Radial integral checker", subharmonic_checker),
        ("Catalog bounds regression", catalog_regression),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
