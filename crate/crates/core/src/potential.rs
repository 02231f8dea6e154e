//! Green potential `G[g]`, Poisson integral `P[ψ]` and the solution
//! `f = P[ψ] - G[g]` of `Δf = g` with boundary values `ψ`.
//!
//! # Green potential
//!
//! With `z = r e^{iθ}` and `w = ρ e^{iφ}` the Green function has the exact
//! angular expansion
//!
//! ```text
//! G(z, w) = Σ_m c_m(r, ρ) e^{im(θ-φ)},
//! c_0 = -log max(r, ρ),
//! c_m = ((r_</r_>)^|m| - (rρ)^|m|) / (2|m|).
//! ```
//!
//! so `G[g](z) = Σ_m e^{imθ} ∫₀¹ c_m(r, ρ) g_m(ρ) ρ dρ` where `g_m(ρ)` are the
//! angular Fourier coefficients of `g` on the circle of radius `ρ` (computed
//! with an FFT over `angular_nodes` samples). The radial kernels are smooth on
//! either side of `ρ = r`, so the radial integral is split there: the bands
//! `[r - δ, r]` and `[r, r + δ]` (`δ = singular_patch_radius`) get their own
//! Gauss-Legendre rules with `patch_nodes` points and are recomputed with half
//! the nodes as a convergence check. The remaining pieces use `radial_nodes`.
//! First derivatives differentiate the radial kernels in closed form.
//!
//! # Poisson integral
//!
//! `P[ψ](z) = Σ_{m≥0} ψ_m z^m + Σ_{m<0} ψ_m z̄^{|m|}` with `ψ_m` from the
//! trapezoid rule (an FFT) over `boundary_nodes` points of the circle. This
//! sums the kernel's Fourier series exactly instead of applying the
//! trapezoid rule to the peaked kernel, so accuracy does not degrade near the
//! boundary.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::expr::Expr;
use crate::jet::{DiskPoint, WirtingerJet};
use crate::map::PlanarMap;
use crate::quad::GaussRule;

/// Maximum disagreement between the band quadrature and its half-node rerun.
pub const PATCH_TOLERANCE: f64 = 1e-4;

/// Step of the five-point Laplacian used by [`laplacian_residual`].
pub const LAPLACIAN_STEP: f64 = 1e-3;

const PROFILE_CACHE_LIMIT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub singular_patch_radius: f64,
    pub patch_nodes: usize,
    pub boundary_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: 128,
            angular_nodes: 256,
            singular_patch_radius: 0.05,
            patch_nodes: 64,
            boundary_nodes: 512,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("radial_nodes", self.radial_nodes),
            ("angular_nodes", self.angular_nodes),
            ("patch_nodes", self.patch_nodes),
            ("boundary_nodes", self.boundary_nodes),
        ];
        for (name, n) in counts {
            if n < 8 {
                return Err(MapError::InvalidParameter(format!("{name} = {n} must be at least 8")));
            }
        }
        let d = self.singular_patch_radius;
        if !(d > 0.0 && d < 0.5) {
            return Err(MapError::InvalidParameter(format!("singular_patch_radius = {d} must lie in (0, 0.5)")));
        }
        Ok(())
    }
}

/// Whether to return only the value or the full jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Value,
    Jet,
}

/// Modes `-M..=M` stored at index `m + M`.
#[derive(Debug)]
struct Profile {
    value: Vec<Complex64>,
    dz: Vec<Complex64>,
    dzbar: Vec<Complex64>,
}

impl Profile {
    fn zeros(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        Profile { value: z.clone(), dz: z.clone(), dzbar: z }
    }
}

/// `G[g]` for a fixed source `g`; radial profiles are cached per radius.
pub struct GreenPotential {
    g: Expr,
    cfg: QuadratureConfig,
    vanishes: bool,
    cache: Mutex<HashMap<u64, Arc<Profile>>>,
}

impl std::fmt::Debug for GreenPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenPotential").field("g", &self.g.to_string()).field("cfg", &self.cfg).finish()
    }
}

/// Radial quadrature node with its side of the kink at `ρ = r`.
#[derive(Clone, Copy)]
struct Node {
    rho: f64,
    weight: f64,
    inner: bool,
}

impl GreenPotential {
    pub fn new(g: Expr, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let vanishes = g.is_constant() && g.eval(Complex64::new(0.0, 0.0))? == Complex64::new(0.0, 0.0);
        Ok(GreenPotential { g, cfg, vanishes, cache: Mutex::new(HashMap::new()) })
    }

    pub fn source(&self) -> &Expr {
        &self.g
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn max_mode(&self) -> usize {
        self.cfg.angular_nodes / 2 - 1
    }

    pub fn value(&self, z: DiskPoint) -> Result<Complex64> {
        Ok(self.eval(z, Order::Value)?.value)
    }

    pub fn jet(&self, z: DiskPoint) -> Result<WirtingerJet> {
        self.eval(z, Order::Jet)
    }

    pub fn eval(&self, z: DiskPoint, order: Order) -> Result<WirtingerJet> {
        if self.vanishes {
            return Ok(WirtingerJet::constant(Complex64::new(0.0, 0.0)));
        }
        let r = z.modulus();
        let theta = z.value().arg();
        let profile = self.profile(r)?;
        let m_max = self.max_mode() as i64;
        let mut out = WirtingerJet::constant(Complex64::new(0.0, 0.0));
        for (k, m) in (-m_max..=m_max).enumerate() {
            let e = Complex64::from_polar(1.0, m as f64 * theta);
            out.value += profile.value[k] * e;
            if order == Order::Jet {
                let turn = Complex64::from_polar(1.0, theta);
                out.dz += profile.dz[k] * e / turn;
                out.dzbar += profile.dzbar[k] * e * turn;
            }
        }
        Ok(out)
    }

    fn profile(&self, r: f64) -> Result<Arc<Profile>> {
        let key = r.to_bits();
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let profile = Arc::new(self.compute_profile(r)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= PROFILE_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, profile.clone());
        Ok(profile)
    }

    fn pieces(&self, r: f64, band_nodes: usize) -> (Vec<Node>, Vec<Node>) {
        let delta = self.cfg.singular_patch_radius;
        let lo = (r - delta).max(0.0);
        let hi = (r + delta).min(1.0);
        let main = GaussRule::new(self.cfg.radial_nodes);
        let band = GaussRule::new(band_nodes);
        let push = |out: &mut Vec<Node>, rule: &GaussRule, a: f64, b: f64, inner: bool| {
            if b <= a {
                return;
            }
            let nodes: Vec<(f64, f64)> =
                if a == 0.0 { rule.graded(b).collect() } else { rule.on_interval(a, b).collect() };
            out.extend(nodes.into_iter().map(|(rho, weight)| Node { rho, weight, inner }));
        };
        let mut main_nodes = Vec::new();
        push(&mut main_nodes, &main, 0.0, lo, true);
        push(&mut main_nodes, &main, hi, 1.0, false);
        let mut band_nodes = Vec::new();
        push(&mut band_nodes, &band, lo, r, true);
        push(&mut band_nodes, &band, r, hi, false);
        (main_nodes, band_nodes)
    }

    /// Angular Fourier coefficients `g_m(ρ)` at each node, in FFT order.
    fn angular_modes(&self, nodes: &[Node]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.cfg.angular_nodes;
        let fft = FftPlanner::new().plan_fft_forward(n);
        nodes
            .par_iter()
            .map(|node| {
                let mut buf = (0..n)
                    .map(|k| self.g.eval(Complex64::from_polar(node.rho, 2.0 * PI * k as f64 / n as f64)))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                fft.process(&mut buf);
                let scale = 1.0 / n as f64;
                buf.iter_mut().for_each(|c| *c *= scale);
                Ok(buf)
            })
            .collect()
    }

    fn accumulate(&self, r: f64, nodes: &[Node], modes: &[Vec<Complex64>], out: &mut Profile) {
        let m_max = self.max_mode();
        let n_fft = self.cfg.angular_nodes;
        let mut c = vec![0.0; m_max + 1];
        let mut kp = vec![0.0; m_max + 1];
        let mut km = vec![0.0; m_max + 1];
        for (node, gm) in nodes.iter().zip(modes) {
            radial_kernels(r, node.rho, node.inner, &mut c, &mut kp, &mut km);
            let w = node.weight * node.rho;
            for (k, m) in (-(m_max as i64)..=m_max as i64).enumerate() {
                let n = m.unsigned_abs() as usize;
                let g = gm[m.rem_euclid(n_fft as i64) as usize] * w;
                out.value[k] += g * c[n];
                let (a, b) = if m >= 0 { (kp[n], km[n]) } else { (km[n], kp[n]) };
                out.dz[k] += g * (0.5 * a);
                out.dzbar[k] += g * (0.5 * b);
            }
        }
    }

    fn compute_profile(&self, r: f64) -> Result<Profile> {
        let len = 2 * self.max_mode() + 1;
        let (main, band) = self.pieces(r, self.cfg.patch_nodes);
        let (_, coarse) = self.pieces(r, (self.cfg.patch_nodes / 2).max(4));

        let mut all = main.clone();
        all.extend_from_slice(&band);
        all.extend_from_slice(&coarse);
        let modes = self.angular_modes(&all)?;
        let (main_modes, rest) = modes.split_at(main.len());
        let (band_modes, coarse_modes) = rest.split_at(band.len());

        let mut fine = Profile::zeros(len);
        self.accumulate(r, &band, band_modes, &mut fine);
        let mut check = Profile::zeros(len);
        self.accumulate(r, &coarse, coarse_modes, &mut check);
        let disagreement = [(&fine.value, &check.value), (&fine.dz, &check.dz), (&fine.dzbar, &check.dzbar)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        if !(disagreement <= PATCH_TOLERANCE) {
            return Err(MapError::QuadratureNonConvergence { disagreement, tolerance: PATCH_TOLERANCE });
        }
        self.accumulate(r, &main, main_modes, &mut fine);
        Ok(fine)
    }
}

/// Radial kernels for `n = 0..=M` at one node.
///
/// `c` is the value kernel, `kp` and `km` are `∂_r c ± (n/r) c`; the latter pair
/// feeds the `∂z` and `∂z̄` coefficients.
fn radial_kernels(r: f64, rho: f64, inner: bool, c: &mut [f64], kp: &mut [f64], km: &mut [f64]) {
    let rr = r * rho;
    if inner {
        // ρ < r (so r > 0)
        let q = rho / r;
        c[0] = -r.ln();
        kp[0] = -1.0 / r;
        km[0] = -1.0 / r;
        let (mut qn, mut rrn, mut rn1) = (1.0, 1.0, 1.0 / r);
        for n in 1..c.len() {
            qn *= q;
            rrn *= rr;
            rn1 *= r;
            let nf = n as f64;
            c[n] = (qn - rrn) / (2.0 * nf);
            kp[n] = -rn1 * rho.powi(n as i32);
            km[n] = -qn / r;
        }
    } else {
        // ρ > r
        let q = r / rho;
        c[0] = -rho.ln();
        kp[0] = 0.0;
        km[0] = 0.0;
        // qn1 = (r/ρ)^{n-1} and rn1 = r^{n-1}, finite at r = 0
        let (mut qn, mut rrn, mut qn1, mut rn1) = (1.0, 1.0, 1.0, 1.0);
        for n in 1..c.len() {
            qn *= q;
            rrn *= rr;
            let nf = n as f64;
            c[n] = (qn - rrn) / (2.0 * nf);
            kp[n] = qn1 / rho - rn1 * rho.powi(n as i32);
            km[n] = 0.0;
            qn1 *= q;
            rn1 *= r;
        }
    }
}

/// `G[g](z)` (and its first derivatives for [`Order::Jet`]).
pub fn green_potential(g: &Expr, z: DiskPoint, order: Order, cfg: &QuadratureConfig) -> Result<WirtingerJet> {
    GreenPotential::new(g.clone(), *cfg)?.eval(z, order)
}

/// Harmonic extension `P[ψ]` of boundary data `ψ(e^{iθ})`.
#[derive(Debug, Clone)]
pub struct PoissonIntegral {
    /// `ψ_m` for `m = -M..=M` at index `m + M`.
    modes: Vec<Complex64>,
    max_mode: usize,
}

impl PoissonIntegral {
    pub fn new(psi: &Expr, boundary_nodes: usize) -> Result<Self> {
        if boundary_nodes < 8 {
            return Err(MapError::InvalidParameter(format!("boundary_nodes = {boundary_nodes} must be at least 8")));
        }
        let n = boundary_nodes;
        let mut buf = (0..n)
            .map(|k| psi.eval(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let max_mode = n / 2 - 1;
        let modes =
            (-(max_mode as i64)..=max_mode as i64).map(|m| buf[m.rem_euclid(n as i64) as usize] / n as f64).collect();
        Ok(PoissonIntegral { modes, max_mode })
    }

    /// `ψ_m`, zero outside the resolved range.
    pub fn mode(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.max_mode {
            return Complex64::new(0.0, 0.0);
        }
        self.modes[(m + self.max_mode as i64) as usize]
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Coefficients of the analytic part `Σ_{m≥0} ψ_m z^m`.
    pub fn analytic_coefficients(&self) -> Vec<Complex64> {
        (0..=self.max_mode as i64).map(|m| self.mode(m)).collect()
    }

    /// Coefficients of `z̄^m`, `m ≥ 0` (entry 0 is zero).
    pub fn anti_coefficients(&self) -> Vec<Complex64> {
        (0..=self.max_mode as i64).map(|m| if m == 0 { Complex64::new(0.0, 0.0) } else { self.mode(-m) }).collect()
    }

    pub fn eval(&self, z: Complex64, order: Order) -> WirtingerJet {
        let a = self.analytic_coefficients();
        let b = self.anti_coefficients();
        let (hv, hd) = horner(&a, z);
        let (gv, gd) = horner(&b, z.conj());
        match order {
            Order::Value => WirtingerJet::constant(hv + gv),
            Order::Jet => WirtingerJet::new(hv + gv, hd, gd),
        }
    }
}

/// Value and derivative of `Σ c_n x^n`.
pub(crate) fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for coef in c.iter().rev() {
        d = d * x + v;
        v = v * x + coef;
    }
    (v, d)
}

/// `P[ψ](z)` (and its first derivatives for [`Order::Jet`]).
pub fn poisson_integral(psi: &Expr, z: DiskPoint, order: Order, cfg: &QuadratureConfig) -> Result<WirtingerJet> {
    cfg.validate()?;
    Ok(PoissonIntegral::new(psi, cfg.boundary_nodes)?.eval(z.value(), order))
}

/// The map `f = P[ψ] - G[g]`.
#[derive(Debug)]
pub struct PoissonSolutionMap {
    pub psi: Expr,
    pub g: Expr,
    pub cfg: QuadratureConfig,
    poisson: PoissonIntegral,
    green: GreenPotential,
}

impl PoissonSolutionMap {
    pub fn new(psi: Expr, g: Expr, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let poisson = PoissonIntegral::new(&psi, cfg.boundary_nodes)?;
        let green = GreenPotential::new(g.clone(), cfg)?;
        Ok(PoissonSolutionMap { psi, g, cfg, poisson, green })
    }

    pub fn poisson(&self) -> &PoissonIntegral {
        &self.poisson
    }

    pub fn green(&self) -> &GreenPotential {
        &self.green
    }

    pub fn eval(&self, z: DiskPoint, order: Order) -> Result<WirtingerJet> {
        Ok(self.poisson.eval(z.value(), order) - self.green.eval(z, order)?)
    }

    /// Boundary values: `G[g]` vanishes on the circle, so `f = ψ` there.
    pub fn boundary_value(&self, theta: f64) -> Result<Complex64> {
        Ok(self.psi.eval(Complex64::from_polar(1.0, theta))?)
    }
}

/// Solves `Δf = g` in the disk with `f = ψ` on the circle.
pub fn solve_poisson(psi: &Expr, g: &Expr, cfg: &QuadratureConfig) -> Result<PlanarMap> {
    Ok(PlanarMap::Poisson(Box::new(PoissonSolutionMap::new(psi.clone(), g.clone(), *cfg)?)))
}

fn five_point(map: &PlanarMap, z: DiskPoint, h: f64) -> Result<Complex64> {
    let zv = z.value();
    if z.modulus() + 2.0 * h > 1.0 {
        return Err(MapError::StencilOutsideDisk { re: zv.re, im: zv.im, step: h });
    }
    let f = |w: Complex64| map.value(w);
    let hx = Complex64::new(h, 0.0);
    let hy = Complex64::new(0.0, h);
    Ok((f(zv + hx)? + f(zv - hx)? + f(zv + hy)? + f(zv - hy)? - 4.0 * f(zv)?) / (h * h))
}

/// `|Δf(z) - g(z)|` with the five-point Laplacian of step [`LAPLACIAN_STEP`].
pub fn laplacian_residual(map: &PlanarMap, g: &Expr, z: DiskPoint) -> Result<f64> {
    Ok((five_point(map, z, LAPLACIAN_STEP)? - g.eval(z.value())?).norm())
}

/// As [`laplacian_residual`], with the steps `h` and `h/2` combined to cancel
/// the `O(h²)` error term.
pub fn laplacian_residual_extrapolated(map: &PlanarMap, g: &Expr, z: DiskPoint) -> Result<f64> {
    let coarse = five_point(map, z, LAPLACIAN_STEP)?;
    let fine = five_point(map, z, LAPLACIAN_STEP / 2.0)?;
    Ok(((4.0 * fine - coarse) / 3.0 - g.eval(z.value())?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::kernels::poisson_eval;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig { radial_nodes: 4, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { singular_patch_radius: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn green_potential_of_constant_source() {
        let cfg = QuadratureConfig::default();
        let g = GreenPotential::new(e("1"), cfg).unwrap();
        assert!((g.value(p(0.0, 0.0)).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-6);
        let jet = g.jet(p(0.4, 0.0)).unwrap();
        assert!((jet.dz - Complex64::new(-0.1, 0.0)).norm() < 1e-6);
        for z in [p(0.3, -0.5), p(0.0, 0.97), p(-0.02, 0.01), p(0.999, 0.0)] {
            let jet = g.jet(z).unwrap();
            let zv = z.value();
            assert!((jet.value.re - (1.0 - zv.norm_sqr()) / 4.0).abs() < 1e-12, "{zv}");
            assert!((jet.dz + zv.conj() / 4.0).norm() < 1e-12, "{zv}");
            assert!((jet.dzbar + zv / 4.0).norm() < 1e-12, "{zv}");
        }
    }

    #[test]
    fn zero_source_gives_exact_zero() {
        let jet = green_potential(&e("0"), p(0.3, 0.2), Order::Jet, &QuadratureConfig::default()).unwrap();
        assert_eq!(jet, WirtingerJet::constant(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn green_potential_of_polynomial_source() {
        // u = (|z|^4 - 1)/16 solves Δu = |z|^2 with zero boundary values, so G[g] = -u.
        let g = GreenPotential::new(e("abs(z)^2"), QuadratureConfig::default()).unwrap();
        for z in [p(0.0, 0.0), p(0.5, 0.1), p(-0.3, -0.8)] {
            let zv = z.value();
            let r2 = zv.norm_sqr();
            let jet = g.jet(z).unwrap();
            assert!((jet.value.re - (1.0 - r2 * r2) / 16.0).abs() < 1e-12);
            // ∂z of -(|z|^4 - 1)/16 is -z̄|z|^2/8
            assert!((jet.dz + zv.conj() * r2 / 8.0).norm() < 1e-12);
        }
        // g = z: u = z(|z|^2 - 1)/8 solves Δu = z, G[z] = -u
        let g = GreenPotential::new(e("z"), QuadratureConfig::default()).unwrap();
        let z = p(0.35, -0.2);
        let zv = z.value();
        let jet = g.jet(z).unwrap();
        assert!((jet.value + zv * (zv.norm_sqr() - 1.0) / 8.0).norm() < 1e-12);
        assert!((jet.dz + (2.0 * zv * zv.conj() - 1.0) / 8.0).norm() < 1e-12);
        assert!((jet.dzbar + zv * zv / 8.0).norm() < 1e-12);
    }

    #[test]
    fn green_potential_is_cached_and_deterministic() {
        let g = GreenPotential::new(e("re(z) + abs(z)"), QuadratureConfig::default()).unwrap();
        let a = g.jet(p(0.3, 0.3)).unwrap();
        let b = g.jet(p(0.3, 0.3)).unwrap();
        assert_eq!(a, b);
        let fresh = GreenPotential::new(e("re(z) + abs(z)"), QuadratureConfig::default()).unwrap();
        assert_eq!(fresh.jet(p(0.3, 0.3)).unwrap(), a);
    }

    #[test]
    fn poisson_integral_reproduces_harmonic_data() {
        let cfg = QuadratureConfig::default();
        let z = p(0.6, -0.3);
        let one = poisson_integral(&e("1"), z, Order::Value, &cfg).unwrap();
        assert!((one.value - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let id = poisson_integral(&e("z"), z, Order::Jet, &cfg).unwrap();
        assert!((id.value - z.value()).norm() < 1e-14);
        assert!((id.dz - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let cj = poisson_integral(&e("conj(z)"), z, Order::Jet, &cfg).unwrap();
        assert!((cj.value - z.value().conj()).norm() < 1e-14);
        assert!((cj.dzbar - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poisson_integral_matches_kernel_trapezoid() {
        let psi = e("exp(re(z)) * z");
        let pi_map = PoissonIntegral::new(&psi, 512).unwrap();
        let z = p(0.2, 0.4);
        let n = 2048;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            sum += psi.eval(Complex64::from_polar(1.0, t)).unwrap() * poisson_eval(z, t, false).value;
        }
        sum /= n as f64;
        assert!((pi_map.eval(z.value(), Order::Value).value - sum).norm() < 1e-12);
    }

    #[test]
    fn poisson_solution_of_unit_source() {
        let map = solve_poisson(&e("0"), &e("1"), &QuadratureConfig::default()).unwrap();
        for z in [p(0.0, 0.0), p(0.9, 0.0), p(0.2, -0.6)] {
            let want = (z.value().norm_sqr() - 1.0) / 4.0;
            assert!((map.value(z.value()).unwrap() - Complex64::new(want, 0.0)).norm() < 1e-10);
        }
        assert!(laplacian_residual(&map, &e("1"), p(0.2, 0.0)).unwrap() <= 1e-4);
        let id = solve_poisson(&e("z"), &e("0"), &QuadratureConfig::default()).unwrap();
        assert!((id.value(Complex64::new(0.3, 0.2)).unwrap() - Complex64::new(0.3, 0.2)).norm() < 1e-10);
    }

    #[test]
    fn laplacian_residual_of_cubic_example() {
        let f = PlanarMap::from_expr(e("3*z*abs(z)^2 - z*abs(z)^8"));
        let g = e("4*(6*z - 20*z^4*conj(z)^3)");
        assert!(laplacian_residual(&f, &g, p(0.3, 0.0)).unwrap() <= 1e-4);
        assert!(laplacian_residual(&f, &g, p(0.999, 0.0)).is_err());
    }
}
