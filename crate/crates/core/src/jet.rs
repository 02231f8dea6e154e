//! Points of the unit disk, Wirtinger jets and the distortion quantities
//! read off from them.
//!
//! For a C¹ map `f = u + iv` the Wirtinger derivatives are
//! `f_z = (f_x - i f_y) / 2` and `f_zbar = (f_x + i f_y) / 2`. Everything
//! else in this module (operator norm, lower norm, Jacobian, dilatation) is a
//! closed-form function of the pair `(f_z, f_zbar)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.is_finite() && z.norm() < 1.0 {
            Ok(DiskPoint(z))
        } else {
            Err(MapError::outside(z))
        }
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn origin() -> Self {
        DiskPoint(Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    /// Euclidean distance to the unit circle, `1 - |z|`.
    #[inline]
    pub fn boundary_distance(self) -> f64 {
        1.0 - self.0.norm()
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = MapError;

    fn try_from(z: Complex64) -> Result<Self> {
        DiskPoint::new(z)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// `d(z) = 1 - |z|`; rejects points on or outside the unit circle.
pub fn disk_distance(z: Complex64) -> Result<f64> {
    Ok(DiskPoint::new(z)?.boundary_distance())
}

/// Value and first Wirtinger derivatives of a map at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerJet {
    pub value: Complex64,
    /// `∂f/∂z`
    pub dz: Complex64,
    /// `∂f/∂z̄`
    pub dzbar: Complex64,
}

impl WirtingerJet {
    pub const fn new(value: Complex64, dz: Complex64, dzbar: Complex64) -> Self {
        WirtingerJet { value, dz, dzbar }
    }

    pub fn constant(value: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        WirtingerJet::new(value, zero, zero)
    }

    /// The jet of the coordinate function `z` itself.
    pub fn variable(z: Complex64) -> Self {
        WirtingerJet::new(z, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.dz.is_finite() && self.dzbar.is_finite()
    }

    /// Jet of `conj(f)`: the derivatives swap and conjugate.
    pub fn conj(&self) -> Self {
        WirtingerJet::new(self.value.conj(), self.dzbar.conj(), self.dz.conj())
    }

    /// Jet of `c * f` for a constant `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        WirtingerJet::new(self.value * c, self.dz * c, self.dzbar * c)
    }

    /// Chain rule for an analytic outer function with value `outer` and
    /// derivative `outer_prime` at `self.value`.
    pub fn compose_analytic(&self, outer: Complex64, outer_prime: Complex64) -> Self {
        WirtingerJet::new(outer, outer_prime * self.dz, outer_prime * self.dzbar)
    }

    /// Directional derivative `d/dt f(z + t e^{iφ})` at `t = 0`.
    pub fn directional(&self, phi: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, phi);
        self.dz * e + self.dzbar * e.conj()
    }

    pub fn metrics(&self) -> DerivedMetrics {
        jet_metrics(self)
    }
}

impl Add for WirtingerJet {
    type Output = WirtingerJet;

    fn add(self, rhs: Self) -> Self {
        WirtingerJet::new(self.value + rhs.value, self.dz + rhs.dz, self.dzbar + rhs.dzbar)
    }
}

impl Sub for WirtingerJet {
    type Output = WirtingerJet;

    fn sub(self, rhs: Self) -> Self {
        WirtingerJet::new(self.value - rhs.value, self.dz - rhs.dz, self.dzbar - rhs.dzbar)
    }
}

impl Neg for WirtingerJet {
    type Output = WirtingerJet;

    fn neg(self) -> Self {
        WirtingerJet::new(-self.value, -self.dz, -self.dzbar)
    }
}

impl Mul for WirtingerJet {
    type Output = WirtingerJet;

    fn mul(self, rhs: Self) -> Self {
        WirtingerJet::new(
            self.value * rhs.value,
            self.dz * rhs.value + self.value * rhs.dz,
            self.dzbar * rhs.value + self.value * rhs.dzbar,
        )
    }
}

/// Distortion quantities of the differential at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedMetrics {
    /// `‖D_f‖ = |f_z| + |f_z̄|`
    pub op_norm: f64,
    /// `l(D_f) = ||f_z| - |f_z̄||`
    pub lower_norm: f64,
    /// `J_f = |f_z|² - |f_z̄|²`
    pub jacobian: f64,
    /// `|f_z̄| / |f_z|`, `None` where `f_z = 0`.
    pub dilatation: Option<f64>,
}

impl DerivedMetrics {
    /// Sense-preserving at this point, i.e. `J_f > 0`.
    pub fn is_sense_preserving(&self) -> bool {
        self.jacobian > 0.0
    }

    /// `‖D_f‖ / l(D_f)`, infinite where the differential is degenerate.
    pub fn distortion_ratio(&self) -> f64 {
        if self.lower_norm > 0.0 {
            self.op_norm / self.lower_norm
        } else {
            f64::INFINITY
        }
    }
}

pub fn jet_metrics(jet: &WirtingerJet) -> DerivedMetrics {
    let a = jet.dz.norm();
    let b = jet.dzbar.norm();
    DerivedMetrics {
        op_norm: a + b,
        lower_norm: (a - b).abs(),
        jacobian: (a - b) * (a + b),
        dilatation: if a > 0.0 { Some(b / a) } else { None },
    }
}

/// Default finite-difference step: `1e-5 * max(1, |z|)`.
pub fn default_fd_step(z: Complex64) -> f64 {
    1e-5 * z.norm().max(1.0)
}

/// Central-difference estimate of the Wirtinger jet of `f` at `z`.
///
/// The stencil `z ± h`, `z ± ih` must lie inside the disk. Second order in `h`.
pub fn finite_difference_jet<F, E>(f: F, z: Complex64, h: f64) -> Result<WirtingerJet>
where
    F: Fn(Complex64) -> std::result::Result<Complex64, E>,
    MapError: From<E>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(MapError::InvalidParameter(format!("finite-difference step {h}")));
    }
    DiskPoint::new(z)?;
    if z.norm() + h >= 1.0 {
        return Err(MapError::StencilOutsideDisk { re: z.re, im: z.im, step: h });
    }
    let hx = Complex64::new(h, 0.0);
    let hy = Complex64::new(0.0, h);
    let fx = (f(z + hx)? - f(z - hx)?) / (2.0 * h);
    let fy = (f(z + hy)? - f(z - hy)?) / (2.0 * h);
    let i = Complex64::i();
    Ok(WirtingerJet::new(f(z)?, (fx - i * fy) * 0.5, (fx + i * fy) * 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metrics_of_simple_jets() {
        let m = jet_metrics(&WirtingerJet::new(c(0.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)));
        assert_eq!(m.op_norm, 2.5);
        assert_eq!(m.lower_norm, 1.5);
        assert_eq!(m.jacobian, 3.75);
        assert_eq!(m.dilatation, Some(0.25));

        let id = jet_metrics(&WirtingerJet::variable(c(0.3, 0.1)));
        assert_eq!((id.op_norm, id.lower_norm, id.jacobian), (1.0, 1.0, 1.0));
        assert_eq!(id.dilatation, Some(0.0));
    }

    #[test]
    fn dilatation_flagged_when_dz_vanishes() {
        let m = jet_metrics(&WirtingerJet::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        assert_eq!(m.dilatation, None);
        assert_eq!(m.jacobian, -1.0);
        assert_eq!(m.distortion_ratio(), 1.0);
        let flat = jet_metrics(&WirtingerJet::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)));
        assert!(flat.distortion_ratio().is_infinite());
    }

    #[test]
    fn example_jet_at_critical_radius() {
        // |z| = 2^{-1/3}: |f_z| = 2^{-2/3}(6 - 5/4), |f_zbar| = 2^{-2/3} * 2.
        let s = 2f64.powf(-2.0 / 3.0);
        let jet = WirtingerJet::new(c(0.0, 0.0), c(s * 4.75, 0.0), c(s * 2.0, 0.0));
        let m = jet_metrics(&jet);
        let expected = 729.0 / 2f64.powf(16.0 / 3.0);
        assert!((m.op_norm * m.op_norm - expected).abs() < 1e-12);
        assert!((m.op_norm * m.op_norm - 18.08149).abs() < 1e-5);
    }

    #[test]
    fn boundary_distance() {
        assert_eq!(disk_distance(c(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(disk_distance(c(0.0, 0.5)).unwrap(), 0.5);
        assert!((disk_distance(c(0.3, 0.4)).unwrap() - 0.5).abs() < 1e-15);
        assert!(disk_distance(c(1.0, 0.0)).is_err());
        assert!(disk_distance(c(0.8, 0.8)).is_err());
        assert!(disk_distance(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn fd_jet_of_modulus_squared() {
        let f = |z: Complex64| Ok::<_, MapError>(z * z.conj());
        let jet = finite_difference_jet(f, c(0.5, 0.0), 1e-5).unwrap();
        assert!((jet.dz - c(0.5, 0.0)).norm() < 1e-9);
        assert!((jet.dzbar - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fd_jet_of_conjugate() {
        let f = |z: Complex64| Ok::<_, MapError>(z.conj());
        let z = c(-0.2, 0.35);
        let jet = finite_difference_jet(f, z, default_fd_step(z)).unwrap();
        assert!(jet.dz.norm() < 1e-9);
        assert!((jet.dzbar - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fd_jet_matches_closed_form_of_cubic_example() {
        let f = |z: Complex64| {
            let r2 = z.norm_sqr();
            Ok::<_, MapError>(3.0 * z * r2 - z * r2.powi(4))
        };
        let z = c(0.6, 0.0);
        let jet = finite_difference_jet(f, z, 1e-5).unwrap();
        let r2 = 0.36;
        let r6 = 0.6f64.powi(6);
        assert!((jet.dz - c(r2 * (6.0 - 5.0 * r6), 0.0)).norm() < 1e-8);
        assert!((jet.dzbar - z * z * (3.0 - 4.0 * r6)).norm() < 1e-8);
    }

    #[test]
    fn fd_rejects_stencil_leaving_disk() {
        let f = |z: Complex64| Ok::<_, MapError>(z);
        assert!(matches!(finite_difference_jet(f, c(0.99, 0.0), 0.02), Err(MapError::StencilOutsideDisk { .. })));
        assert!(finite_difference_jet(f, c(0.2, 0.0), -1.0).is_err());
    }

    #[test]
    fn sense_preservation_matches_dilatation_below_one() {
        for (a, b) in [(1.0, 0.2), (0.3, 0.9), (2.0, 2.0), (0.5, 0.0)] {
            let m = jet_metrics(&WirtingerJet::new(c(0.0, 0.0), c(a, 0.0), c(0.0, b)));
            assert_eq!(m.dilatation.unwrap() < 1.0, m.jacobian > 0.0);
        }
    }
}
