//! Green function and Poisson kernel of the unit disk, with first Wirtinger
//! derivatives in the first argument.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::jet::DiskPoint;

/// Arguments closer than this are treated as coincident.
pub const COINCIDENCE_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub dz: Complex64,
    pub dzbar: Complex64,
}

/// `G(z, w) = log|1 - z w̄| - log|z - w|`.
///
/// With `with_derivatives`, `dz = (-w̄/(1 - z w̄) - 1/(z - w)) / 2` and
/// `dzbar = conj(dz)` since `G` is real. Otherwise both are zero.
pub fn green_eval(z: DiskPoint, w: DiskPoint, with_derivatives: bool) -> Result<KernelEval> {
    let (z, w) = (z.value(), w.value());
    let diff = z - w;
    if diff.norm() < COINCIDENCE_RADIUS {
        return Err(MapError::CoincidentPoints);
    }
    let one_minus = Complex64::new(1.0, 0.0) - z * w.conj();
    let value = one_minus.norm().ln() - diff.norm().ln();
    let (dz, dzbar) = if with_derivatives {
        let dz = 0.5 * (-w.conj() / one_minus - diff.inv());
        (dz, dz.conj())
    } else {
        Default::default()
    };
    Ok(KernelEval { value, dz, dzbar })
}

/// `P(z, e^{iθ}) = (1 - |z|²) / |1 - z e^{-iθ}|²`.
pub fn poisson_eval(z: DiskPoint, theta: f64, with_derivatives: bool) -> KernelEval {
    let z = z.value();
    let e = Complex64::from_polar(1.0, -theta);
    let a = Complex64::new(1.0, 0.0) - z * e;
    let aa = a.norm_sqr();
    let num = 1.0 - z.norm_sqr();
    let value = num / aa;
    let (dz, dzbar) = if with_derivatives {
        let dz = -z.conj() / aa + num * e / (a * aa);
        (dz, dz.conj())
    } else {
        Default::default()
    };
    KernelEval { value, dz, dzbar }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::finite_difference_jet;
    use crate::quad::periodic_trapezoid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, max: f64) -> DiskPoint {
        let r = max * rng.gen::<f64>().sqrt();
        DiskPoint::from_polar(r, rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    #[test]
    fn green_at_origin() {
        let k = green_eval(p(0.0, 0.0), p(0.5, 0.0), true).unwrap();
        assert!((k.value - 2f64.ln()).abs() < 1e-15);
        assert!((k.dz - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        assert_eq!(k.dzbar, k.dz.conj());
    }

    #[test]
    fn green_is_symmetric_and_positive() {
        let a = green_eval(p(0.3, 0.0), p(0.0, 0.5), false).unwrap();
        let b = green_eval(p(0.0, 0.5), p(0.3, 0.0), false).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (z, w) = (random_point(&mut rng, 0.999), random_point(&mut rng, 0.999));
            let g1 = green_eval(z, w, false).unwrap().value;
            let g2 = green_eval(w, z, false).unwrap().value;
            assert!(g1 > 0.0);
            assert!((g1 - g2).abs() <= 1e-12 * g1.max(1.0));
        }
    }

    #[test]
    fn green_vanishes_at_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let w = random_point(&mut rng, 0.5);
            let z = DiskPoint::from_polar(1.0 - 1e-4, rng.gen_range(0.0..2.0 * PI)).unwrap();
            assert!(green_eval(z, w, false).unwrap().value <= 1e-3);
        }
    }

    #[test]
    fn green_rejects_coincident_points() {
        let z = p(0.2, 0.1);
        assert_eq!(green_eval(z, z, false), Err(MapError::CoincidentPoints));
        let w = p(0.2 + 1e-13, 0.1);
        assert!(green_eval(z, w, false).is_err());
    }

    #[test]
    fn poisson_values() {
        for t in [0.0, 1.0, 2.5] {
            assert!((poisson_eval(p(0.0, 0.0), t, false).value - 1.0).abs() < 1e-15);
        }
        assert!((poisson_eval(p(0.5, 0.0), 0.0, false).value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_kernel_is_normalized() {
        let n = 256;
        let mean = |z: DiskPoint| {
            let v: Vec<f64> = (0..n).map(|k| poisson_eval(z, 2.0 * PI * k as f64 / n as f64, false).value).collect();
            periodic_trapezoid(&v) / (2.0 * PI)
        };
        assert!((mean(p(0.3, 0.4)) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let z = random_point(&mut rng, 0.85);
            assert!((mean(z) - 1.0).abs() < 1e-10);
            let t = rng.gen_range(0.0..2.0 * PI);
            assert!(poisson_eval(z, t, false).value >= 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut checked = 0;
        while checked < 100 {
            let (z, w) = (random_point(&mut rng, 0.9), random_point(&mut rng, 0.9));
            if (z.value() - w.value()).norm() < 0.1 {
                continue;
            }
            checked += 1;
            let exact = green_eval(z, w, true).unwrap();
            let fd = finite_difference_jet(
                |q| green_eval(DiskPoint::new(q)?, w, false).map(|k| Complex64::new(k.value, 0.0)),
                z.value(),
                1e-5,
            )
            .unwrap();
            assert!((exact.dz - fd.dz).norm() < 1e-7);
            assert!((exact.dzbar - fd.dzbar).norm() < 1e-7);

            let t = rng.gen_range(0.0..2.0 * PI);
            let exact = poisson_eval(z, t, true);
            let fd = finite_difference_jet(
                |q| DiskPoint::new(q).map(|q| Complex64::new(poisson_eval(q, t, false).value, 0.0)),
                z.value(),
                1e-6,
            )
            .unwrap();
            let scale = 1.0 + exact.dz.norm();
            assert!((exact.dz - fd.dz).norm() < 1e-7 * scale * scale);
            assert!((exact.dzbar - fd.dzbar).norm() < 1e-7 * scale * scale);
        }
    }
}
