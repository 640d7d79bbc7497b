//! The capillary gauge `F(xi) = |xi| - cos(theta) <xi, E>` on `R^{n+1}`,
//! together with its gradient (the Cahn-Hoffman map), the dual gauge whose
//! unit ball is the Wulff shape, and the extremal constants of both.
//!
//! `E` always denotes the last coordinate axis; the supporting hyperplane is
//! `{x : <x, E> = 0}` and the working region is the closed upper half-space.

use nalgebra::SVector;
use thiserror::Error;

/// Default admissible contact-angle margin away from 0 and pi (radians).
pub const DEFAULT_THETA_MIN: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum GaugeError {
    #[error("contact angle {theta} outside [{min}, {max}]")]
    ThetaOutOfRange { theta: f64, min: f64, max: f64 },
    #[error("expected a unit vector, |v| = {norm}")]
    NotUnit { norm: f64 },
}

/// Contact-angle gauge for a fixed angle `theta in (0, pi)` acting on
/// vectors of `R^{n+1}` (ambient dimension `D = n + 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gauge<const D: usize> {
    theta: f64,
    cos_theta: f64,
    sin_theta: f64,
}

/// Extremal values of the gauge and its dual on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeBounds {
    pub m_gauge: f64,
    pub m_gauge_max: f64,
    pub m_dual: f64,
    pub m_dual_max: f64,
}

impl<const D: usize> Gauge<D> {
    /// Builds a gauge, enforcing `theta in [theta_min, pi - theta_min]`.
    ///
    /// Outside that window the dual-gauge constants blow up and mesh
    /// tolerances stop being meaningful.
    pub fn new(theta: f64) -> Result<Self, GaugeError> {
        Self::with_theta_min(theta, DEFAULT_THETA_MIN)
    }

    pub fn with_theta_min(theta: f64, theta_min: f64) -> Result<Self, GaugeError> {
        let max = std::f64::consts::PI - theta_min;
        if !(theta >= theta_min && theta <= max) {
            return Err(GaugeError::ThetaOutOfRange {
                theta,
                min: theta_min,
                max,
            });
        }
        Ok(Self {
            theta,
            cos_theta: theta.cos(),
            sin_theta: theta.sin(),
        })
    }

    /// Surface dimension n (the ambient space is `R^{n+1}`).
    pub const fn surface_dim(&self) -> usize {
        D - 1
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    pub fn sin_theta(&self) -> f64 {
        self.sin_theta
    }

    fn height(v: &SVector<f64, D>) -> f64 {
        v[D - 1]
    }

    /// Gauge value `|xi| - cos(theta) <xi, E>`; positively 1-homogeneous and
    /// strictly positive away from the origin.
    pub fn value(&self, xi: &SVector<f64, D>) -> f64 {
        xi.norm() - self.cos_theta * Self::height(xi)
    }

    /// Gradient of the gauge at a unit vector: `nu - cos(theta) E`.
    ///
    /// This is both the anisotropic normal and the Cahn-Hoffman image of
    /// `nu`, so its dual-gauge value is exactly 1.
    pub fn gradient(&self, nu: &SVector<f64, D>) -> Result<SVector<f64, D>, GaugeError> {
        let norm = nu.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GaugeError::NotUnit { norm });
        }
        Ok(self.anisotropic_normal(nu))
    }

    /// Same as [`Self::gradient`] without the unit-norm guard; callers own
    /// the invariant (mesh normals are normalized on construction).
    pub fn anisotropic_normal(&self, nu: &SVector<f64, D>) -> SVector<f64, D> {
        let mut out = *nu;
        out[D - 1] -= self.cos_theta;
        out
    }

    /// Dual gauge; its unit ball is the Wulff ball `B_1(-cos(theta) E)`.
    ///
    /// The textbook quotient loses precision when `cos(theta) <x,E>` is
    /// positive and dominant, so that branch is evaluated through the
    /// rationalized form `(S + cos(theta) <x,E>) / sin^2(theta)`.
    pub fn dual(&self, x: &SVector<f64, D>) -> f64 {
        let norm_sq = x.norm_squared();
        if norm_sq == 0.0 {
            return 0.0;
        }
        let z = Self::height(x);
        let cz = self.cos_theta * z;
        let s = (cz * cz + self.sin_theta * self.sin_theta * norm_sq).sqrt();
        if cz > 0.0 {
            (s + cz) / (self.sin_theta * self.sin_theta)
        } else {
            norm_sq / (s - cz)
        }
    }

    /// `(m_F, M_F, m_{F^o}, M_{F^o})` on the unit sphere.
    pub fn bounds(&self) -> GaugeBounds {
        let c = self.cos_theta.abs();
        GaugeBounds {
            m_gauge: 1.0 - c,
            m_gauge_max: 1.0 + c,
            m_dual: 1.0 / (1.0 + c),
            m_dual_max: 1.0 / (1.0 - c),
        }
    }

    /// Euclidean center of the Wulff ball `W_r(center)`, i.e.
    /// `center - r cos(theta) E`.
    pub fn wulff_euclidean_center(&self, center: &SVector<f64, D>, r: f64) -> SVector<f64, D> {
        let mut c = *center;
        c[D - 1] -= r * self.cos_theta;
        c
    }

    /// Membership test for the closed Wulff ball of radius `r`.
    pub fn in_wulff_ball(&self, center: &SVector<f64, D>, r: f64, x: &SVector<f64, D>) -> bool {
        self.dual(&(x - center)) <= r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{SVector, Vector3};
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn axis<const D: usize>() -> SVector<f64, D> {
        let mut e = SVector::<f64, D>::zeros();
        e[D - 1] = 1.0;
        e
    }

    #[test]
    fn value_matches_direct_substitution() {
        let g = Gauge::<3>::new(PI / 3.0).unwrap();
        let e = axis::<3>();
        assert!((g.value(&e) - 0.5).abs() < 1e-15);
        assert!((g.value(&(-e)) - 1.5).abs() < 1e-15);

        let right = Gauge::<3>::new(PI / 2.0).unwrap();
        let v = Vector3::new(0.6, 0.0, 0.8);
        assert!((right.value(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let g = Gauge::<3>::new(PI / 3.0).unwrap();
        let e = axis::<3>();
        let grad = g.gradient(&e).unwrap();
        assert!((grad - Vector3::new(0.0, 0.0, 0.5)).norm() < 1e-15);

        let right = Gauge::<3>::new(PI / 2.0).unwrap();
        let nu = Vector3::new(0.48, 0.6, 0.64).normalize();
        assert!((right.gradient(&nu).unwrap() - nu).norm() < 1e-15);

        // e1 maps to e1 - 0.5 e3, which must land on the unit Wulff sphere.
        let e1 = Vector3::new(1.0, 0.0, 0.0);
        let img = g.gradient(&e1).unwrap();
        assert!((img - Vector3::new(1.0, 0.0, -0.5)).norm() < 1e-15);
        assert!((g.dual(&img) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_rejects_non_unit() {
        let g = Gauge::<3>::new(PI / 3.0).unwrap();
        let err = g.gradient(&Vector3::new(0.0, 0.0, 2.0)).unwrap_err();
        assert!(matches!(err, GaugeError::NotUnit { .. }));
    }

    #[test]
    fn dual_examples() {
        let right = Gauge::<3>::new(PI / 2.0).unwrap();
        assert!((right.dual(&Vector3::new(3.0, 4.0, 0.0)) - 5.0).abs() < 1e-12);

        let g = Gauge::<3>::new(PI / 3.0).unwrap();
        // Both poles of the unit Wulff sphere: |x + cos(theta) E| = 1.
        assert!((g.dual(&Vector3::new(0.0, 0.0, 0.5)) - 1.0).abs() < 1e-12);
        assert!((g.dual(&Vector3::new(0.0, 0.0, -1.5)) - 1.0).abs() < 1e-12);
        assert_eq!(g.dual(&Vector3::zeros()), 0.0);
    }

    #[test]
    fn bounds_examples() {
        let b = Gauge::<3>::new(PI / 3.0).unwrap().bounds();
        assert!((b.m_gauge - 0.5).abs() < 1e-15);
        assert!((b.m_gauge_max - 1.5).abs() < 1e-15);
        assert!((b.m_dual - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.m_dual_max - 2.0).abs() < 1e-15);

        let b = Gauge::<3>::new(PI / 2.0).unwrap().bounds();
        for v in [b.m_gauge, b.m_gauge_max, b.m_dual, b.m_dual_max] {
            assert!((v - 1.0).abs() < 1e-15);
        }

        // |cos| is symmetric under theta -> pi - theta.
        let b = Gauge::<3>::new(2.0 * PI / 3.0).unwrap().bounds();
        assert!((b.m_gauge - 0.5).abs() < 1e-15);
        assert!((b.m_dual_max - 2.0).abs() < 1e-15);
    }

    #[test]
    fn theta_window_enforced() {
        assert!(Gauge::<3>::new(0.01).is_err());
        assert!(Gauge::<3>::new(PI - 0.01).is_err());
        assert!(Gauge::<3>::with_theta_min(0.01, 0.005).is_ok());
    }

    fn unit_vec3() -> impl Strategy<Value = Vector3<f64>> {
        (
            prop::array::uniform3(-1.0f64..1.0),
        )
            .prop_filter_map("nonzero", |(a,)| {
                let v = Vector3::from_column_slice(&a);
                (v.norm() > 1e-3).then(|| v.normalize())
            })
    }

    fn theta_strategy() -> impl Strategy<Value = f64> {
        0.1f64..(PI - 0.1)
    }

    proptest! {
        #[test]
        fn homogeneity(theta in theta_strategy(), v in unit_vec3(), t in 1e-3f64..1e3) {
            let g = Gauge::<3>::new(theta).unwrap();
            prop_assert!((g.value(&(t * v)) - t * g.value(&v)).abs() < 1e-9 * t.max(1.0));
            prop_assert!((g.dual(&(t * v)) - t * g.dual(&v)).abs() < 1e-9 * t.max(1.0) * g.bounds().m_dual_max);
        }

        #[test]
        fn support_identity(theta in theta_strategy(), z in unit_vec3()) {
            let g = Gauge::<3>::new(theta).unwrap();
            let grad = g.gradient(&z).unwrap();
            prop_assert!((grad.dot(&z) - g.value(&z)).abs() < 1e-12);
        }

        #[test]
        fn cahn_hoffman_normalization(theta in theta_strategy(), z in unit_vec3()) {
            let g = Gauge::<3>::new(theta).unwrap();
            prop_assert!((g.dual(&g.gradient(&z).unwrap()) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn wulff_sphere_characterization(theta in theta_strategy(), u in unit_vec3()) {
            // x on {|x + cos(theta) E| = 1} iff dual(x) = 1.
            let g = Gauge::<3>::new(theta).unwrap();
            let x = u - theta.cos() * Vector3::z();
            prop_assert!((g.dual(&x) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn sphere_bounds(theta in theta_strategy(), z in unit_vec3()) {
            let g = Gauge::<3>::new(theta).unwrap();
            let b = g.bounds();
            let f = g.value(&z);
            prop_assert!(f >= b.m_gauge - 1e-12 && f <= b.m_gauge_max + 1e-12);
            let d = g.dual(&z);
            prop_assert!(d >= b.m_dual - 1e-12 && d <= b.m_dual_max + 1e-12);
        }

        #[test]
        fn horizontal_evenness(theta in theta_strategy(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let g = Gauge::<3>::new(theta).unwrap();
            let v = Vector3::new(x, y, 0.0);
            prop_assert!((g.dual(&v) - g.dual(&(-v))).abs() < 1e-10 * (1.0 + v.norm()));
        }

        #[test]
        fn dual_triangle_inequality(
            theta in theta_strategy(),
            a in prop::array::uniform3(-3.0f64..3.0),
            b in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let g = Gauge::<3>::new(theta).unwrap();
            let a = Vector3::from_column_slice(&a);
            let b = Vector3::from_column_slice(&b);
            prop_assert!(g.dual(&(a + b)) <= g.dual(&a) + g.dual(&b) + 1e-9);
        }
    }
}
