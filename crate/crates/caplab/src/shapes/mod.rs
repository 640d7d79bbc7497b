//! Analytic shape machinery: unit-ball cap volumes via the regularized
//! incomplete beta function, the contact-angle shift of growing balls, the
//! closed-form quantities of exact caps, and the mesh generator registry.

pub mod generators;

use crate::gauge::Gauge;
use crate::mesh::MeshError;
use crate::numerics::{regularized_incomplete_beta, unit_ball_volume};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("requested components overlap: {0}")]
    Overlap(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Volume of the region cut from the half-space by a unit ball meeting the
/// hyperplane at angle `theta`; `theta = pi` is the convention for a ball
/// that misses the hyperplane entirely, giving the full unit-ball volume.
///
/// Monotone non-decreasing on `(0, pi]`.
pub fn cap_volume_coefficient(n: usize, theta: f64) -> Result<f64, ShapeError> {
    let pi = std::f64::consts::PI;
    if !(theta > 0.0 && theta <= pi) {
        return Err(ShapeError::InvalidParam(format!(
            "cap angle must lie in (0, pi], got {theta}"
        )));
    }
    let omega = unit_ball_volume(n + 1);
    if theta == pi {
        return Ok(omega);
    }
    let s2 = theta.sin() * theta.sin();
    let half_ix = 0.5 * omega * regularized_incomplete_beta((n + 2) as f64 / 2.0, 0.5, s2);
    if theta < pi / 2.0 {
        Ok(half_ix)
    } else {
        Ok(omega - half_ix)
    }
}

/// Contact angle of the ball `B_{rho; theta}(o)` with the hyperplane, and
/// whether the ball misses the hyperplane entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedAngle {
    pub angle: f64,
    pub disjoint: bool,
}

/// How the ball grown from a center at `height >= 0` meets the hyperplane:
/// `cos(theta_rho) = cos(theta) - height / rho`, saturating at `pi` once the
/// ball detaches (tangency counts as detached). The angle equals `theta`
/// exactly iff the center sits on the hyperplane.
pub fn shifted_contact_angle<const D: usize>(height: f64, rho: f64, gauge: &Gauge<D>) -> ShiftedAngle {
    assert!(rho > 0.0 && height >= 0.0);
    if height == 0.0 {
        return ShiftedAngle {
            angle: gauge.theta(),
            disjoint: false,
        };
    }
    let c = gauge.cos_theta() - height / rho;
    if c <= -1.0 {
        ShiftedAngle {
            angle: std::f64::consts::PI,
            disjoint: true,
        }
    } else {
        ShiftedAngle {
            angle: c.acos(),
            disjoint: false,
        }
    }
}

/// Contact classification of a candidate ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactClass {
    BoundaryCap,
    InteriorSphere,
    Truncated,
}

/// Classifies the ball `B_{rho; theta}(o)` by its center height.
pub fn classify_ball<const D: usize>(height: f64, rho: f64, gauge: &Gauge<D>) -> ContactClass {
    if height == 0.0 {
        ContactClass::BoundaryCap
    } else if shifted_contact_angle(height, rho, gauge).disjoint {
        ContactClass::InteriorSphere
    } else {
        ContactClass::Truncated
    }
}

/// Closed-form quantities of the exact cap of Wulff radius `R` centered on
/// the hyperplane; the oracle against which mesh quadrature is tested.
#[derive(Debug, Clone, Copy)]
pub struct ExactCapQuantities {
    pub volume: f64,
    pub surface: f64,
    pub wetted: f64,
    pub perimeter_aniso: f64,
    pub mean_curvature: f64,
    pub deepest_wetted_distance: f64,
}

pub fn exact_cap_quantities<const D: usize>(radius: f64, gauge: &Gauge<D>) -> ExactCapQuantities {
    assert!(radius > 0.0);
    let n = D - 1;
    let theta = gauge.theta();
    let cos = gauge.cos_theta();
    let sin = gauge.sin_theta();
    let volume = cap_volume_coefficient(n, theta).expect("theta validated by gauge")
        * radius.powi(D as i32);
    let (surface, wetted) = match n {
        1 => (2.0 * theta * radius, 2.0 * radius * sin),
        2 => {
            let zone = 2.0 * std::f64::consts::PI * radius * radius * (1.0 - cos);
            let disk = std::f64::consts::PI * (radius * sin).powi(2);
            (zone, disk)
        }
        _ => unreachable!(),
    };
    let deepest = if theta <= std::f64::consts::FRAC_PI_2 {
        radius * (1.0 - cos)
    } else {
        radius * sin
    };
    ExactCapQuantities {
        volume,
        surface,
        wetted,
        perimeter_aniso: surface - cos * wetted,
        mean_curvature: n as f64 / radius,
        deepest_wetted_distance: deepest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    /// Independent oracle: spherical cap volume pi h^2 (3 - h) / 3 of a unit
    /// ball, cap height h = 1 - cos(theta).
    fn cap_volume_oracle_3d(theta: f64) -> f64 {
        let h = 1.0 - theta.cos();
        PI * h * h * (3.0 - h) / 3.0
    }

    /// Independent oracle: circular segment area theta - sin * cos.
    fn cap_volume_oracle_2d(theta: f64) -> f64 {
        theta - theta.sin() * theta.cos()
    }

    #[test]
    fn cap_volume_matches_spot_values() {
        let b = cap_volume_coefficient(2, PI / 2.0).unwrap();
        assert!((b - 2.0 * PI / 3.0).abs() < 1e-12);
        let b = cap_volume_coefficient(2, PI / 3.0).unwrap();
        assert!((b - 5.0 * PI / 24.0).abs() < 1e-12);
        let b = cap_volume_coefficient(2, 2.0 * PI / 3.0).unwrap();
        assert!((b - 9.0 * PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn cap_volume_matches_oracles_on_grid() {
        for i in 1..=50 {
            let theta = PI * i as f64 / 51.0;
            let b3 = cap_volume_coefficient(2, theta).unwrap();
            assert!(
                (b3 - cap_volume_oracle_3d(theta)).abs() < 1e-9,
                "n=2 theta={theta}"
            );
            let b2 = cap_volume_coefficient(1, theta).unwrap();
            assert!(
                (b2 - cap_volume_oracle_2d(theta)).abs() < 1e-9,
                "n=1 theta={theta}"
            );
        }
    }

    #[test]
    fn cap_volume_monotone_and_exact_at_pi() {
        for n in [1usize, 2] {
            let mut prev = 0.0;
            for i in 1..=100 {
                let theta = PI * i as f64 / 100.0;
                let b = cap_volume_coefficient(n, theta).unwrap();
                assert!(b >= prev - 1e-12, "n={n} theta={theta}");
                prev = b;
            }
            assert_eq!(
                cap_volume_coefficient(n, PI).unwrap(),
                unit_ball_volume(n + 1)
            );
        }
        assert!(cap_volume_coefficient(2, 0.0).is_err());
        assert!(cap_volume_coefficient(2, 3.2).is_err());
    }

    #[test]
    fn cap_volume_continuous_across_branch() {
        let below = cap_volume_coefficient(2, PI / 2.0 - 1e-12).unwrap();
        let at = cap_volume_coefficient(2, PI / 2.0).unwrap();
        assert!((below - at).abs() < 1e-9);
    }

    #[test]
    fn cap_volume_matches_monte_carlo() {
        // Volume of B_1(-cos(theta) E) clipped to the half-space, n = 2.
        let theta: f64 = 1.1;
        let b = cap_volume_coefficient(2, theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n_samples = 10_000_000u64;
        let mut hits = 0u64;
        let cz = -theta.cos();
        // Sample the bounding box of the ball, count points in ball with z > 0.
        let (lo, hi) = (cz - 1.0, cz + 1.0);
        let box_vol = 2.0 * 2.0 * (hi - lo.max(0.0));
        let lo_z = lo.max(0.0);
        for _ in 0..n_samples {
            let x = rng.gen_range(-1.0..1.0);
            let y = rng.gen_range(-1.0..1.0);
            let z = rng.gen_range(lo_z..hi);
            if x * x + y * y + (z - cz) * (z - cz) <= 1.0 {
                hits += 1;
            }
        }
        let p = hits as f64 / n_samples as f64;
        let est = p * box_vol;
        let stderr = box_vol * (p * (1.0 - p) / n_samples as f64).sqrt();
        assert!(
            (est - b).abs() < 3.0 * stderr,
            "est {est}, expected {b}, stderr {stderr}"
        );
    }

    #[test]
    fn shifted_angle_examples() {
        let g = Gauge::<3>::new(PI / 3.0).unwrap();
        let s = shifted_contact_angle(0.0, 2.7, &g);
        assert_eq!(s.angle, PI / 3.0);
        assert!(!s.disjoint);

        let s = shifted_contact_angle(0.25, 1.0, &g);
        assert!((s.angle - 0.25f64.acos()).abs() < 1e-15);

        let s = shifted_contact_angle(2.0, 1.0, &g);
        assert_eq!(s.angle, PI);
        assert!(s.disjoint);
    }

    #[test]
    fn shifted_angle_monotone_in_radius() {
        let g = Gauge::<3>::new(1.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let h = rng.gen_range(0.001..3.0);
            let r1 = rng.gen_range(0.01..5.0);
            let r2 = r1 + rng.gen_range(0.01..5.0);
            let a1 = shifted_contact_angle(h, r1, &g).angle;
            let a2 = shifted_contact_angle(h, r2, &g).angle;
            assert!(g.theta() <= a2 + 1e-14);
            assert!(a2 <= a1 + 1e-14);
            assert!(a1 <= PI);
        }
    }

    #[test]
    fn exact_cap_closed_forms() {
        let g = Gauge::<3>::new(PI / 2.0).unwrap();
        let q = exact_cap_quantities(1.0, &g);
        assert!((q.volume - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((q.surface - 2.0 * PI).abs() < 1e-12);
        assert!((q.wetted - PI).abs() < 1e-12);
        assert!((q.perimeter_aniso - 2.0 * PI).abs() < 1e-12);
        assert!((q.mean_curvature - 2.0).abs() < 1e-15);
        assert!((q.deepest_wetted_distance - 1.0).abs() < 1e-12);

        let g2 = Gauge::<2>::new(PI / 2.0).unwrap();
        let q = exact_cap_quantities(1.0, &g2);
        assert!((q.volume - PI / 2.0).abs() < 1e-12);
        assert!((q.surface - PI).abs() < 1e-12);
        assert!((q.wetted - 2.0).abs() < 1e-12);
        assert!((q.mean_curvature - 1.0).abs() < 1e-15);

        // b_theta scaling by R^{n+1}.
        let g3 = Gauge::<3>::new(PI / 3.0).unwrap();
        let q = exact_cap_quantities(2.0, &g3);
        assert!((q.volume - 5.0 * PI / 3.0).abs() < 1e-12);
    }
}
