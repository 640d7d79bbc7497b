//! Enclosed-region quantities: volume, wetted area, perimeters, extrinsic
//! diameter, the deepest inscribed half-ball, and the local-volume
//! isoperimetric radius.

use super::queries::MeshQueries;
use super::HalfSpaceMesh;
use crate::gauge::Gauge;
use crate::geom::{shoelace_area, Point};
use crate::numerics::unit_ball_volume;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Deepest point of the wetted region, i.e. the largest half-ball centered
/// on the wetted region that fits inside the enclosed region.
#[derive(Debug, Clone)]
pub struct DeepestWetted<const D: usize> {
    pub distance: f64,
    pub point: Point<D>,
    /// Grid-resolution error bar on the reported maximum.
    pub error: f64,
}

/// Largest radius at which some hyperplane point keeps a `beta0` volume
/// fraction of its upper half-ball inside the region, with the analytic
/// bracket it must respect.
#[derive(Debug, Clone)]
pub struct IsoperimetricRadius {
    pub beta0: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct RegionQuantities<const D: usize> {
    pub volume: f64,
    pub wetted_area: f64,
    pub surface_area: f64,
    pub perimeter: f64,
    pub perimeter_aniso: f64,
    pub extrinsic_diameter: f64,
    /// Upper bound on the diameter error (max edge length).
    pub diameter_error: f64,
    pub deepest_wetted: DeepestWetted<D>,
    pub isoperimetric_radius: IsoperimetricRadius,
}

/// Wetted-region membership test in the hyperplane.
pub struct WettedRegion<'m, const D: usize> {
    mesh: &'m HalfSpaceMesh<D>,
    /// D = 3: boundary loops as (x, y) polygons; D = 2: intervals.
    polygons: Vec<Vec<(f64, f64)>>,
    intervals: Vec<(f64, f64)>,
}

impl<'m, const D: usize> WettedRegion<'m, D> {
    pub fn new(mesh: &'m HalfSpaceMesh<D>) -> Self {
        let mut polygons = Vec::new();
        let mut intervals = Vec::new();
        for lp in mesh.boundary_loops() {
            match D {
                3 => {
                    polygons.push(
                        lp.vertices
                            .iter()
                            .map(|&v| {
                                let p = mesh.vertex(v);
                                (p[0], p[1])
                            })
                            .collect(),
                    );
                }
                2 => {
                    let head = mesh.vertex(lp.vertices[0])[0];
                    let tail = mesh.vertex(*lp.vertices.last().unwrap())[0];
                    intervals.push((tail.min(head), tail.max(head)));
                }
                _ => unreachable!(),
            }
        }
        Self {
            mesh,
            polygons,
            intervals,
        }
    }

    /// Signed wetted measure (positive for outward-oriented meshes).
    pub fn measure(&self) -> f64 {
        match D {
            3 => self.polygons.iter().map(|p| shoelace_area(p)).sum(),
            2 => self
                .mesh
                .boundary_loops()
                .iter()
                .map(|lp| {
                    let head = self.mesh.vertex(lp.vertices[0])[0];
                    let tail = self.mesh.vertex(*lp.vertices.last().unwrap())[0];
                    head - tail
                })
                .sum(),
            _ => unreachable!(),
        }
    }

    /// Whether the hyperplane point with horizontal coordinates `xy` lies
    /// in the wetted region (crossing parity; holes handled by parity).
    pub fn contains(&self, xy: &[f64]) -> bool {
        match D {
            3 => {
                let (px, py) = (xy[0], xy[1]);
                let mut crossings = 0usize;
                for poly in &self.polygons {
                    let n = poly.len();
                    for i in 0..n {
                        let (x0, y0) = poly[i];
                        let (x1, y1) = poly[(i + 1) % n];
                        if (y0 > py) != (y1 > py) {
                            let t = (py - y0) / (y1 - y0);
                            if x0 + t * (x1 - x0) > px {
                                crossings += 1;
                            }
                        }
                    }
                }
                crossings % 2 == 1
            }
            2 => self
                .intervals
                .iter()
                .any(|&(a, b)| xy[0] >= a && xy[0] <= b),
            _ => unreachable!(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty() && self.intervals.is_empty()
    }

    /// Horizontal bounding box of the wetted region.
    pub fn bbox(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        match D {
            3 => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for poly in &self.polygons {
                    for &(x, y) in poly {
                        lo[0] = lo[0].min(x);
                        lo[1] = lo[1].min(y);
                        hi[0] = hi[0].max(x);
                        hi[1] = hi[1].max(y);
                    }
                }
                Some((lo, hi))
            }
            2 => {
                let lo = self.intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
                let hi = self
                    .intervals
                    .iter()
                    .map(|i| i.1)
                    .fold(f64::NEG_INFINITY, f64::max);
                Some((vec![lo], vec![hi]))
            }
            _ => unreachable!(),
        }
    }
}

/// Computes every region quantity. Deterministic for a fixed seed.
pub fn region_quantities<const D: usize>(
    mesh: &HalfSpaceMesh<D>,
    gauge: &Gauge<D>,
    beta0: f64,
    seed: u64,
) -> RegionQuantities<D> {
    assert!(beta0 > 0.0 && beta0 < 1.0);
    let surface_area = mesh.surface_measure();
    let volume = mesh.signed_volume();
    let wetted = WettedRegion::new(mesh);
    let wetted_area = wetted.measure();

    let perimeter_aniso: f64 = (0..mesh.element_count())
        .map(|e| {
            let el = mesh.element(e);
            el.measure() * gauge.value(&el.normal())
        })
        .sum();

    let extrinsic_diameter = extrinsic_diameter(mesh);
    let queries = MeshQueries::new(mesh);
    let deepest = deepest_wetted_point(mesh, &wetted, &queries);

    let upper = (2.0 * volume / (unit_ball_volume(D) * beta0)).powf(1.0 / D as f64);
    let value = isoperimetric_radius(&wetted, &queries, beta0, deepest.distance, upper, seed);
    RegionQuantities {
        volume,
        wetted_area,
        surface_area,
        perimeter: surface_area + wetted_area,
        perimeter_aniso,
        extrinsic_diameter,
        diameter_error: mesh.max_edge_length(),
        deepest_wetted: deepest,
        isoperimetric_radius: IsoperimetricRadius {
            beta0,
            value,
            lower: deepest.distance,
            upper,
        },
    }
}

/// Max pairwise vertex distance, exact over vertices.
pub fn extrinsic_diameter<const D: usize>(mesh: &HalfSpaceMesh<D>) -> f64 {
    let verts = mesh.vertices();
    (0..verts.len())
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for j in i + 1..verts.len() {
                best = best.max((verts[i] - verts[j]).norm_squared());
            }
            best
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

fn deepest_wetted_point<const D: usize>(
    mesh: &HalfSpaceMesh<D>,
    wetted: &WettedRegion<D>,
    queries: &MeshQueries<D>,
) -> DeepestWetted<D> {
    let Some((lo, hi)) = wetted.bbox() else {
        return DeepestWetted {
            distance: 0.0,
            point: Point::<D>::zeros(),
            error: 0.0,
        };
    };
    let h = D - 1;
    let grid_n = 40usize;
    let mut best = (f64::NEG_INFINITY, vec![0.0; h]);
    let mut probe = |xy: &[f64]| -> f64 {
        if !wetted.contains(xy) {
            return f64::NEG_INFINITY;
        }
        let mut p = Point::<D>::zeros();
        for k in 0..h {
            p[k] = xy[k];
        }
        queries.distance_to_surface(&p)
    };
    match h {
        1 => {
            for i in 0..=grid_n {
                let x = lo[0] + (hi[0] - lo[0]) * i as f64 / grid_n as f64;
                let d = probe(&[x]);
                if d > best.0 {
                    best = (d, vec![x]);
                }
            }
        }
        2 => {
            for i in 0..=grid_n {
                for j in 0..=grid_n {
                    let x = lo[0] + (hi[0] - lo[0]) * i as f64 / grid_n as f64;
                    let y = lo[1] + (hi[1] - lo[1]) * j as f64 / grid_n as f64;
                    let d = probe(&[x, y]);
                    if d > best.0 {
                        best = (d, vec![x, y]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    if best.0 == f64::NEG_INFINITY {
        return DeepestWetted {
            distance: 0.0,
            point: Point::<D>::zeros(),
            error: 0.0,
        };
    }
    // Pattern-search refinement with shrinking steps.
    let mut step = (0..h).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max) / grid_n as f64;
    let mut center = best.1.clone();
    let mut value = best.0;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..h {
            for dir in [-1.0, 1.0] {
                let mut cand = center.clone();
                cand[k] += dir * step;
                let d = probe(&cand);
                if d > value {
                    value = d;
                    center = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let mut point = Point::<D>::zeros();
    for k in 0..h {
        point[k] = center[k];
    }
    DeepestWetted {
        distance: value,
        point,
        error: mesh.max_edge_length() * 0.5,
    }
}

/// Bisection on the largest radius whose best half-ball keeps a `beta0`
/// volume fraction inside the region. Candidate centers run over a coarse
/// hyperplane lattice plus the deepest wetted point.
fn isoperimetric_radius<const D: usize>(
    wetted: &WettedRegion<D>,
    queries: &MeshQueries<D>,
    beta0: f64,
    mut lo: f64,
    mut hi: f64,
    seed: u64,
) -> f64 {
    if wetted.is_empty() || lo <= 0.0 {
        return lo.max(0.0);
    }
    let Some((blo, bhi)) = wetted.bbox() else {
        return lo;
    };
    let h = D - 1;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let lattice = 7usize;
    match h {
        1 => {
            for i in 0..=lattice {
                centers.push(vec![blo[0] + (bhi[0] - blo[0]) * i as f64 / lattice as f64]);
            }
        }
        2 => {
            for i in 0..=lattice {
                for j in 0..=lattice {
                    centers.push(vec![
                        blo[0] + (bhi[0] - blo[0]) * i as f64 / lattice as f64,
                        blo[1] + (bhi[1] - blo[1]) * j as f64 / lattice as f64,
                    ]);
                }
            }
        }
        _ => unreachable!(),
    }

    let n_samples = 3000usize;
    let fraction_ok = |r: f64, chunk_seed: u64| -> bool {
        centers.par_iter().enumerate().any(|(ci, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed ^ (ci as u64).wrapping_mul(0x9e37));
            let mut hits = 0usize;
            for _ in 0..n_samples {
                // Uniform point in the upper half ball of radius r.
                let mut p = Point::<D>::zeros();
                loop {
                    let mut norm_sq = 0.0;
                    for k in 0..D {
                        let x = rng.gen_range(-1.0..1.0);
                        p[k] = x;
                        norm_sq += x * x;
                    }
                    if norm_sq <= 1.0 {
                        break;
                    }
                }
                p[D - 1] = p[D - 1].abs();
                for k in 0..h {
                    p[k] = c[k] + r * p[k];
                }
                p[D - 1] *= r;
                if queries.inside(&p) {
                    hits += 1;
                }
            }
            hits as f64 / n_samples as f64 >= beta0
        })
    };

    // The lower end is feasible by construction (the deepest half-ball is
    // entirely inside). Bisection assumes a monotone transition.
    if !fraction_ok(lo * 0.99, seed) {
        // Fall back to the analytic lower bound.
        return lo;
    }
    for it in 0..24 {
        let mid = 0.5 * (lo + hi);
        if fraction_ok(mid, seed ^ (it + 1)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::generators::{find_recipe, GeneratedMesh, ShapeParams};
    use crate::shapes::exact_cap_quantities;

    const PI: f64 = std::f64::consts::PI;

    fn cap(theta: f64, res: u32) -> HalfSpaceMesh<3> {
        let p = ShapeParams {
            theta,
            resolution: res,
            ..Default::default()
        };
        match find_recipe("cap").unwrap().build(&p).unwrap() {
            GeneratedMesh::Surface(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn hemisphere_region_quantities() {
        let mesh = cap(PI / 2.0, 4);
        let gauge = Gauge::<3>::new(PI / 2.0).unwrap();
        let q = region_quantities(&mesh, &gauge, 0.25, 7);
        let exact = exact_cap_quantities(1.0, &gauge);
        assert!((q.volume - exact.volume).abs() / exact.volume < 0.01);
        assert!((q.wetted_area - exact.wetted).abs() / exact.wetted < 0.01);
        assert!((q.surface_area - exact.surface).abs() / exact.surface < 0.01);
        assert!((q.perimeter_aniso - exact.perimeter_aniso).abs() / exact.perimeter_aniso < 0.01);
        assert!((q.deepest_wetted.distance - 1.0).abs() < 0.01);
        assert!((q.extrinsic_diameter - 2.0).abs() < 0.01);
        // Isoperimetric radius bracket [1, 4^{1/3}] with the true value at
        // the upper end.
        assert!(q.isoperimetric_radius.lower <= q.isoperimetric_radius.value + 1e-9);
        assert!(q.isoperimetric_radius.value <= q.isoperimetric_radius.upper + 1e-9);
        assert!((q.isoperimetric_radius.upper - 4.0f64.powf(1.0 / 3.0)).abs() < 0.02);
        assert!((q.isoperimetric_radius.value - 4.0f64.powf(1.0 / 3.0)).abs() < 0.1);
    }

    #[test]
    fn tilted_cap_quantities() {
        for theta in [PI / 3.0, 2.0 * PI / 3.0] {
            let mesh = cap(theta, 4);
            let gauge = Gauge::<3>::new(theta).unwrap();
            let q = region_quantities(&mesh, &gauge, 0.25, 7);
            let exact = exact_cap_quantities(1.0, &gauge);
            assert!(
                (q.volume - exact.volume).abs() / exact.volume < 0.01,
                "volume theta={theta}"
            );
            assert!(
                (q.wetted_area - exact.wetted).abs() / exact.wetted < 0.01,
                "wetted theta={theta}"
            );
            assert!(
                (q.perimeter_aniso - exact.perimeter_aniso).abs() / exact.perimeter_aniso < 0.01,
                "aniso perimeter theta={theta}"
            );
            assert!(
                (q.deepest_wetted.distance - exact.deepest_wetted_distance).abs() < 0.02,
                "deepest theta={theta}"
            );
            // Wetted area never exceeds surface area.
            assert!(q.wetted_area <= q.surface_area + 1e-9);
        }
    }

    #[test]
    fn curve_region_quantities() {
        let p = ShapeParams {
            dim: 1,
            theta: PI / 2.0,
            resolution: 4,
            ..Default::default()
        };
        let mesh = match find_recipe("cap").unwrap().build(&p).unwrap() {
            GeneratedMesh::Curve(m) => m,
            _ => unreachable!(),
        };
        let gauge = Gauge::<2>::new(PI / 2.0).unwrap();
        let q = region_quantities(&mesh, &gauge, 0.25, 7);
        assert!((q.volume - PI / 2.0).abs() < 2e-3);
        assert!((q.wetted_area - 2.0).abs() < 1e-9);
        assert!((q.surface_area - PI).abs() < 2e-3);
        assert!((q.deepest_wetted.distance - 1.0).abs() < 0.01);
    }

    #[test]
    fn closed_component_has_no_wetted_area() {
        let p = ShapeParams {
            theta: PI / 2.0,
            centers: vec![vec![0.0, 0.0, 3.0]],
            resolution: 3,
            ..Default::default()
        };
        let mesh = match find_recipe("cap").unwrap().build(&p).unwrap() {
            GeneratedMesh::Surface(m) => m,
            _ => unreachable!(),
        };
        let gauge = Gauge::<3>::new(PI / 2.0).unwrap();
        let q = region_quantities(&mesh, &gauge, 0.25, 7);
        assert_eq!(q.wetted_area, 0.0);
        assert_eq!(q.deepest_wetted.distance, 0.0);
        assert!((q.volume - 4.0 * PI / 3.0).abs() < 0.02);
    }
}
