//! Per-vertex differential quantities by local polynomial height fits.
//!
//! Interior vertices fit a quadric over their 2-ring in a frame aligned
//! with an averaged normal; the frame is re-aligned from the fitted linear
//! terms and the fit repeated. Boundary vertices only see a one-sided
//! stencil, so they use a 3-ring and cubic correction terms to recover the
//! accuracy lost to asymmetry.
//!
//! Sign convention: a sphere with outward normal has positive principal
//! curvatures, and the mean curvature is the plain sum of them.

use super::HalfSpaceMesh;
use crate::gauge::Gauge;
use crate::geom::{generalized_eigen_2x2, tangent_basis3, Point};
use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rayon::prelude::*;

/// Per-vertex normals and curvatures; `valid` marks vertices whose
/// neighborhood supported a fit.
#[derive(Debug, Clone)]
pub struct CurvatureField<const D: usize> {
    normals: Vec<Point<D>>,
    aniso_normals: Vec<Point<D>>,
    mean: Vec<f64>,
    kappas: Vec<f64>,
    valid: Vec<bool>,
}

impl<const D: usize> CurvatureField<D> {
    pub fn normal(&self, v: u32) -> &Point<D> {
        &self.normals[v as usize]
    }

    /// The anisotropic normal `nu - cos(theta) E`.
    pub fn aniso_normal(&self, v: u32) -> &Point<D> {
        &self.aniso_normals[v as usize]
    }

    pub fn mean(&self, v: u32) -> f64 {
        self.mean[v as usize]
    }

    /// Principal curvatures, ascending.
    pub fn kappas(&self, v: u32) -> &[f64] {
        let n = D - 1;
        &self.kappas[v as usize * n..(v as usize + 1) * n]
    }

    pub fn kappa_max(&self, v: u32) -> f64 {
        *self.kappas(v).last().unwrap()
    }

    pub fn is_valid(&self, v: u32) -> bool {
        self.valid[v as usize]
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (h, ok) in self.mean.iter().zip(&self.valid) {
            if *ok {
                lo = lo.min(*h);
                hi = hi.max(*h);
            }
        }
        (lo, hi)
    }
}

/// Estimates normals and curvatures everywhere on the mesh.
pub fn estimate_curvature<const D: usize>(
    mesh: &HalfSpaceMesh<D>,
    gauge: &Gauge<D>,
) -> CurvatureField<D> {
    let rough = rough_vertex_normals(mesh);
    let per_vertex: Vec<(Point<D>, f64, Vec<f64>, bool)> = (0..mesh.vertex_count() as u32)
        .into_par_iter()
        .map(|v| fit_vertex(mesh, &rough, v))
        .collect();

    let mut normals = Vec::with_capacity(per_vertex.len());
    let mut aniso = Vec::with_capacity(per_vertex.len());
    let mut mean = Vec::with_capacity(per_vertex.len());
    let mut kappas = Vec::with_capacity(per_vertex.len() * (D - 1));
    let mut valid = Vec::with_capacity(per_vertex.len());
    for (nu, h, ks, ok) in per_vertex {
        aniso.push(gauge.anisotropic_normal(&nu));
        normals.push(nu);
        mean.push(h);
        kappas.extend(ks);
        valid.push(ok);
    }
    CurvatureField {
        normals,
        aniso_normals: aniso,
        mean,
        kappas,
        valid,
    }
}

/// Angle-weighted average of incident element normals.
fn rough_vertex_normals<const D: usize>(mesh: &HalfSpaceMesh<D>) -> Vec<Point<D>> {
    let mut out = vec![Point::<D>::zeros(); mesh.vertex_count()];
    for e in 0..mesh.element_count() {
        let el = mesh.element(e);
        let n = el.normal();
        let idx = mesh.elements()[e];
        for (k, &v) in idx.iter().enumerate() {
            let w = match D {
                2 => el.measure(),
                3 => {
                    // Interior angle at this corner.
                    let a = el.verts[(k + 1) % 3] - el.verts[k];
                    let b = el.verts[(k + 2) % 3] - el.verts[k];
                    (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
                }
                _ => unreachable!(),
            };
            out[v as usize] += n * w;
        }
    }
    for n in &mut out {
        let len = n.norm();
        if len > 0.0 {
            *n /= len;
        }
    }
    out
}

fn fit_vertex<const D: usize>(
    mesh: &HalfSpaceMesh<D>,
    rough: &[Point<D>],
    v: u32,
) -> (Point<D>, f64, Vec<f64>, bool) {
    let boundary = mesh.is_boundary_vertex(v);
    let depth = if boundary { 3 } else { 2 };
    let neighbors = mesh.ring_neighborhood(v, depth);
    let n_curv = D - 1;
    let min_needed = if D == 3 { 5 } else { 2 };
    if neighbors.len() < min_needed {
        return (rough[v as usize], f64::NAN, vec![f64::NAN; n_curv], false);
    }
    let p0 = mesh.vertex(v);
    let offsets: Vec<Point<D>> = neighbors.iter().map(|&u| mesh.vertex(u) - p0).collect();

    let mut normal = rough[v as usize];
    let iterations = if boundary { 3 } else { 2 };
    let mut result = None;
    for _ in 0..iterations {
        match D {
            3 => {
                let nu3 = Vector3::new(normal[0], normal[1], normal[2]);
                let (t1, t2) = tangent_basis3(&nu3);
                let cubic = boundary && offsets.len() >= 12;
                let cols = if cubic { 9 } else { 5 };
                let mut a = DMatrix::<f64>::zeros(offsets.len(), cols);
                let mut b = DVector::<f64>::zeros(offsets.len());
                for (i, d) in offsets.iter().enumerate() {
                    let d3 = Vector3::new(d[0], d[1], d[2]);
                    let u = d3.dot(&t1);
                    let w = d3.dot(&t2);
                    let h = d3.dot(&nu3);
                    a[(i, 0)] = u * u;
                    a[(i, 1)] = u * w;
                    a[(i, 2)] = w * w;
                    a[(i, 3)] = u;
                    a[(i, 4)] = w;
                    if cubic {
                        a[(i, 5)] = u * u * u;
                        a[(i, 6)] = u * u * w;
                        a[(i, 7)] = u * w * w;
                        a[(i, 8)] = w * w * w;
                    }
                    b[i] = h;
                }
                let svd = a.svd(true, true);
                let x = match svd.solve(&b, 1e-12) {
                    Ok(x) => x,
                    Err(_) => {
                        return (normal, f64::NAN, vec![f64::NAN; n_curv], false);
                    }
                };
                let (qa, qb, qc, du, dw) = (x[0], x[1], x[2], x[3], x[4]);
                // Re-align the frame with the fitted tangent plane.
                let corrected = (nu3 - du * t1 - dw * t2).normalize();
                let wns = (1.0 + du * du + dw * dw).sqrt();
                let ii = [
                    [-2.0 * qa / wns, -qb / wns],
                    [-qb / wns, -2.0 * qc / wns],
                ];
                let i = [[1.0 + du * du, du * dw], [du * dw, 1.0 + dw * dw]];
                let (k1, k2) = generalized_eigen_2x2(ii, i);
                let mut out_n = Point::<D>::zeros();
                out_n[0] = corrected[0];
                out_n[1] = corrected[1];
                out_n[2] = corrected[2];
                normal = out_n;
                result = Some((k1 + k2, vec![k1, k2]));
            }
            2 => {
                let nu2 = Vector2::new(normal[0], normal[1]);
                let t = Vector2::new(-nu2[1], nu2[0]);
                let cubic = boundary && offsets.len() >= 3;
                let cols = if cubic { 3 } else { 2 };
                let mut a = DMatrix::<f64>::zeros(offsets.len(), cols);
                let mut b = DVector::<f64>::zeros(offsets.len());
                for (i, d) in offsets.iter().enumerate() {
                    let d2 = Vector2::new(d[0], d[1]);
                    let u = d2.dot(&t);
                    let h = d2.dot(&nu2);
                    a[(i, 0)] = u * u;
                    a[(i, 1)] = u;
                    if cubic {
                        a[(i, 2)] = u * u * u;
                    }
                    b[i] = h;
                }
                let svd = a.svd(true, true);
                let x = match svd.solve(&b, 1e-12) {
                    Ok(x) => x,
                    Err(_) => {
                        return (normal, f64::NAN, vec![f64::NAN; n_curv], false);
                    }
                };
                let (qa, du) = (x[0], x[1]);
                let corrected = (nu2 - du * t).normalize();
                let kappa = -2.0 * qa / (1.0 + du * du).powf(1.5);
                let mut out_n = Point::<D>::zeros();
                out_n[0] = corrected[0];
                out_n[1] = corrected[1];
                normal = out_n;
                result = Some((kappa, vec![kappa]));
            }
            _ => unreachable!(),
        }
    }
    let (h, ks) = result.unwrap();
    (normal, h, ks, true)
}

/// Contact frame at one boundary vertex.
#[derive(Debug, Clone)]
pub struct BoundaryFrame<const D: usize> {
    pub vertex: u32,
    /// Outward co-normal of the surface at its boundary.
    pub conormal_surface: Point<D>,
    /// Outward co-normal of the wetted region inside the hyperplane.
    pub conormal_plane: Point<D>,
    /// Angle between the surface normal and the vertical axis.
    pub measured_angle: f64,
}

#[derive(Debug, Clone)]
pub struct ContactProfile<const D: usize> {
    pub frames: Vec<BoundaryFrame<D>>,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    /// Set when the surface is closed and never meets the hyperplane.
    pub no_contact: bool,
}

/// Measures the contact angle along every boundary loop and compares it to
/// the gauge's target angle.
pub fn contact_angle_profile<const D: usize>(
    mesh: &HalfSpaceMesh<D>,
    field: &CurvatureField<D>,
    gauge: &Gauge<D>,
) -> ContactProfile<D> {
    let mut frames = Vec::new();
    for lp in mesh.boundary_loops() {
        let m = lp.vertices.len();
        for (i, &v) in lp.vertices.iter().enumerate() {
            let nu = field.normal(v);
            let measured = nu[D - 1].clamp(-1.0, 1.0).acos();
            let (mu, nu_bar) = match D {
                3 => {
                    let prev = lp.vertices[(i + m - 1) % m];
                    let next = lp.vertices[(i + 1) % m];
                    let tangent = (mesh.vertex(next) - mesh.vertex(prev)).normalize();
                    let nu3 = Vector3::new(nu[0], nu[1], nu[2]);
                    let t3 = Vector3::new(tangent[0], tangent[1], tangent[2]);
                    let mut mu = nu3.cross(&t3).normalize();
                    if mu[2] > 0.0 {
                        mu = -mu;
                    }
                    // In-plane outward co-normal: rotate the loop tangent
                    // clockwise seen from above.
                    let nb = Vector3::new(tangent[1], -tangent[0], 0.0).normalize();
                    let mut pm = Point::<D>::zeros();
                    let mut pn = Point::<D>::zeros();
                    for k in 0..3 {
                        pm[k] = mu[k];
                        pn[k] = nb[k];
                    }
                    (pm, pn)
                }
                2 => {
                    // Chain endpoint: the curve co-normal leaves the curve.
                    let inward = if i == 0 { lp.vertices[1] } else { lp.vertices[m - 2] };
                    let mu = (mesh.vertex(v) - mesh.vertex(inward)).normalize();
                    let mut nb = Point::<D>::zeros();
                    // T sits between the chain's endpoints: outward along
                    // +x at the chain head, -x at the tail.
                    nb[0] = if i == 0 { 1.0 } else { -1.0 };
                    (mu, nb)
                }
                _ => unreachable!(),
            };
            frames.push(BoundaryFrame {
                vertex: v,
                conormal_surface: mu,
                conormal_plane: nu_bar,
                measured_angle: measured,
            });
        }
    }
    if frames.is_empty() {
        return ContactProfile {
            frames,
            max_deviation: 0.0,
            mean_deviation: 0.0,
            no_contact: true,
        };
    }
    let theta = gauge.theta();
    let mut max_dev: f64 = 0.0;
    let mut sum = 0.0;
    for f in &frames {
        let dev = (f.measured_angle - theta).abs();
        max_dev = max_dev.max(dev);
        sum += dev;
    }
    ContactProfile {
        max_deviation: max_dev,
        mean_deviation: sum / frames.len() as f64,
        frames,
        no_contact: false,
    }
}
