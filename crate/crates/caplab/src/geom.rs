//! Low-level geometric kernels for polyline (D = 2) and triangle (D = 3)
//! elements: measures, outward normals, closest-point distances, and the
//! tilted-ray crossing tests behind the Monte-Carlo inside/outside oracle.

use nalgebra::{SVector, Vector2, Vector3};

pub type Point<const D: usize> = SVector<f64, D>;

/// Vertices of one mesh element (a segment for D = 2, a triangle for D = 3).
#[derive(Debug, Clone, Copy)]
pub struct Element<const D: usize> {
    pub verts: [Point<D>; D],
}

impl<const D: usize> Element<D> {
    pub fn new(verts: [Point<D>; D]) -> Self {
        Self { verts }
    }

    /// Length (D = 2) or area (D = 3).
    pub fn measure(&self) -> f64 {
        match D {
            2 => (self.verts[1] - self.verts[0]).norm(),
            3 => {
                let a = self.verts[1] - self.verts[0];
                let b = self.verts[2] - self.verts[0];
                0.5 * cross_norm::<D>(&a, &b)
            }
            _ => unreachable!("unsupported ambient dimension"),
        }
    }

    /// Unit normal induced by the element orientation.
    ///
    /// Segments rotate their direction clockwise (so a counterclockwise
    /// boundary walk yields outward normals); triangles use the right-handed
    /// cross product of their edge pair.
    pub fn normal(&self) -> Point<D> {
        let mut out = Point::<D>::zeros();
        match D {
            2 => {
                let e = self.verts[1] - self.verts[0];
                let n = (e[1] * e[1] + e[0] * e[0]).sqrt();
                out[0] = e[1] / n;
                out[1] = -e[0] / n;
            }
            3 => {
                let a = self.verts[1] - self.verts[0];
                let b = self.verts[2] - self.verts[0];
                let cx = a[1] * b[2] - a[2] * b[1];
                let cy = a[2] * b[0] - a[0] * b[2];
                let cz = a[0] * b[1] - a[1] * b[0];
                let n = (cx * cx + cy * cy + cz * cz).sqrt();
                out[0] = cx / n;
                out[1] = cy / n;
                out[2] = cz / n;
            }
            _ => unreachable!(),
        }
        out
    }

    pub fn centroid(&self) -> Point<D> {
        let mut c = Point::<D>::zeros();
        for v in &self.verts {
            c += v;
        }
        c / D as f64
    }

    /// Euclidean distance from `p` to the element.
    pub fn distance(&self, p: &Point<D>) -> f64 {
        match D {
            2 => point_segment_distance_sq(&self.verts[0], &self.verts[1], p).sqrt(),
            3 => {
                let to3 = |v: &Point<D>| Vector3::new(v[0], v[1], v[2]);
                point_triangle_distance_sq(
                    &to3(&self.verts[0]),
                    &to3(&self.verts[1]),
                    &to3(&self.verts[2]),
                    &to3(p),
                )
                .sqrt()
            }
            _ => unreachable!(),
        }
    }

    /// Whether the ray `origin + t * dir`, `t > 0`, crosses the element.
    pub fn ray_crosses(&self, origin: &Point<D>, dir: &Point<D>) -> bool {
        match D {
            2 => ray_segment_crosses(
                &Vector2::new(origin[0], origin[1]),
                &Vector2::new(dir[0], dir[1]),
                &Vector2::new(self.verts[0][0], self.verts[0][1]),
                &Vector2::new(self.verts[1][0], self.verts[1][1]),
            ),
            3 => {
                let to3 = |v: &Point<D>| Vector3::new(v[0], v[1], v[2]);
                ray_triangle_crosses(
                    &to3(origin),
                    &to3(dir),
                    &to3(&self.verts[0]),
                    &to3(&self.verts[1]),
                    &to3(&self.verts[2]),
                )
            }
            _ => unreachable!(),
        }
    }

    pub fn bbox(&self) -> (Point<D>, Point<D>) {
        let mut lo = self.verts[0];
        let mut hi = self.verts[0];
        for v in &self.verts[1..] {
            for k in 0..D {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

fn cross_norm<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    debug_assert_eq!(D, 3);
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt()
}

pub fn point_segment_distance_sq<const D: usize>(
    a: &Point<D>,
    b: &Point<D>,
    p: &Point<D>,
) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq == 0.0 {
        return (p - a).norm_squared();
    }
    let t = ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm_squared()
}

/// Squared distance from a point to a triangle (Ericson's region walk).
pub fn point_triangle_distance_sq(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
    p: &Vector3<f64>,
) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm_squared();
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm_squared();
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (p - (a + t * ab)).norm_squared();
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm_squared();
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (p - (a + t * ac)).norm_squared();
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + t * (c - b))).norm_squared();
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + v * ab + w * ac)).norm_squared()
}

/// Moller-Trumbore ray/triangle crossing with `t > 0`.
fn ray_triangle_crosses(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
) -> bool {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-300 {
        return false;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(&qvec) * inv_det > 0.0
}

fn ray_segment_crosses(
    origin: &Vector2<f64>,
    dir: &Vector2<f64>,
    a: &Vector2<f64>,
    b: &Vector2<f64>,
) -> bool {
    let e = b - a;
    let denom = dir.x * (-e.y) - dir.y * (-e.x);
    if denom.abs() < 1e-300 {
        return false;
    }
    let rhs = a - origin;
    let t = (rhs.x * (-e.y) - rhs.y * (-e.x)) / denom;
    let s = (dir.x * rhs.y - dir.y * rhs.x) / denom;
    t > 0.0 && (0.0..=1.0).contains(&s)
}

/// Eigenvalues of the generalized symmetric pair (II, I), ascending.
///
/// Solves `det(II - k I) = 0` for 2x2 matrices; this is the principal
/// curvature equation for a quadric height fit with first fundamental form
/// `I` and second fundamental form `II`.
pub fn generalized_eigen_2x2(ii: [[f64; 2]; 2], i: [[f64; 2]; 2]) -> (f64, f64) {
    let det_i = i[0][0] * i[1][1] - i[0][1] * i[1][0];
    let det_ii = ii[0][0] * ii[1][1] - ii[0][1] * ii[1][0];
    // Mixed coefficient: d/dk det(II - k I) expanded.
    let mixed = ii[0][0] * i[1][1] + ii[1][1] * i[0][0] - ii[0][1] * i[1][0] - ii[1][0] * i[0][1];
    // det_i k^2 - mixed k + det_ii = 0
    let disc = (mixed * mixed - 4.0 * det_i * det_ii).max(0.0).sqrt();
    let k1 = (mixed - disc) / (2.0 * det_i);
    let k2 = (mixed + disc) / (2.0 * det_i);
    if k1 <= k2 {
        (k1, k2)
    } else {
        (k2, k1)
    }
}

/// Deterministic orthonormal completion of a unit vector (D = 3).
pub fn tangent_basis3(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Signed shoelace area of a planar polygon given as (x, y) pairs.
pub fn shoelace_area(loop_xy: &[(f64, f64)]) -> f64 {
    let n = loop_xy.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = loop_xy[i];
        let (x1, y1) = loop_xy[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_measure_and_normal() {
        let e = Element::<3>::new([
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ]);
        assert!((e.measure() - 0.5).abs() < 1e-15);
        assert!((e.normal() - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn segment_normal_is_clockwise_rotation() {
        let e = Element::<2>::new([Vector2::new(-1.0, 2.0), Vector2::new(1.0, 2.0)]);
        // Edge along +x rotated by -90 degrees: (e_y, -e_x) = (0, -1).
        assert!((e.normal() - Vector2::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn point_triangle_distance_regions() {
        let a = Vector3::new(0.0, 0.0, 0.0);
        let b = Vector3::new(2.0, 0.0, 0.0);
        let c = Vector3::new(0.0, 2.0, 0.0);
        // Above interior.
        let d = point_triangle_distance_sq(&a, &b, &c, &Vector3::new(0.5, 0.5, 3.0)).sqrt();
        assert!((d - 3.0).abs() < 1e-12);
        // Nearest to vertex b.
        let d = point_triangle_distance_sq(&a, &b, &c, &Vector3::new(4.0, -1.0, 0.0)).sqrt();
        assert!((d - 5.0_f64.sqrt()).abs() < 1e-12);
        // Nearest to edge bc.
        let d = point_triangle_distance_sq(&a, &b, &c, &Vector3::new(2.0, 2.0, 0.0)).sqrt();
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ray_crossing_counts_for_square() {
        let quad = [
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        let dir = Vector2::new(0.0123, 1.0);
        let inside = Vector2::new(0.4, 0.5);
        let outside = Vector2::new(1.7, 0.5);
        let mut hits_in = 0;
        let mut hits_out = 0;
        for i in 0..4 {
            let e = Element::<2>::new([quad[i], quad[(i + 1) % 4]]);
            if e.ray_crosses(&inside, &dir) {
                hits_in += 1;
            }
            if e.ray_crosses(&outside, &dir) {
                hits_out += 1;
            }
        }
        assert_eq!(hits_in % 2, 1);
        assert_eq!(hits_out % 2, 0);
    }

    #[test]
    fn eigen_pair_recovers_sphere_curvatures() {
        // Quadric h = -(u^2+v^2)/(2R) on a sphere of radius 2 gives
        // II = I/R with the sign convention used by the curvature module.
        let r: f64 = 2.0;
        let ii = [[1.0 / r, 0.0], [0.0, 1.0 / r]];
        let i = [[1.0, 0.0], [0.0, 1.0]];
        let (k1, k2) = generalized_eigen_2x2(ii, i);
        assert!((k1 - 0.5).abs() < 1e-14 && (k2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shoelace_signed() {
        let ccw = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)];
        assert!((shoelace_area(&ccw) - 2.0).abs() < 1e-15);
        let cw: Vec<_> = ccw.iter().rev().cloned().collect();
        assert!((shoelace_area(&cw) + 2.0).abs() < 1e-15);
    }
}
