//! Point queries against a validated mesh: enclosed-region membership by
//! ray parity and Euclidean distance to the surface. Both are backed by
//! cell grids built once per mesh.
//!
//! The parity ray is vertical with a tiny fixed horizontal tilt, so that
//! structured query points (mesh vertices shifted inward, lattice nodes) do
//! not hit vertices or edges of lat-long meshes head on.

use super::HalfSpaceMesh;
use crate::geom::Point;
use crate::grid::CellGrid;

const MAX_CELLS: usize = 1 << 21;
const RAY_TILT: [f64; 2] = [1.234567e-4, 2.3456789e-4];

pub struct MeshQueries<'m, const D: usize> {
    mesh: &'m HalfSpaceMesh<D>,
    /// Elements binned by the horizontal footprint of their bounding box
    /// (inflated by the ray tilt) for parity tests.
    column_grid: ColumnGrid<D>,
    /// Elements binned in full ambient space for distance queries.
    space_grid: CellGrid<D>,
    ray_dir: Point<D>,
}

/// Horizontal-projection grid; one dimension lower than the ambient space.
struct ColumnGrid<const D: usize> {
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    cells: Vec<Vec<u32>>,
}

impl<const D: usize> ColumnGrid<D> {
    fn build(mesh: &HalfSpaceMesh<D>, cell_hint: f64) -> Self {
        let (lo, hi) = mesh.bbox();
        let h = D - 1;
        let mut cell = cell_hint.max(1e-12);
        let span: Vec<f64> = (0..h).map(|k| (hi[k] - lo[k]).max(0.0)).collect();
        loop {
            let total: usize = span
                .iter()
                .map(|s| (s / cell).ceil() as usize + 1)
                .product();
            if total <= MAX_CELLS {
                break;
            }
            cell *= 1.5;
        }
        let mut dims = [1usize; 2];
        for k in 0..h {
            dims[k] = (span[k] / cell).ceil() as usize + 1;
        }
        let total: usize = dims[..h].iter().product();
        let mut grid = Self {
            origin: [lo[0], if h > 1 { lo[1] } else { 0.0 }],
            cell,
            dims,
            cells: vec![Vec::new(); total],
        };
        let height_span = hi[D - 1] - lo[D - 1];
        let inflate = RAY_TILT.iter().fold(0.0f64, |a, &b| a.max(b)) * height_span + 1e-12;
        for e in 0..mesh.element_count() {
            let (elo, ehi) = mesh.element(e).bbox();
            grid.insert(&elo, &ehi, inflate, e as u32, h);
        }
        grid
    }

    fn insert(&mut self, lo: &Point<D>, hi: &Point<D>, inflate: f64, id: u32, h: usize) {
        let mut clo = [0usize; 2];
        let mut chi = [0usize; 2];
        for k in 0..h {
            clo[k] = (((lo[k] - inflate) - self.origin[k]) / self.cell)
                .floor()
                .clamp(0.0, (self.dims[k] - 1) as f64) as usize;
            chi[k] = (((hi[k] + inflate) - self.origin[k]) / self.cell)
                .floor()
                .clamp(0.0, (self.dims[k] - 1) as f64) as usize;
        }
        match h {
            1 => {
                for i in clo[0]..=chi[0] {
                    self.cells[i].push(id);
                }
            }
            2 => {
                for i in clo[0]..=chi[0] {
                    for j in clo[1]..=chi[1] {
                        self.cells[i * self.dims[1] + j].push(id);
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    fn candidates(&self, p: &Point<D>, h: usize) -> &[u32] {
        let mut c = [0usize; 2];
        for k in 0..h {
            c[k] = ((p[k] - self.origin[k]) / self.cell)
                .floor()
                .clamp(0.0, (self.dims[k] - 1) as f64) as usize;
        }
        match h {
            1 => &self.cells[c[0]],
            2 => &self.cells[c[0] * self.dims[1] + c[1]],
            _ => unreachable!(),
        }
    }
}

impl<'m, const D: usize> MeshQueries<'m, D> {
    pub fn new(mesh: &'m HalfSpaceMesh<D>) -> Self {
        let cell_hint = mesh.max_edge_length().max(1e-12);
        let column_grid = ColumnGrid::build(mesh, cell_hint);
        let (lo, hi) = mesh.bbox();
        let mut space_grid = CellGrid::<D>::fitted(lo, hi, cell_hint, MAX_CELLS);
        for e in 0..mesh.element_count() {
            let (elo, ehi) = mesh.element(e).bbox();
            space_grid.insert_box(&elo, &ehi, e as u32);
        }
        let mut ray_dir = Point::<D>::zeros();
        for k in 0..D - 1 {
            ray_dir[k] = RAY_TILT[k];
        }
        ray_dir[D - 1] = 1.0;
        Self {
            mesh,
            column_grid,
            space_grid,
            ray_dir,
        }
    }

    pub fn mesh(&self) -> &HalfSpaceMesh<D> {
        self.mesh
    }

    /// Whether `p` lies inside the enclosed region (strictly above the
    /// hyperplane and with odd crossing parity along the tilted ray).
    pub fn inside(&self, p: &Point<D>) -> bool {
        if p[D - 1] <= 0.0 {
            return false;
        }
        let mut crossings = 0usize;
        for &e in self.column_grid.candidates(p, D - 1) {
            if self.mesh.element(e as usize).ray_crosses(p, &self.ray_dir) {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }

    /// Euclidean distance from `p` to the surface.
    pub fn distance_to_surface(&self, p: &Point<D>) -> f64 {
        let mut best = f64::INFINITY;
        self.space_grid.shell_search(
            p,
            &mut |e| {
                let d = self.mesh.element(e as usize).distance(p);
                if d < best {
                    best = d;
                }
            },
            &mut |guaranteed| best <= guaranteed,
        );
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::generators::{find_recipe, GeneratedMesh, ShapeParams};
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn hemisphere(res: u32) -> HalfSpaceMesh<3> {
        let p = ShapeParams {
            theta: PI / 2.0,
            resolution: res,
            ..Default::default()
        };
        match find_recipe("cap").unwrap().build(&p).unwrap() {
            GeneratedMesh::Surface(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn inside_test_matches_analytic_ball() {
        let mesh = hemisphere(4);
        let q = MeshQueries::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut wrong = 0;
        for _ in 0..20_000 {
            let p = Vector3::new(
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-0.1..1.2),
            );
            let truth = p.norm() < 1.0 && p[2] > 0.0;
            // Skip points hugging the surface where discretization decides.
            if (p.norm() - 1.0).abs() < 5e-3 || p[2].abs() < 1e-9 {
                continue;
            }
            if q.inside(&p) != truth {
                wrong += 1;
            }
        }
        assert_eq!(wrong, 0);
    }

    #[test]
    fn distance_to_surface_matches_analytic() {
        let mesh = hemisphere(4);
        let q = MeshQueries::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2_000 {
            let p = Vector3::new(
                rng.gen_range(-0.8..0.8),
                rng.gen_range(-0.8..0.8),
                rng.gen_range(0.05..0.9),
            );
            if p.norm() >= 0.98 {
                continue;
            }
            let truth = 1.0 - p.norm();
            let got = q.distance_to_surface(&p);
            assert!(
                (got - truth).abs() < 3e-3,
                "p={p:?} got {got} truth {truth}"
            );
        }
        // A far query point.
        let far = Vector3::new(9.0, 0.0, 4.0);
        let truth = far.norm() - 1.0;
        assert!((q.distance_to_surface(&far) - truth).abs() < 5e-3);
    }

    #[test]
    fn axis_point_parity_is_robust() {
        // The pole vertex sits exactly on the vertical through the origin;
        // the tilted ray must still count one crossing.
        let mesh = hemisphere(3);
        let q = MeshQueries::new(&mesh);
        assert!(q.inside(&Vector3::new(0.0, 0.0, 0.5)));
        assert!(!q.inside(&Vector3::new(0.0, 0.0, 1.5)));
    }
}
