//! Uniform cell grids over points or element bounding boxes, with expanding
//! shell traversal. These back the nearest-sample, surface-distance, and
//! ray-parity queries; all traversal orders are deterministic.

use crate::geom::Point;

#[derive(Debug, Clone)]
pub struct CellGrid<const D: usize> {
    origin: Point<D>,
    top: Point<D>,
    cell: f64,
    dims: [usize; D],
    cells: Vec<Vec<u32>>,
}

impl<const D: usize> CellGrid<D> {
    /// Builds a grid covering `[lo, hi]`, refining towards `preferred_cell`
    /// but never exceeding `max_cells` cells. Multi-component meshes can
    /// span boxes that are huge relative to the sample spacing, so the cell
    /// edge is fitted to the box rather than trusted blindly.
    pub fn fitted(lo: Point<D>, hi: Point<D>, preferred_cell: f64, max_cells: usize) -> Self {
        assert!(preferred_cell > 0.0);
        let mut cell = preferred_cell;
        loop {
            let mut total = 1usize;
            for k in 0..D {
                let span = (hi[k] - lo[k]).max(0.0);
                let n = (span / cell).ceil() as usize + 1;
                total = total.saturating_mul(n);
            }
            if total <= max_cells {
                break;
            }
            cell *= 1.5;
        }
        let mut dims = [1usize; D];
        let mut total = 1usize;
        for k in 0..D {
            let span = (hi[k] - lo[k]).max(0.0);
            dims[k] = (span / cell).ceil() as usize + 1;
            total = total.saturating_mul(dims[k]);
        }
        Self {
            origin: lo,
            top: hi,
            cell,
            dims,
            cells: vec![Vec::new(); total],
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn coords(&self, p: &Point<D>) -> [i64; D] {
        let mut c = [0i64; D];
        for k in 0..D {
            c[k] = ((p[k] - self.origin[k]) / self.cell).floor() as i64;
        }
        c
    }

    fn clamp(&self, c: [i64; D]) -> [usize; D] {
        let mut out = [0usize; D];
        for k in 0..D {
            out[k] = c[k].clamp(0, self.dims[k] as i64 - 1) as usize;
        }
        out
    }

    fn index(&self, c: [usize; D]) -> usize {
        let mut idx = 0usize;
        for k in 0..D {
            idx = idx * self.dims[k] + c[k];
        }
        idx
    }

    /// Euclidean distance from `p` to the grid box (zero inside).
    pub fn distance_to_box(&self, p: &Point<D>) -> f64 {
        let mut acc = 0.0;
        for k in 0..D {
            let gap = (self.origin[k] - p[k]).max(p[k] - self.top[k]).max(0.0);
            acc += gap * gap;
        }
        acc.sqrt()
    }

    pub fn insert_point(&mut self, p: &Point<D>, id: u32) {
        let c = self.clamp(self.coords(p));
        let idx = self.index(c);
        self.cells[idx].push(id);
    }

    /// Registers an id in every cell its box overlaps.
    pub fn insert_box(&mut self, lo: &Point<D>, hi: &Point<D>, id: u32) {
        let clo = self.clamp(self.coords(lo));
        let chi = self.clamp(self.coords(hi));
        let mut cursor = clo;
        loop {
            let idx = self.index(cursor);
            self.cells[idx].push(id);
            let mut k = D;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cursor[k] < chi[k] {
                    cursor[k] += 1;
                    for kk in k + 1..D {
                        cursor[kk] = clo[kk];
                    }
                    break;
                }
            }
        }
    }

    /// Visits ids in shells of increasing Chebyshev radius around `p`.
    ///
    /// After each completed shell, `done` is polled with a lower bound on
    /// the Euclidean distance from `p` to anything not yet visited, and
    /// stops the walk by returning true.
    pub fn shell_search(
        &self,
        p: &Point<D>,
        visit: &mut impl FnMut(u32),
        done: &mut impl FnMut(f64) -> bool,
    ) {
        let center = self.clamp(self.coords(p));
        let d0 = self.distance_to_box(p);
        let max_ring = (0..D)
            .map(|k| center[k].max(self.dims[k] - 1 - center[k]))
            .max()
            .unwrap_or(0) as i64;

        let mut icenter = [0i64; D];
        for k in 0..D {
            icenter[k] = center[k] as i64;
        }
        for ring in 0..=max_ring {
            self.visit_ring(icenter, ring, visit);
            // Everything unvisited has some axis offset > ring from the
            // (clamped) center cell, hence axis gap >= ring * cell on top of
            // the out-of-box gap d0.
            let lateral = ring as f64 * self.cell;
            if done((d0 * d0 + lateral * lateral).sqrt()) {
                return;
            }
        }
    }

    fn visit_ring(&self, center: [i64; D], ring: i64, visit: &mut impl FnMut(u32)) {
        let mut lo = [0i64; D];
        let mut hi = [0i64; D];
        for k in 0..D {
            lo[k] = center[k] - ring;
            hi[k] = center[k] + ring;
        }
        let mut cursor = lo;
        'outer: loop {
            let on_shell = (0..D).any(|k| cursor[k] == lo[k] || cursor[k] == hi[k]);
            if on_shell && (0..D).all(|k| cursor[k] >= 0 && cursor[k] < self.dims[k] as i64) {
                let mut c = [0usize; D];
                for k in 0..D {
                    c[k] = cursor[k] as usize;
                }
                for &id in &self.cells[self.index(c)] {
                    visit(id);
                }
            }
            let mut k = D;
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                if cursor[k] < hi[k] {
                    // Jump across the hollow interior along the last axis.
                    let interior = ring > 0
                        && k == D - 1
                        && (0..D - 1).all(|j| cursor[j] != lo[j] && cursor[j] != hi[j])
                        && cursor[k] == lo[k];
                    cursor[k] = if interior { hi[k] } else { cursor[k] + 1 };
                    for kk in k + 1..D {
                        cursor[kk] = lo[kk];
                    }
                    break;
                }
            }
        }
    }

    /// Ids registered in the cell containing `p` (point-in-box queries for
    /// element grids; the boxes were inflated on insertion).
    pub fn cell_candidates(&self, p: &Point<D>) -> &[u32] {
        let c = self.clamp(self.coords(p));
        &self.cells[self.index(c)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn scatter() -> Vec<Vector3<f64>> {
        (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                Vector3::new(t.sin() * 3.0, t.cos() * 2.0, (t * 0.611).sin())
            })
            .collect()
    }

    fn grid_over(pts: &[Vector3<f64>], cell: f64) -> CellGrid<3> {
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in pts {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut grid = CellGrid::<3>::fitted(lo, hi, cell, 1 << 22);
        for (i, p) in pts.iter().enumerate() {
            grid.insert_point(p, i as u32);
        }
        grid
    }

    fn nearest_via_grid(grid: &CellGrid<3>, pts: &[Vector3<f64>], q: &Vector3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        grid.shell_search(
            q,
            &mut |id| {
                best = best.min((pts[id as usize] - q).norm());
            },
            &mut |guaranteed| best <= guaranteed,
        );
        best
    }

    #[test]
    fn shell_search_matches_brute_force() {
        let pts = scatter();
        let grid = grid_over(&pts, 0.5);
        for q in [
            Vector3::new(0.3, -1.2, 0.4),
            Vector3::new(3.5, 2.5, 1.5),   // outside the box
            Vector3::new(-9.0, 0.0, 30.0), // far outside
        ] {
            let brute = pts
                .iter()
                .map(|p| (p - q).norm())
                .fold(f64::INFINITY, f64::min);
            let got = nearest_via_grid(&grid, &pts, &q);
            assert!((got - brute).abs() < 1e-12, "query {q:?}");
        }
    }

    #[test]
    fn box_insertion_covers_query_point() {
        let lo = Vector3::new(0.0, 0.0, 0.0);
        let hi = Vector3::new(10.0, 10.0, 10.0);
        let mut grid = CellGrid::<3>::fitted(lo, hi, 1.0, 1 << 22);
        grid.insert_box(&Vector3::new(2.2, 2.2, 2.2), &Vector3::new(4.8, 3.1, 2.9), 7);
        assert!(grid.cell_candidates(&Vector3::new(3.9, 2.5, 2.5)).contains(&7));
        assert!(grid.cell_candidates(&Vector3::new(8.0, 8.0, 8.0)).is_empty());
    }

    #[test]
    fn cell_budget_coarsens_grid() {
        let lo = Vector3::new(0.0, 0.0, 0.0);
        let hi = Vector3::new(100.0, 100.0, 100.0);
        let grid = CellGrid::<3>::fitted(lo, hi, 0.01, 1000);
        assert!(grid.cell_size() > 0.01);
    }
}
