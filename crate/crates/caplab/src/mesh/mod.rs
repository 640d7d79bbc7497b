//! Discrete hypersurfaces in the closed upper half-space.
//!
//! A mesh is a consistently oriented segment polyline (`D = 2`, curves in
//! the plane) or triangle surface (`D = 3`) whose boundary lies exactly on
//! the hyperplane `{<x, E> = 0}` and whose normals point out of the enclosed
//! region. Validation happens once at construction; everything downstream
//! treats the mesh as immutable.

pub mod curvature;
pub mod io;
pub mod queries;
pub mod region;

use crate::geom::{Element, Point};
use thiserror::Error;

/// Relative factor for the default hyperplane tolerance.
pub const TOL_PLANE_REL: f64 = 1e-9;

/// Dihedral turn along the contact line above which a corner warning is
/// emitted (the theory assumes a smooth contact line).
pub const SHARP_CORNER_TURN_DEG: f64 = 30.0;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {vertex} lies below the hyperplane (height {height:.3e})")]
    BelowHyperplane { vertex: usize, height: f64 },
    #[error("boundary vertex {vertex} is off the hyperplane (height {height:.3e})")]
    BoundaryNotOnPlane { vertex: usize, height: f64 },
    #[error("non-manifold connectivity: {0}")]
    NonManifold(String),
    #[error("inconsistent orientation: {0}")]
    InconsistentOrientation(String),
    #[error("degenerate element {0}")]
    DegenerateElement(usize),
    #[error("vertex {0} is not referenced by any element")]
    UnusedVertex(usize),
    #[error("element {element} references missing vertex {vertex}")]
    IndexOutOfRange { element: usize, vertex: usize },
    #[error("mesh has no elements")]
    Empty,
    #[error("open boundary chain does not terminate on the hyperplane")]
    OpenBoundaryChain,
    #[error("requested components overlap: {0}")]
    OverlappingComponents(String),
}

/// Vertex indices forming either open boundary chains (curves) or closed
/// boundary loops (surfaces), oriented as induced by the elements.
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    pub vertices: Vec<u32>,
    pub closed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MeshWarnings {
    /// Boundary vertices where the contact line turns more sharply than the
    /// configured corner threshold.
    pub sharp_corners: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct HalfSpaceMesh<const D: usize> {
    vertices: Vec<Point<D>>,
    elements: Vec<[u32; D]>,
    tol_plane: f64,
    boundary_flag: Vec<bool>,
    boundary_loops: Vec<BoundaryLoop>,
    component_of: Vec<u32>,
    component_count: usize,
    vertex_elements: Vec<Vec<u32>>,
    warnings: MeshWarnings,
}

impl<const D: usize> HalfSpaceMesh<D> {
    /// Validates raw geometry and builds the mesh. `tol_plane` of `None`
    /// uses `TOL_PLANE_REL` times the bounding-box diagonal.
    pub fn build(
        vertices: Vec<Point<D>>,
        elements: Vec<[u32; D]>,
        tol_plane: Option<f64>,
    ) -> Result<Self, MeshError> {
        assert!(D == 2 || D == 3, "ambient dimension must be 2 or 3");
        if elements.is_empty() {
            return Err(MeshError::Empty);
        }
        for (ei, el) in elements.iter().enumerate() {
            for &v in el {
                if v as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        element: ei,
                        vertex: v as usize,
                    });
                }
            }
            for i in 0..D {
                for j in i + 1..D {
                    if el[i] == el[j] {
                        return Err(MeshError::DegenerateElement(ei));
                    }
                }
            }
        }

        let (lo, hi) = bbox(&vertices);
        let diag = (hi - lo).norm();
        let tol = tol_plane.unwrap_or(TOL_PLANE_REL * diag.max(1e-300));

        let mut vertices = vertices;
        let mut boundary_flag = vec![false; vertices.len()];
        for (vi, v) in vertices.iter_mut().enumerate() {
            let h = v[D - 1];
            if h < -tol {
                return Err(MeshError::BelowHyperplane {
                    vertex: vi,
                    height: h,
                });
            }
            if h.abs() <= tol {
                v[D - 1] = 0.0;
                boundary_flag[vi] = true;
            }
        }

        let mut vertex_elements = vec![Vec::new(); vertices.len()];
        for (ei, el) in elements.iter().enumerate() {
            for &v in el {
                vertex_elements[v as usize].push(ei as u32);
            }
        }
        if let Some(vi) = vertex_elements.iter().position(|es| es.is_empty()) {
            return Err(MeshError::UnusedVertex(vi));
        }

        let boundary_loops = match D {
            3 => extract_surface_boundary(&vertices, &elements, &boundary_flag)?,
            2 => extract_curve_boundary(&vertices, &elements, &vertex_elements, &boundary_flag)?,
            _ => unreachable!(),
        };

        let component_of = label_components(vertices.len(), &elements);
        let component_count = component_of.iter().map(|&c| c as usize + 1).max().unwrap_or(0);

        let mut mesh = Self {
            vertices,
            elements,
            tol_plane: tol,
            boundary_flag,
            boundary_loops,
            component_of,
            component_count,
            vertex_elements,
            warnings: MeshWarnings::default(),
        };

        // A consistently oriented closed boundary with inward normals shows
        // up as negative enclosed volume.
        if mesh.signed_volume() < 0.0 {
            return Err(MeshError::InconsistentOrientation(
                "induced normals point into the enclosed region".into(),
            ));
        }
        mesh.warnings = mesh.collect_warnings();
        Ok(mesh)
    }

    pub fn surface_dim(&self) -> usize {
        D - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self) -> &[Point<D>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[u32; D]] {
        &self.elements
    }

    pub fn vertex(&self, v: u32) -> &Point<D> {
        &self.vertices[v as usize]
    }

    pub fn element(&self, e: usize) -> Element<D> {
        let idx = self.elements[e];
        let mut verts = [Point::<D>::zeros(); D];
        for (k, &v) in idx.iter().enumerate() {
            verts[k] = self.vertices[v as usize];
        }
        Element::new(verts)
    }

    pub fn tol_plane(&self) -> f64 {
        self.tol_plane
    }

    pub fn is_boundary_vertex(&self, v: u32) -> bool {
        self.boundary_flag[v as usize]
    }

    pub fn boundary_vertices(&self) -> Vec<u32> {
        (0..self.vertices.len() as u32)
            .filter(|&v| self.boundary_flag[v as usize])
            .collect()
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.boundary_loops
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary_loops.is_empty()
    }

    pub fn component_of(&self) -> &[u32] {
        &self.component_of
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn elements_at(&self, v: u32) -> &[u32] {
        &self.vertex_elements[v as usize]
    }

    pub fn warnings(&self) -> &MeshWarnings {
        &self.warnings
    }

    pub fn bbox(&self) -> (Point<D>, Point<D>) {
        bbox(&self.vertices)
    }

    /// Total surface measure.
    pub fn surface_measure(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element(e).measure()).sum()
    }

    /// Lumped vertex weights: each element spreads its measure uniformly
    /// over its vertices. Sums to the surface measure exactly.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        let share = 1.0 / D as f64;
        for e in 0..self.elements.len() {
            let m = self.element(e).measure() * share;
            for &v in &self.elements[e] {
                w[v as usize] += m;
            }
        }
        w
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut best: f64 = 0.0;
        for el in &self.elements {
            for i in 0..D {
                for j in i + 1..D {
                    let l = (self.vertices[el[i] as usize] - self.vertices[el[j] as usize]).norm();
                    best = best.max(l);
                }
            }
        }
        best
    }

    /// Signed enclosed volume via the flux of the vertical field `x_D E`
    /// through the surface; the wetted region contributes nothing because
    /// the field vanishes on the hyperplane.
    pub fn signed_volume(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| {
                let el = self.element(e);
                let nu = el.normal();
                el.measure() * nu[D - 1] * el.centroid()[D - 1]
            })
            .sum()
    }

    /// One-ring vertex neighbors, deduplicated, in deterministic order.
    pub fn one_ring(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        for &e in &self.vertex_elements[v as usize] {
            for &u in &self.elements[e as usize] {
                if u != v && !out.contains(&u) {
                    out.push(u);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Vertices within graph distance `depth` of `v`, excluding `v`.
    pub fn ring_neighborhood(&self, v: u32, depth: usize) -> Vec<u32> {
        let mut seen = vec![v];
        let mut frontier = vec![v];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &u in &frontier {
                for w in self.one_ring(u) {
                    if !seen.contains(&w) {
                        seen.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen.retain(|&u| u != v);
        seen.sort_unstable();
        seen
    }

    /// Returns a translated copy (horizontal translations preserve all mesh
    /// invariants; vertical ones must keep the boundary on the plane).
    pub fn translated(&self, offset: &Point<D>) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(|v| v + offset).collect();
        Self::build(vertices, self.elements.clone(), Some(self.tol_plane))
    }

    /// Returns a copy scaled by `s > 0` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self, MeshError> {
        assert!(s > 0.0);
        let vertices = self.vertices.iter().map(|v| v * s).collect();
        Self::build(vertices, self.elements.clone(), Some(self.tol_plane * s))
    }

    fn collect_warnings(&self) -> MeshWarnings {
        let mut sharp = Vec::new();
        let threshold = SHARP_CORNER_TURN_DEG.to_radians();
        for lp in &self.boundary_loops {
            if !lp.closed || lp.vertices.len() < 3 {
                continue;
            }
            let n = lp.vertices.len();
            for i in 0..n {
                let a = self.vertices[lp.vertices[(i + n - 1) % n] as usize];
                let b = self.vertices[lp.vertices[i] as usize];
                let c = self.vertices[lp.vertices[(i + 1) % n] as usize];
                let u = (b - a).normalize();
                let v = (c - b).normalize();
                let turn = u.dot(&v).clamp(-1.0, 1.0).acos();
                if turn > threshold {
                    sharp.push(lp.vertices[i]);
                }
            }
        }
        MeshWarnings { sharp_corners: sharp }
    }
}

fn bbox<const D: usize>(vertices: &[Point<D>]) -> (Point<D>, Point<D>) {
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        for k in 0..D {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

fn label_components<const D: usize>(n_vertices: usize, elements: &[[u32; D]]) -> Vec<u32> {
    let mut parent: Vec<u32> = (0..n_vertices as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for el in elements {
        let root = find(&mut parent, el[0]);
        for &v in &el[1..] {
            let r = find(&mut parent, v);
            parent[r as usize] = root;
        }
    }
    let mut label = vec![u32::MAX; n_vertices];
    let mut next = 0u32;
    for v in 0..n_vertices as u32 {
        let r = find(&mut parent, v);
        if label[r as usize] == u32::MAX {
            label[r as usize] = next;
            next += 1;
        }
        label[v as usize] = label[r as usize];
    }
    label
}

/// Boundary extraction and manifold/orientation checks for triangle meshes.
/// Only invoked with `D = 3`.
fn extract_surface_boundary<const D: usize>(
    vertices: &[Point<D>],
    elements: &[[u32; D]],
    boundary_flag: &[bool],
) -> Result<Vec<BoundaryLoop>, MeshError> {
    use std::collections::HashMap;
    debug_assert_eq!(D, 3);
    // Directed edge -> multiplicity.
    let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
    for el in elements {
        for k in 0..D {
            let a = el[k];
            let b = el[(k + 1) % D];
            *directed.entry((a, b)).or_insert(0) += 1;
        }
    }
    let mut boundary_next: HashMap<u32, u32> = HashMap::new();
    for (&(a, b), &cnt) in &directed {
        let rev = directed.get(&(b, a)).copied().unwrap_or(0);
        let total = cnt + rev;
        if total > 2 {
            return Err(MeshError::NonManifold(format!(
                "edge ({a}, {b}) used {total} times"
            )));
        }
        if cnt == 2 {
            // Same direction twice: a flipped patch, not a branching edge.
            return Err(MeshError::InconsistentOrientation(format!(
                "edge ({a}, {b}) traversed twice in the same direction"
            )));
        }
        if cnt == 1 && rev == 1 {
            continue; // interior edge, consistently oriented
        }
        // cnt == 1, rev == 0: boundary edge, keeps its triangle's direction.
        for &v in &[a, b] {
            if !boundary_flag[v as usize] {
                return Err(MeshError::BoundaryNotOnPlane {
                    vertex: v as usize,
                    height: vertices[v as usize][D - 1],
                });
            }
        }
        if boundary_next.insert(a, b).is_some() {
            return Err(MeshError::NonManifold(format!(
                "boundary branches at vertex {a}"
            )));
        }
    }

    let mut loops = Vec::new();
    let mut visited: HashMap<u32, bool> = HashMap::new();
    let mut starts: Vec<u32> = boundary_next.keys().copied().collect();
    starts.sort_unstable();
    for start in starts {
        if visited.get(&start).copied().unwrap_or(false) {
            continue;
        }
        let mut cycle = vec![start];
        visited.insert(start, true);
        let mut cur = boundary_next[&start];
        while cur != start {
            cycle.push(cur);
            visited.insert(cur, true);
            cur = *boundary_next
                .get(&cur)
                .ok_or(MeshError::OpenBoundaryChain)?;
        }
        loops.push(BoundaryLoop {
            vertices: cycle,
            closed: true,
        });
    }
    Ok(loops)
}

/// Chain extraction for polylines: every vertex belongs to at most two
/// segments: chains terminate on the hyperplane, loops are closed curves.
/// Only invoked with `D = 2`.
fn extract_curve_boundary<const D: usize>(
    vertices: &[Point<D>],
    elements: &[[u32; D]],
    vertex_elements: &[Vec<u32>],
    boundary_flag: &[bool],
) -> Result<Vec<BoundaryLoop>, MeshError> {
    debug_assert_eq!(D, 2);
    for (vi, es) in vertex_elements.iter().enumerate() {
        if es.len() > 2 {
            return Err(MeshError::NonManifold(format!(
                "vertex {vi} joins {} segments",
                es.len()
            )));
        }
        if es.len() == 2 {
            let heads = es
                .iter()
                .filter(|&&e| elements[e as usize][0] == vi as u32)
                .count();
            if heads != 1 {
                return Err(MeshError::InconsistentOrientation(format!(
                    "segments disagree at vertex {vi}"
                )));
            }
        }
    }

    let mut next_of: Vec<Option<u32>> = vec![None; vertices.len()];
    let mut has_prev = vec![false; vertices.len()];
    for el in elements {
        next_of[el[0] as usize] = Some(el[1]);
        has_prev[el[1] as usize] = true;
    }

    let mut loops = Vec::new();
    let mut visited = vec![false; vertices.len()];
    // Open chains first: start at vertices with no predecessor.
    for start in 0..vertices.len() as u32 {
        if visited[start as usize] || has_prev[start as usize] {
            continue;
        }
        if next_of[start as usize].is_none() {
            continue;
        }
        let mut chain = vec![start];
        visited[start as usize] = true;
        let mut cur = start;
        while let Some(nxt) = next_of[cur as usize] {
            chain.push(nxt);
            visited[nxt as usize] = true;
            cur = nxt;
        }
        for &end in &[chain[0], *chain.last().unwrap()] {
            if !boundary_flag[end as usize] {
                return Err(MeshError::BoundaryNotOnPlane {
                    vertex: end as usize,
                    height: vertices[end as usize][D - 1],
                });
            }
        }
        loops.push(BoundaryLoop {
            vertices: chain,
            closed: false,
        });
    }
    // Remaining unvisited vertices belong to closed loops.
    for start in 0..vertices.len() as u32 {
        if visited[start as usize] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start as usize] = true;
        let mut cur = next_of[start as usize].ok_or(MeshError::OpenBoundaryChain)?;
        while cur != start {
            cycle.push(cur);
            visited[cur as usize] = true;
            cur = next_of[cur as usize].ok_or(MeshError::OpenBoundaryChain)?;
        }
        loops.push(BoundaryLoop {
            vertices: cycle,
            closed: true,
        });
    }
    // For curves, `boundary_loops` holds only the open chains (the contact
    // "line" is their endpoint set); closed loops have no contact.
    Ok(loops.into_iter().filter(|l| !l.closed).collect())
}
