//! Mesh generators behind a name-keyed registry: exact caps and spheres,
//! disjoint unions, normally perturbed caps, and the cap-plus-far-speck
//! probe. Generators are deterministic for a fixed parameter set and seed.

use super::{shifted_contact_angle, ShapeError};
use crate::gauge::Gauge;
use crate::geom::Point;
use crate::mesh::HalfSpaceMesh;
use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters understood by the generator registry. Unused fields are
/// ignored by recipes that do not need them.
#[derive(Debug, Clone)]
pub struct ShapeParams {
    /// Surface dimension n (1 = planar curves, 2 = surfaces in space).
    pub dim: usize,
    pub theta: f64,
    pub radius: f64,
    /// Wulff centers ("o" points) of the requested balls, ambient coords.
    pub centers: Vec<Vec<f64>>,
    pub resolution: u32,
    pub amplitude: f64,
    pub bump_count: usize,
    /// Angular bump width (radians on the generating sphere).
    pub bump_width: f64,
    /// Angular width of the second-order cutoff that freezes the contact
    /// angle near the boundary.
    pub cutoff_width: f64,
    pub seed: u64,
    /// Probe speck radius as a fraction of the cap radius.
    pub probe_radius_factor: f64,
    /// Probe speck center offset from the cap center; empty means the
    /// default placement (>= 10R away, >= 5R high).
    pub probe_offset: Vec<f64>,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            dim: 2,
            theta: std::f64::consts::FRAC_PI_2,
            radius: 1.0,
            centers: vec![],
            resolution: 4,
            amplitude: 0.0,
            bump_count: 6,
            bump_width: 0.35,
            cutoff_width: 0.2,
            seed: 0,
            probe_radius_factor: 0.02,
            probe_offset: vec![],
        }
    }
}

/// A generated mesh in either ambient dimension.
#[derive(Debug, Clone)]
pub enum GeneratedMesh {
    Curve(HalfSpaceMesh<2>),
    Surface(HalfSpaceMesh<3>),
}

impl GeneratedMesh {
    pub fn save(&self, path: &std::path::Path) -> Result<(), crate::mesh::MeshError> {
        match self {
            GeneratedMesh::Curve(m) => crate::mesh::io::save_csv(m, path),
            GeneratedMesh::Surface(m) => crate::mesh::io::save_off(m, path),
        }
    }

    pub fn surface_dim(&self) -> usize {
        match self {
            GeneratedMesh::Curve(_) => 1,
            GeneratedMesh::Surface(_) => 2,
        }
    }
}

/// One ball to mesh: Wulff center, radius, angular resolution.
#[derive(Debug, Clone)]
struct Patch {
    center: Vec<f64>,
    radius: f64,
    resolution: u32,
}

/// One strategy in the generator registry.
pub trait ShapeRecipe: Sync + Send {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn build(&self, params: &ShapeParams) -> Result<GeneratedMesh, ShapeError>;
}

struct CapRecipe;
struct SphereRecipe;
struct UnionRecipe;
struct PerturbedCapRecipe;
struct ProbeRecipe;

static RECIPES: &[&dyn ShapeRecipe] = &[
    &CapRecipe,
    &SphereRecipe,
    &UnionRecipe,
    &PerturbedCapRecipe,
    &ProbeRecipe,
];

pub fn registry() -> &'static [&'static dyn ShapeRecipe] {
    RECIPES
}

pub fn find_recipe(name: &str) -> Option<&'static dyn ShapeRecipe> {
    RECIPES.iter().copied().find(|r| r.name() == name)
}

impl ShapeRecipe for CapRecipe {
    fn name(&self) -> &'static str {
        "cap"
    }
    fn summary(&self) -> &'static str {
        "single ball meeting the hyperplane at the contact angle (cap, truncated ball, or detached sphere depending on the center height)"
    }
    fn build(&self, p: &ShapeParams) -> Result<GeneratedMesh, ShapeError> {
        let centers = validated_centers(p, Some(1))?;
        let patches = equal_patches(p, &centers);
        build_patches(p, &patches, |_, _| 1.0)
    }
}

impl ShapeRecipe for SphereRecipe {
    fn name(&self) -> &'static str {
        "sphere"
    }
    fn summary(&self) -> &'static str {
        "full sphere given by its Euclidean center (must not cross the hyperplane)"
    }
    fn build(&self, p: &ShapeParams) -> Result<GeneratedMesh, ShapeError> {
        let mut centers = validated_centers(p, Some(1))?;
        for c in &mut centers {
            let h = *c.last().unwrap();
            if h < p.radius {
                return Err(ShapeError::InvalidParam(format!(
                    "sphere center height {h} < radius {}",
                    p.radius
                )));
            }
            // Wulff-center form of the Euclidean center.
            *c.last_mut().unwrap() = h + p.radius * p.theta.cos();
        }
        let patches = equal_patches(p, &centers);
        build_patches(p, &patches, |_, _| 1.0)
    }
}

impl ShapeRecipe for UnionRecipe {
    fn name(&self) -> &'static str {
        "caps"
    }
    fn summary(&self) -> &'static str {
        "disjoint union of equal-radius balls at the given centers"
    }
    fn build(&self, p: &ShapeParams) -> Result<GeneratedMesh, ShapeError> {
        if p.centers.is_empty() {
            return Err(ShapeError::InvalidParam(
                "union generator needs at least one center".into(),
            ));
        }
        let centers = validated_centers(p, None)?;
        let patches = equal_patches(p, &centers);
        build_patches(p, &patches, |_, _| 1.0)
    }
}

impl ShapeRecipe for PerturbedCapRecipe {
    fn name(&self) -> &'static str {
        "perturbed-cap"
    }
    fn summary(&self) -> &'static str {
        "cap displaced along the radial direction by smooth random bumps that vanish to second order at the contact line"
    }
    fn build(&self, p: &ShapeParams) -> Result<GeneratedMesh, ShapeError> {
        let centers = validated_centers(p, Some(1))?;
        if p.amplitude < 0.0 {
            return Err(ShapeError::InvalidParam("amplitude must be >= 0".into()));
        }
        if p.amplitude >= 0.5 {
            return Err(ShapeError::InvalidParam(
                "amplitude >= 0.5 would risk self-intersection".into(),
            ));
        }
        let patches = equal_patches(p, &centers);
        let bumps = BumpField::seeded(p);
        let amplitude = p.amplitude;
        build_patches(p, &patches, move |phi_frac, dir| {
            1.0 + amplitude * bumps.eval(phi_frac, dir)
        })
    }
}

impl ShapeRecipe for ProbeRecipe {
    fn name(&self) -> &'static str {
        "probe"
    }
    fn summary(&self) -> &'static str {
        "cap plus a far-away speck sphere: large n-deficit, small sub-critical deficits"
    }
    fn build(&self, p: &ShapeParams) -> Result<GeneratedMesh, ShapeError> {
        let centers = validated_centers(p, Some(1))?;
        let base = centers[0].clone();
        let r_small = p.probe_radius_factor * p.radius;
        if r_small <= 0.0 {
            return Err(ShapeError::InvalidParam(
                "probe radius factor must be positive".into(),
            ));
        }
        let d = p.dim + 1;
        let mut offset = vec![0.0; d];
        if p.probe_offset.is_empty() {
            offset[0] = 12.0 * p.radius;
            offset[d - 1] = 5.0 * p.radius;
        } else {
            if p.probe_offset.len() != d {
                return Err(ShapeError::InvalidParam(format!(
                    "probe offset needs {d} coordinates"
                )));
            }
            offset.copy_from_slice(&p.probe_offset);
        }
        let horizontal: f64 = offset[..d - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
        if horizontal < 10.0 * p.radius || offset[d - 1] < 5.0 * p.radius {
            return Err(ShapeError::InvalidParam(
                "probe speck must sit >= 10R away horizontally and >= 5R high".into(),
            ));
        }
        let mut speck = base.clone();
        for k in 0..d {
            speck[k] += offset[k];
        }
        // Wulff-center form of the speck's Euclidean center.
        speck[d - 1] += r_small * p.theta.cos();
        let patches = vec![
            Patch {
                center: base,
                radius: p.radius,
                resolution: p.resolution,
            },
            Patch {
                center: speck,
                radius: r_small,
                // The speck only needs enough elements for a stable
                // curvature fit; relative accuracy is scale invariant.
                resolution: p.resolution.min(3),
            },
        ];
        build_patches(p, &patches, |_, _| 1.0)
    }
}

fn validated_centers(p: &ShapeParams, take: Option<usize>) -> Result<Vec<Vec<f64>>, ShapeError> {
    let d = p.dim + 1;
    if p.dim != 1 && p.dim != 2 {
        return Err(ShapeError::InvalidParam(format!(
            "surface dimension must be 1 or 2, got {}",
            p.dim
        )));
    }
    if p.radius <= 0.0 {
        return Err(ShapeError::InvalidParam("radius must be positive".into()));
    }
    let mut centers = if p.centers.is_empty() {
        vec![vec![0.0; d]]
    } else {
        p.centers.clone()
    };
    if let Some(n) = take {
        centers.truncate(n);
    }
    for c in &centers {
        if c.len() != d {
            return Err(ShapeError::InvalidParam(format!(
                "center needs {d} coordinates, got {}",
                c.len()
            )));
        }
        if *c.last().unwrap() < 0.0 {
            return Err(ShapeError::InvalidParam(
                "centers must lie in the closed upper half-space".into(),
            ));
        }
    }
    Ok(centers)
}

fn equal_patches(p: &ShapeParams, centers: &[Vec<f64>]) -> Vec<Patch> {
    centers
        .iter()
        .map(|c| Patch {
            center: c.clone(),
            radius: p.radius,
            resolution: p.resolution,
        })
        .collect()
}

fn build_patches(
    p: &ShapeParams,
    patches: &[Patch],
    radial: impl Fn(f64, &[f64]) -> f64,
) -> Result<GeneratedMesh, ShapeError> {
    check_disjoint(p, patches)?;
    match p.dim {
        1 => {
            let mut asm = Assembly::<2>::default();
            for patch in patches {
                let o = Vector2::new(patch.center[0], patch.center[1]);
                build_patch_2d(p, &o, patch, &radial, &mut asm)?;
            }
            Ok(GeneratedMesh::Curve(asm.finish()?))
        }
        2 => {
            let mut asm = Assembly::<3>::default();
            for patch in patches {
                let o = Vector3::new(patch.center[0], patch.center[1], patch.center[2]);
                build_patch_3d(p, &o, patch, &radial, &mut asm)?;
            }
            Ok(GeneratedMesh::Surface(asm.finish()?))
        }
        _ => unreachable!(),
    }
}

/// Rejects requested balls whose half-space regions overlap. Tangency is
/// allowed; the test checks whether the lens of two intersecting balls
/// reaches above the hyperplane.
fn check_disjoint(p: &ShapeParams, patches: &[Patch]) -> Result<(), ShapeError> {
    let d = p.dim + 1;
    let cos = p.theta.cos();
    let euclid: Vec<Vec<f64>> = patches
        .iter()
        .map(|patch| {
            let mut e = patch.center.clone();
            e[d - 1] -= patch.radius * cos;
            e
        })
        .collect();
    for i in 0..euclid.len() {
        for j in i + 1..euclid.len() {
            let dist: f64 = euclid[i]
                .iter()
                .zip(&euclid[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let (ri, rj) = (patches[i].radius, patches[j].radius);
            if dist >= ri + rj - 1e-12 {
                continue;
            }
            if dist + ri.min(rj) <= ri.max(rj) {
                return Err(ShapeError::Overlap(format!(
                    "ball {j} is contained in ball {i}"
                )));
            }
            // Lens circle: center at fraction t along the axis.
            let t = (dist * dist + ri * ri - rj * rj) / (2.0 * dist * dist);
            let mut off_sq = 0.0;
            for k in 0..d {
                let step = t * (euclid[j][k] - euclid[i][k]);
                off_sq += step * step;
            }
            let r_lens = (ri * ri - off_sq).max(0.0).sqrt();
            let axis_z = (euclid[j][d - 1] - euclid[i][d - 1]) / dist;
            let lens_center_z = euclid[i][d - 1] + t * dist * axis_z;
            let lens_top = lens_center_z + r_lens * (1.0 - axis_z * axis_z).max(0.0).sqrt();
            if lens_top > 1e-12 {
                return Err(ShapeError::Overlap(format!(
                    "balls {i} and {j} intersect above the hyperplane"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct Assembly<const D: usize> {
    vertices: Vec<Point<D>>,
    elements: Vec<[u32; D]>,
}

impl<const D: usize> Assembly<D> {
    fn push_vertex(&mut self, p: Point<D>) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    fn finish(self) -> Result<HalfSpaceMesh<D>, crate::mesh::MeshError> {
        HalfSpaceMesh::build(self.vertices, self.elements, None)
    }
}

/// Lat-long patch around the Wulff center `o`.
///
/// The radial factor receives the polar fraction `phi / phi_max` (1 at the
/// contact line, where it must return exactly 1) and the unit direction
/// from the Euclidean center.
fn build_patch_3d(
    p: &ShapeParams,
    o: &Vector3<f64>,
    patch: &Patch,
    radial: &impl Fn(f64, &[f64]) -> f64,
    asm: &mut Assembly<3>,
) -> Result<(), ShapeError> {
    let gauge =
        Gauge::<3>::new(p.theta).map_err(|e| ShapeError::InvalidParam(e.to_string()))?;
    let r = patch.radius;
    let shift = shifted_contact_angle(o[2], r, &gauge);
    let full = shift.disjoint;
    let phi_max = if full { std::f64::consts::PI } else { shift.angle };
    let center = Vector3::new(o[0], o[1], o[2] - r * gauge.cos_theta());

    let base = 3usize << patch.resolution.min(12);
    let m = ((base as f64) * phi_max / std::f64::consts::FRAC_PI_2)
        .round()
        .max(3.0) as usize;
    let dphi = phi_max / m as f64;
    let sin_max = if phi_max >= std::f64::consts::FRAC_PI_2 {
        1.0
    } else {
        phi_max.sin()
    };
    let slices = ((std::f64::consts::PI * sin_max / dphi).round() as usize).max(8);

    let inner_rings = if full { m - 1 } else { m };
    let point_at = |phi: f64, psi: f64, on_plane: bool| -> Vector3<f64> {
        let dir = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
        let f = radial(phi / phi_max, &dir);
        let mut q = Vector3::new(
            center[0] + r * f * dir[0],
            center[1] + r * f * dir[1],
            center[2] + r * f * dir[2],
        );
        if on_plane {
            q[2] = 0.0;
        }
        q
    };

    let pole_top = asm.push_vertex(point_at(0.0, 0.0, false));
    let mut ring_start = Vec::with_capacity(inner_rings);
    for j in 1..=inner_rings {
        let phi = dphi * j as f64;
        let on_plane = !full && j == m;
        let start = asm.vertices.len() as u32;
        ring_start.push(start);
        for l in 0..slices {
            let psi = 2.0 * std::f64::consts::PI * l as f64 / slices as f64;
            let q = point_at(phi, psi, on_plane);
            asm.push_vertex(q);
        }
    }

    let ls = slices as u32;
    for l in 0..ls {
        asm.elements
            .push([pole_top, ring_start[0] + l, ring_start[0] + (l + 1) % ls]);
    }
    for j in 0..inner_rings - 1 {
        let up = ring_start[j];
        let dn = ring_start[j + 1];
        for l in 0..ls {
            let l1 = (l + 1) % ls;
            asm.elements.push([up + l, dn + l, dn + l1]);
            asm.elements.push([up + l, dn + l1, up + l1]);
        }
    }
    if full {
        let pole_bot = asm.push_vertex(point_at(std::f64::consts::PI, 0.0, false));
        let last = ring_start[inner_rings - 1];
        for l in 0..ls {
            asm.elements.push([pole_bot, last + (l + 1) % ls, last + l]);
        }
    }
    Ok(())
}

fn build_patch_2d(
    p: &ShapeParams,
    o: &Vector2<f64>,
    patch: &Patch,
    radial: &impl Fn(f64, &[f64]) -> f64,
    asm: &mut Assembly<2>,
) -> Result<(), ShapeError> {
    let gauge =
        Gauge::<2>::new(p.theta).map_err(|e| ShapeError::InvalidParam(e.to_string()))?;
    let r = patch.radius;
    let shift = shifted_contact_angle(o[1], r, &gauge);
    let full = shift.disjoint;
    let phi_max = if full { std::f64::consts::PI } else { shift.angle };
    let center = Vector2::new(o[0], o[1] - r * gauge.cos_theta());

    let base = 24usize << patch.resolution.min(12);
    let m = ((base as f64) * phi_max / std::f64::consts::FRAC_PI_2)
        .round()
        .max(8.0) as usize;

    if full {
        // Closed loop, counterclockwise.
        let start = asm.vertices.len() as u32;
        let count = 4 * m;
        for i in 0..count {
            let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            let q = Vector2::new(center[0] + r * t.cos(), center[1] + r * t.sin());
            asm.push_vertex(q);
        }
        for i in 0..count as u32 {
            asm.elements
                .push([start + i, start + (i + 1) % count as u32]);
        }
    } else {
        // Open arc from the +x side over the top to the -x side; segment
        // normals (rotate -90) then point outward.
        let start = asm.vertices.len() as u32;
        let count = 2 * m;
        for i in 0..=count {
            let psi = phi_max * (1.0 - i as f64 / m as f64);
            let on_plane = i == 0 || i == count;
            let dir = [psi.sin(), psi.cos()];
            let f = radial(psi.abs() / phi_max, &dir);
            let mut q = Vector2::new(center[0] + r * f * dir[0], center[1] + r * f * dir[1]);
            if on_plane {
                q[1] = 0.0;
            }
            asm.push_vertex(q);
        }
        for i in 0..count as u32 {
            asm.elements.push([start + i, start + i + 1]);
        }
    }
    Ok(())
}

/// Smooth random bump field on the generating sphere, cut off to vanish to
/// second order within `cutoff_width` of the contact line. Values lie in
/// [0, 1].
struct BumpField {
    centers: Vec<[f64; 2]>,
    inv_width_sq: f64,
    cutoff_width: f64,
    phi_scale: f64,
    dim: usize,
}

impl BumpField {
    fn seeded(p: &ShapeParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut centers = Vec::with_capacity(p.bump_count);
        for _ in 0..p.bump_count {
            match p.dim {
                2 => {
                    let phi_frac = rng.gen_range(0.05..0.75);
                    let psi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    centers.push([phi_frac, psi]);
                }
                _ => {
                    let phi_frac = rng.gen_range(-0.75..0.75);
                    centers.push([phi_frac, 0.0]);
                }
            }
        }
        Self {
            centers,
            inv_width_sq: 1.0 / (p.bump_width * p.bump_width),
            cutoff_width: p.cutoff_width,
            phi_scale: p.theta,
            dim: p.dim,
        }
    }

    /// Evaluated on the unit direction `dir` at polar fraction `phi_frac`.
    fn eval(&self, phi_frac: f64, dir: &[f64]) -> f64 {
        // Quintic step in the distance to the contact line (phi_frac = 1):
        // value, first and second derivatives vanish there.
        let collar = self.cutoff_width / self.phi_scale;
        let s = ((1.0 - phi_frac) / collar).clamp(0.0, 1.0);
        let cutoff = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        if cutoff == 0.0 {
            return 0.0;
        }
        let mut miss = 1.0;
        for c in &self.centers {
            let dist_sq = match self.dim {
                2 => {
                    let phi = c[0] * self.phi_scale;
                    let bc = [phi.sin() * c[1].cos(), phi.sin() * c[1].sin(), phi.cos()];
                    let dot = (dir[0] * bc[0] + dir[1] * bc[1] + dir[2] * bc[2]).clamp(-1.0, 1.0);
                    let ang = dot.acos();
                    ang * ang
                }
                _ => {
                    let here = phi_frac * if dir[0] >= 0.0 { 1.0 } else { -1.0 };
                    let delta = (here - c[0]) * self.phi_scale;
                    delta * delta
                }
            };
            miss *= 1.0 - (-dist_sq * self.inv_width_sq).exp();
        }
        cutoff * (1.0 - miss)
    }
}

/// Dense point sampling of the boundary of `B_{R; theta}(o)` clipped to the
/// closed half-space (the fitted target surface of the stability theorem).
pub fn sample_cap_surface<const D: usize>(
    o: &Point<D>,
    radius: f64,
    gauge: &Gauge<D>,
    spacing: f64,
) -> Vec<Point<D>> {
    let shift = shifted_contact_angle(o[D - 1].max(0.0), radius, gauge);
    let phi_max = if shift.disjoint {
        std::f64::consts::PI
    } else {
        shift.angle
    };
    let center = gauge.wulff_euclidean_center(o, radius);
    let mut out = Vec::new();
    let rings = ((radius * phi_max / spacing).ceil() as usize).max(2);
    match D {
        2 => {
            for i in 0..=(2 * rings) {
                let psi = phi_max * (1.0 - i as f64 / rings as f64);
                let mut q = Point::<D>::zeros();
                q[0] = center[0] + radius * psi.sin();
                q[1] = (center[1] + radius * psi.cos()).max(0.0);
                out.push(q);
            }
        }
        3 => {
            let mut top = Point::<D>::zeros();
            for k in 0..D {
                top[k] = center[k];
            }
            top[D - 1] += radius;
            out.push(top);
            for j in 1..=rings {
                let phi = phi_max * j as f64 / rings as f64;
                let ring_r = radius * phi.sin();
                let count =
                    ((2.0 * std::f64::consts::PI * ring_r / spacing).ceil() as usize).max(6);
                for l in 0..count {
                    let psi = 2.0 * std::f64::consts::PI * l as f64 / count as f64;
                    let mut q = Point::<D>::zeros();
                    q[0] = center[0] + ring_r * psi.cos();
                    q[1] = center[1] + ring_r * psi.sin();
                    q[D - 1] = (center[D - 1] + radius * phi.cos()).max(0.0);
                    out.push(q);
                }
            }
        }
        _ => unreachable!(),
    }
    out
}
