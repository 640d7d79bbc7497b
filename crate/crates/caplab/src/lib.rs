//! Numerical laboratory for capillary hypersurfaces in the half-space.
//!
//! The crate discretizes compact hypersurfaces meeting the plane
//! `{x_{n+1} = 0}` at a prescribed contact angle, and checks the integral
//! identities, inequalities, and the quantitative stability pipeline that
//! govern them: capillary gauge algebra, curvature estimation, enclosed
//! volumetrics, shifted-distance level sets, cluster extraction, and
//! Hausdorff comparison against fitted cap unions.

pub mod gauge;
pub mod geom;
pub mod grid;
pub mod mesh;
pub mod numerics;
pub mod shapes;
