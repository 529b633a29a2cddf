//! Compact convex bodies in ℝᵈ.
//!
//! Three shapes are supported: closed balls, polytopes given as the convex
//! hull of a vertex list, and the intersection of one ball with one
//! polytope. Projections onto polytopes go through Wolfe's nearest-point
//! method (exact polygon geometry in the plane), intersections through
//! Dykstra's alternating projections. Hausdorff distances come back as
//! brackets `[lower, upper]`, exact whenever the source body is a polytope.

mod body;
mod checks;
mod hausdorff;
mod projection;

pub use body::{Ball, BallCap, ConvexBody, Polytope};
pub use checks::{
    intersection_continuity_probe, projection_difference_check, slater_intersection_check,
    verify_ball_inside, BoundCheck, ContinuityProbe,
};
pub use hausdorff::{
    diameter_of_union, directed_hausdorff, hausdorff_distance, DiameterBracket, HausdorffBracket,
};
pub use projection::{
    dykstra, project_ball, project_intersection, project_polytope, project_polytope_with,
    DykstraOutcome, DykstraSettings, PolytopeProjection, ProjectionSettings,
};

/// Slack added to sampled brackets whose nodes were produced by Dykstra.
pub(crate) const DYKSTRA_SLACK: f64 = 1e-9;
