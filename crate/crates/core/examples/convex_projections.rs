//! Metric projections onto balls, polytopes and their intersections, with
//! Hausdorff brackets and the two estimates that tie them together.
//!
//! Run with `cargo run --example convex_projections`.

use setflow::geometry::{
    hausdorff_distance, project_intersection, project_polytope, projection_difference_check, slater_intersection_check,
    BallCap, Ball, ConvexBody, DykstraSettings, Polytope, ProjectionSettings,
};

fn main() -> setflow::Result<()> {
    let square = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]])?;
    let x = [2.0, 1.2];
    let p = project_polytope(&x, &square, ProjectionSettings::default())?;
    println!("P_square({x:?}) = {:?}  (optimality gap {:.1e})", p.point, p.gap);

    let cap = BallCap::new(Ball::new(vec![0.5, 0.5], 0.6)?, square.clone())?;
    let d = project_intersection(&x, &cap, DykstraSettings::default())?;
    println!("P_(ball ∩ square)({x:?}) = {:.6?} after {} Dykstra sweeps", d.point, d.iterations);

    let a = ConvexBody::polytope(square.vertices().to_vec())?;
    let b = ConvexBody::ball(vec![0.6, 0.5], 0.55)?;
    let h = hausdorff_distance(&a, &b, 512)?;
    println!("Hausdorff(square, ball) in [{:.6}, {:.6}]", h.lower, h.upper);

    let check = projection_difference_check(&x, &a, &b, 1.5, 512)?;
    println!("projection difference {:.4} <= bound {:.4}: {}", check.lhs, check.rhs, check.pass);

    // B[(0.5, 0.5), 0.2] sits inside the ball, and its center is in the square
    let slater = slater_intersection_check(&[1.8, -0.3], &a, &b, &[0.5, 0.5], 0.2, 256)?;
    println!("distance to intersection {:.4} <= bound {:.4}: {}", slater.lhs, slater.rhs, slater.pass);
    Ok(())
}
