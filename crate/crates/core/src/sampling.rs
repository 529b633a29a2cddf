//! Deterministic sampling nets and the split-seed random scheme.
//!
//! Every net returned here comes with its covering radius: each point of the
//! sampled set lies within that distance of some net point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg;

/// Generator for trial `index` of a run seeded with `seed`.
///
/// Trials are independent of each other and of the order they are run in.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point in the ball `B[center, radius]`: a uniform direction
/// scaled by `radius · U^{1/d}`.
pub fn point_in_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    if d == 0 {
        return Vec::new();
    }
    let dir = unit_vector(rng, d);
    let r = radius * rng.gen_range(0.0f64..=1.0).powf(1.0 / d as f64);
    linalg::axpy(center, r, &dir)
}

/// Uniform direction on the unit sphere (normalised Gaussian vector).
pub fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = linalg::norm(&p);
        if n > 1e-12 {
            return linalg::scale(&p, 1.0 / n);
        }
    }
}

/// Random convex weights of length `k`.
pub fn simplex_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// A net of the sphere `∂B[center, radius]` with about `resolution` points.
///
/// In the plane the points are equally spaced in angle and the returned slack
/// is `2π r / resolution`. In higher dimension the points are cell centres
/// of a grid on the faces of the cube `[-1, 1]^d`, pushed radially onto the
/// sphere; radial projection from outside the unit ball is 1-Lipschitz, so
/// the covering radius is at most `r √(d-1) / m` for `m` cells per edge.
pub fn sphere_net(center: &[f64], radius: f64, resolution: usize) -> (Vec<Vec<f64>>, f64) {
    let d = center.len();
    let resolution = resolution.max(1);
    match d {
        0 => (vec![Vec::new()], 0.0),
        1 => (
            vec![vec![center[0] - radius], vec![center[0] + radius]],
            0.0,
        ),
        2 => {
            let pts = (0..resolution)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / resolution as f64;
                    vec![center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                })
                .collect();
            (pts, 2.0 * std::f64::consts::PI * radius / resolution as f64)
        }
        _ => {
            let per_face = (resolution as f64 / (2 * d) as f64).max(1.0);
            let m = ((per_face.powf(1.0 / (d - 1) as f64) + 1e-9).floor() as usize).max(1);
            let mut pts = Vec::new();
            let mut idx = vec![0usize; d - 1];
            for axis in 0..d {
                for sign in [-1.0, 1.0] {
                    idx.iter_mut().for_each(|i| *i = 0);
                    loop {
                        let mut q = vec![0.0; d];
                        let mut k = 0;
                        for (j, qj) in q.iter_mut().enumerate() {
                            if j == axis {
                                *qj = sign;
                            } else {
                                *qj = -1.0 + (2.0 * idx[k] as f64 + 1.0) / m as f64;
                                k += 1;
                            }
                        }
                        let n = linalg::norm(&q);
                        pts.push(linalg::axpy(center, radius / n, &q));
                        if !advance(&mut idx, m) {
                            break;
                        }
                    }
                }
            }
            let slack = radius * ((d - 1) as f64).sqrt() / m as f64;
            (pts, slack)
        }
    }
}

/// Cell-centre grid over the box `[lo, hi]` with about `resolution` points.
/// Returns the points and the covering radius of the box.
pub fn box_grid(lo: &[f64], hi: &[f64], resolution: usize) -> (Vec<Vec<f64>>, f64) {
    let d = lo.len();
    if d == 0 {
        return (vec![Vec::new()], 0.0);
    }
    let m = (((resolution.max(1) as f64).powf(1.0 / d as f64) + 1e-9).floor() as usize).max(1);
    let mut idx = vec![0usize; d];
    let mut pts = Vec::new();
    loop {
        pts.push(
            (0..d)
                .map(|j| lo[j] + (hi[j] - lo[j]) * (2.0 * idx[j] as f64 + 1.0) / (2.0 * m as f64))
                .collect(),
        );
        if !advance(&mut idx, m) {
            break;
        }
    }
    let half_cell: Vec<f64> = (0..d).map(|j| (hi[j] - lo[j]) / (2.0 * m as f64)).collect();
    (pts, linalg::norm(&half_cell))
}

/// Points along the segment `[a, b]` with spacing at most `spacing`,
/// endpoints included.
pub fn segment_points(a: &[f64], b: &[f64], spacing: f64) -> Vec<Vec<f64>> {
    let len = linalg::dist(a, b);
    let k = ((len / spacing).ceil() as usize).max(1);
    (0..=k)
        .map(|i| linalg::lerp(a, b, i as f64 / k as f64))
        .collect()
}

fn advance(idx: &mut [usize], m: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < m {
            return true;
        }
        *i = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(7, 3).gen();
        let b: f64 = trial_rng(7, 3).gen();
        let c: f64 = trial_rng(7, 4).gen();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn sphere_net_points_lie_on_sphere() {
        for d in 1..5 {
            let c = vec![0.5; d];
            let (pts, _) = sphere_net(&c, 2.0, 200);
            for p in pts {
                assert!((linalg::dist(&p, &c) - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_net_covering_radius_holds_on_random_directions() {
        let mut rng = trial_rng(1, 0);
        for d in 2..5 {
            let c = vec![0.0; d];
            let (pts, slack) = sphere_net(&c, 1.0, 500);
            for _ in 0..300 {
                let y = unit_vector(&mut rng, d);
                let near = pts
                    .iter()
                    .map(|p| linalg::dist(p, &y))
                    .fold(f64::INFINITY, f64::min);
                assert!(near <= slack + 1e-12, "d={d} near={near} slack={slack}");
            }
        }
    }

    #[test]
    fn box_grid_covers_box() {
        let (pts, slack) = box_grid(&[0.0, -1.0, 2.0], &[1.0, 1.0, 3.0], 1000);
        assert_eq!(pts.len(), 1000);
        let corner = [0.0, -1.0, 2.0];
        let near = pts
            .iter()
            .map(|p| linalg::dist(p, &corner))
            .fold(f64::INFINITY, f64::min);
        assert!((near - slack).abs() < 1e-12);
    }
}
