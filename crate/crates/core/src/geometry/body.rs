use crate::error::{check_dim, Error, Result};
use crate::linalg;

use super::projection::{self, DykstraSettings, ProjectionSettings};
use super::DYKSTRA_SLACK;

/// Closed ball `B[center, radius]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be >= 0, got {radius}")));
        }
        if !linalg::is_finite(&center) {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        projection::project_ball(x, &self.center, self.radius)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        (linalg::dist(x, &self.center) - self.radius).max(0.0)
    }
}

/// Convex hull of a nonempty vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    // counter-clockwise hull, planar case only
    hull2d: Option<Vec<Vec<f64>>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::invalid("polytope needs at least one vertex"))?;
        let d = first.len();
        for v in &vertices {
            check_dim(d, v.len())?;
            if !linalg::is_finite(v) {
                return Err(Error::invalid("non-finite polytope vertex"));
            }
        }
        let hull2d = (d == 2).then(|| planar_hull(&vertices));
        Ok(Polytope { vertices, hull2d })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Planar hull in counter-clockwise order, when `dim() == 2`.
    pub fn planar_hull(&self) -> Option<&[Vec<f64>]> {
        self.hull2d.as_deref()
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        check_dim(self.dim(), shift.len())?;
        Polytope::new(self.vertices.iter().map(|v| linalg::add(v, shift)).collect())
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(projection::project_polytope(x, self, ProjectionSettings::default())?.point)
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dist(x, &self.project(x)?))
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(linalg::dist(a, b));
            }
        }
        d
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for j in 0..d {
                lo[j] = lo[j].min(v[j]);
                hi[j] = hi[j].max(v[j]);
            }
        }
        (lo, hi)
    }
}

/// Andrew's monotone chain. Degenerate inputs give one or two points.
fn planar_hull(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 2 {
        return pts.iter().map(|p| p.to_vec()).collect();
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.iter().map(|p| p.to_vec()).collect()
}

/// `ball ∩ polytope`, checked nonempty at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCap {
    ball: Ball,
    polytope: Polytope,
}

impl BallCap {
    /// Fails with [`Error::EmptyIntersection`] when Dykstra started at the
    /// ball centre cannot find a common point within the feasibility
    /// tolerance `1e-8`.
    pub fn new(ball: Ball, polytope: Polytope) -> Result<Self> {
        check_dim(ball.dim(), polytope.dim())?;
        let out = projection::dykstra(
            ball.center(),
            |y| ball.project(y),
            |y| polytope.project(y),
            DykstraSettings::default(),
        )?;
        let gap = ball.distance(&out.point);
        if gap > 1e-8 {
            return Err(Error::EmptyIntersection(format!(
                "ball and polytope are {gap:e} apart"
            )));
        }
        Ok(BallCap { ball, polytope })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ball(Ball),
    Polytope(Polytope),
    BallCapPolytope(BallCap),
}

impl From<Ball> for ConvexBody {
    fn from(b: Ball) -> Self {
        ConvexBody::Ball(b)
    }
}

impl From<Polytope> for ConvexBody {
    fn from(p: Polytope) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<BallCap> for ConvexBody {
    fn from(k: BallCap) -> Self {
        ConvexBody::BallCapPolytope(k)
    }
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(Ball::new(center, radius)?.into())
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Polytope::new(vertices)?.into())
    }

    pub fn ball_cap(center: Vec<f64>, radius: f64, vertices: Vec<Vec<f64>>) -> Result<Self> {
        Ok(BallCap::new(Ball::new(center, radius)?, Polytope::new(vertices)?)?.into())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball(b) => b.dim(),
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::BallCapPolytope(k) => k.ball.dim(),
        }
    }

    /// Metric projection with default tolerances.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        match self {
            ConvexBody::Ball(b) => b.project(x),
            ConvexBody::Polytope(p) => p.project(x),
            ConvexBody::BallCapPolytope(k) => {
                Ok(projection::project_intersection(x, k, DykstraSettings::default())?.point)
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        match self {
            ConvexBody::Ball(b) => {
                check_dim(b.dim(), x.len())?;
                Ok(b.distance(x))
            }
            _ => Ok(linalg::dist(x, &self.project(x)?)),
        }
    }

    /// `R` with the body contained in `B[0, R]`.
    pub fn norm_bound(&self) -> f64 {
        match self {
            ConvexBody::Ball(b) => linalg::norm(&b.center) + b.radius,
            ConvexBody::Polytope(p) => p
                .vertices
                .iter()
                .map(|v| linalg::norm(v))
                .fold(0.0, f64::max),
            ConvexBody::BallCapPolytope(k) => ConvexBody::Ball(k.ball.clone())
                .norm_bound()
                .min(ConvexBody::Polytope(k.polytope.clone()).norm_bound()),
        }
    }

    /// Points of the body whose `slack`-neighbourhoods cover every extreme
    /// point, so the supremum of any 1-Lipschitz convex function over the
    /// body lies within `slack` of its maximum over the returned points.
    pub fn extreme_net(&self, resolution: usize) -> Result<(Vec<Vec<f64>>, f64)> {
        match self {
            ConvexBody::Ball(b) => Ok(crate::sampling::sphere_net(&b.center, b.radius, resolution)),
            ConvexBody::Polytope(p) => Ok((p.vertices.clone(), 0.0)),
            ConvexBody::BallCapPolytope(k) => {
                let d = k.ball.dim();
                let (cloud, slack) = if d <= 2 {
                    // ∂(B ∩ P) ⊆ ∂B ∪ ∂P and projection onto B ∩ P is 1-Lipschitz.
                    let (mut cloud, s_ball) =
                        crate::sampling::sphere_net(&k.ball.center, k.ball.radius, resolution);
                    let s_poly = if d == 2 {
                        let hull = k.polytope.planar_hull().unwrap_or(&[]);
                        let perimeter: f64 = (0..hull.len())
                            .map(|i| linalg::dist(&hull[i], &hull[(i + 1) % hull.len()]))
                            .sum();
                        if perimeter > 0.0 {
                            let spacing = perimeter / resolution.max(1) as f64;
                            for i in 0..hull.len() {
                                let pts = crate::sampling::segment_points(
                                    &hull[i],
                                    &hull[(i + 1) % hull.len()],
                                    spacing,
                                );
                                cloud.extend(pts);
                            }
                            spacing / 2.0
                        } else {
                            cloud.extend(hull.iter().cloned());
                            0.0
                        }
                    } else {
                        cloud.extend(k.polytope.vertices.iter().cloned());
                        0.0
                    };
                    (cloud, s_ball.max(s_poly))
                } else {
                    let (plo, phi) = k.polytope.bounding_box();
                    let lo: Vec<f64> = (0..d)
                        .map(|j| plo[j].max(k.ball.center[j] - k.ball.radius))
                        .collect();
                    let hi: Vec<f64> = (0..d)
                        .map(|j| phi[j].min(k.ball.center[j] + k.ball.radius))
                        .collect();
                    crate::sampling::box_grid(&lo, &hi, resolution)
                };
                let pts = cloud
                    .iter()
                    .map(|z| self.project(z))
                    .collect::<Result<Vec<_>>>()?;
                Ok((pts, slack + DYKSTRA_SLACK))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_enforce_invariants() {
        assert!(Ball::new(vec![0.0], -1.0).is_err());
        assert!(Polytope::new(vec![]).is_err());
        assert!(matches!(
            Polytope::new(vec![vec![0.0, 0.0], vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        let far = BallCap::new(
            Ball::new(vec![0.0, 0.0], 1.0).unwrap(),
            Polytope::new(vec![vec![3.0, 0.0], vec![4.0, 0.0]]).unwrap(),
        );
        assert!(matches!(far, Err(Error::EmptyIntersection(_))));
    }

    #[test]
    fn planar_hull_drops_interior_and_collinear_points() {
        let p = Polytope::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ])
        .unwrap();
        assert_eq!(p.planar_hull().unwrap().len(), 4);
        let seg = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(seg.planar_hull().unwrap().len(), 2);
    }

    #[test]
    fn ball_cap_net_stays_inside_body() {
        let k = ConvexBody::ball_cap(
            vec![1.0, 0.0],
            1.0,
            vec![vec![0.0, -1.0], vec![0.0, 1.0], vec![2.0, 1.0], vec![2.0, -1.0]],
        )
        .unwrap();
        let (pts, slack) = k.extreme_net(200).unwrap();
        assert!(slack > 0.0);
        for p in pts {
            assert!(k.distance(&p).unwrap() < 1e-8);
        }
    }
}
