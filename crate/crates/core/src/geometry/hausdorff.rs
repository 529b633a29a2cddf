use crate::error::{check_dim, Result};
use crate::linalg;

use super::body::ConvexBody;
use super::DYKSTRA_SLACK;

/// Two-sided enclosure of a Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffBracket {
    pub lower: f64,
    pub upper: f64,
    pub resolution: usize,
}

impl HausdorffBracket {
    fn exact(value: f64, resolution: usize) -> Self {
        HausdorffBracket { lower: value, upper: value, resolution }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Two-sided enclosure of `diam(A ∪ B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterBracket {
    pub lower: f64,
    pub upper: f64,
}

fn target_slack(t: &ConvexBody) -> f64 {
    match t {
        ConvexBody::BallCapPolytope(_) => DYKSTRA_SLACK,
        _ => 0.0,
    }
}

/// Enclosure of `sup_{a ∈ S} dist(a, T)`.
///
/// Exact when `S` is a polytope (the convex function `dist(·, T)` peaks at a
/// vertex) or when both bodies are balls. Other sources are sampled on a net
/// of their extreme points and the net's covering radius is added on top.
pub fn directed_hausdorff(s: &ConvexBody, t: &ConvexBody, resolution: usize) -> Result<HausdorffBracket> {
    check_dim(s.dim(), t.dim())?;
    if let (ConvexBody::Ball(a), ConvexBody::Ball(b)) = (s, t) {
        let delta = linalg::dist(a.center(), b.center());
        return Ok(HausdorffBracket::exact(
            (delta + a.radius() - b.radius()).max(0.0),
            resolution,
        ));
    }
    let tslack = target_slack(t);
    let (points, slack) = s.extreme_net(resolution)?;
    let mut worst: f64 = 0.0;
    for p in &points {
        worst = worst.max(t.distance(p)?);
    }
    let (lower, upper) = match s {
        ConvexBody::Polytope(_) if tslack == 0.0 => (worst, worst),
        ConvexBody::Polytope(_) => ((worst - tslack).max(0.0), worst + tslack),
        ConvexBody::BallCapPolytope(_) => ((worst - DYKSTRA_SLACK - tslack).max(0.0), worst + slack + tslack),
        ConvexBody::Ball(_) => ((worst - tslack).max(0.0), worst + slack + tslack),
    };
    Ok(HausdorffBracket { lower, upper, resolution })
}

/// Enclosure of `d_Hd(A, B)`: the larger of the two directed brackets.
pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody, resolution: usize) -> Result<HausdorffBracket> {
    let ab = directed_hausdorff(a, b, resolution)?;
    let ba = directed_hausdorff(b, a, resolution)?;
    Ok(HausdorffBracket {
        lower: ab.lower.max(ba.lower),
        upper: ab.upper.max(ba.upper),
        resolution,
    })
}

/// Enclosure of `diam(A ∪ B)`. Exact unless a ball-polytope intersection is
/// involved, in which case both extreme nets are compared pairwise.
pub fn diameter_of_union(a: &ConvexBody, b: &ConvexBody, resolution: usize) -> Result<DiameterBracket> {
    check_dim(a.dim(), b.dim())?;
    let exact = |v: f64| Ok(DiameterBracket { lower: v, upper: v });
    match (a, b) {
        (ConvexBody::Ball(x), ConvexBody::Ball(y)) => {
            let gap = linalg::dist(x.center(), y.center()) + x.radius() + y.radius();
            exact(gap.max(2.0 * x.radius()).max(2.0 * y.radius()))
        }
        (ConvexBody::Ball(x), ConvexBody::Polytope(p)) | (ConvexBody::Polytope(p), ConvexBody::Ball(x)) => {
            let far = p
                .vertices()
                .iter()
                .map(|v| linalg::dist(v, x.center()) + x.radius())
                .fold(0.0, f64::max);
            exact(far.max(2.0 * x.radius()).max(p.diameter()))
        }
        (ConvexBody::Polytope(p), ConvexBody::Polytope(q)) => {
            let mut all = p.vertices().to_vec();
            all.extend(q.vertices().iter().cloned());
            exact(super::Polytope::new(all)?.diameter())
        }
        _ => {
            let (mut pts, sa) = a.extreme_net(resolution)?;
            let (pb, sb) = b.extreme_net(resolution)?;
            pts.extend(pb);
            let mut d: f64 = 0.0;
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    d = d.max(linalg::dist(p, q));
                }
            }
            Ok(DiameterBracket {
                lower: (d - 2.0 * DYKSTRA_SLACK).max(0.0),
                upper: d + 2.0 * sa.max(sb),
            })
        }
    }
}
