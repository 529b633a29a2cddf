//! Polytope-valued right-hand sides `conv{0, φₖ(u, v) eₖ}`, their growth
//! envelopes and grid selections.
//!
//! Run with `cargo run --example set_valued_maps`.

use setflow::linalg;
use setflow::rhs::{BasisFamilyMap, Coefficient, Expr};
use setflow::selection::{approximate_selection, nearest_point_selection, path_l2_norm, TimePath};

fn main() -> setflow::Result<()> {
    let map = BasisFamilyMap::new(
        BasisFamilyMap::canonical_directions(3, 2)?,
        vec![
            Coefficient::Growth { c: 0.5, readout: None, nu: Expr::constant(0.2) },
            Coefficient::General(Expr::Tanh { arg: Box::new(Expr::InnerU { dir: vec![0.0, 0.0, 1.0] }) }),
        ],
        true,
    )?;
    let env = map.envelope()?;
    println!("growth envelope: |F(u, v)| <= {} |u| + {} |v| + {}", env.a, env.b, env.c);

    let (u, v) = ([1.0, -2.0, 0.5], [0.3]);
    let image = map.evaluate(&u, &v)?;
    println!("F({u:?}, {v:?}) has vertices {:?}", image.vertices());
    println!("growth check: {:?}", map.growth_check(&u, &v)?);

    // a selection along a state path, anchored at a moving target
    let up = TimePath::from_fn(0.0, 1.0, 11, |t| vec![t, 1.0 - t, (3.0 * t).sin()])?;
    let vp = TimePath::constant(0.0, 1.0, 11, &[0.3])?;
    let anchor = TimePath::constant(0.0, 1.0, 11, &[0.0, 2.0, 0.0])?;
    let f = nearest_point_selection(&map, &up, &vp, &anchor)?;
    println!("nearest-point selection: max residual {:.1e}", f.max_residual());

    // move the state and transfer the selection to within eps of the old one
    let moved = TimePath::new(0.0, 1.0, up.values().iter().map(|x| linalg::add(x, &[0.05, -0.02, -0.05])).collect())?;
    let g = approximate_selection(&map, &moved, &vp, &f, 0.1)?;
    let gap = path_l2_norm(&g.path.sub(&f.path)?);
    println!("transferred selection: L2 distance {gap:.3e} <= eps sqrt(T) = 0.1");
    Ok(())
}
