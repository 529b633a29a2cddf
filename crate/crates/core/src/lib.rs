//! Finite-dimensional toolkit for coupled evolution inclusions
//!
//! ```text
//!     u' + E u    ∈ F(u, v),    u(0) = u0
//!     v' + ∂φᵗ(v) ∈ G(u, v),    v(0) = v0
//! ```
//!
//! where `-E` generates a spectral semigroup (heat, realified Schrödinger or a
//! reduced 1D wave block), `φᵗ` is a time-dependent variable-exponent
//! potential on a uniform 1D grid, and `F`, `G` are convex-polytope valued
//! maps built from a finite orthonormal family.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: balls, polytopes and their intersections, metric
//!   projections, Dykstra's algorithm and bracketed Hausdorff distances, plus
//!   executable checks of the projection and intersection estimates.
//! * [`rhs`]: set-valued right-hand sides `conv{φₖ(u, v) eₖ}` and growth
//!   envelopes.
//! * [`selection`]: time paths, grid selections and the ε-close selection
//!   construction.
//! * [`semigroup`]: spectral propagators, exponential-Euler Duhamel solves,
//!   Yosida smoothing and the non-Lipschitz orbit experiment.
//! * [`flow`]: the discrete `p(x)`-Laplacian potential and its proximal
//!   implicit-Euler flow.
//! * [`solver`]: window constants, the relaxed selection fixed point,
//!   global continuation and the a-priori / Grönwall probes.
//! * [`cli`]: experiment configuration, verification suites and file output
//!   behind the `setflow` binary.

pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod rhs;
pub mod sampling;
pub mod selection;
pub mod semigroup;
pub mod solver;

pub use error::{Error, Result};
