//! Lift expectations of random convex bodies.
//!
//! A random convex body `X` with finitely many weighted realizations is lifted
//! to `conv({0}, {1} x X)` in `R^{d+1}`; the expectation of that lifted body
//! has support function `E(u0 + h_X(u))_+`. This crate evaluates it exactly
//! and builds trimmed regions, Lorenz-type polygons, ordering checks,
//! tuple lifts and discrete reconstruction on top.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the command line tool uses.

pub mod bodies;
pub mod error;
pub mod identify;
pub mod io;
pub mod lift;
pub mod order;
pub mod scalar;
pub mod tuples;

pub use bodies::{ConvexBody, SymMatrix, Vector};
pub use error::{Error, Result};
pub use scalar::{Probability, Scalar};

pub type Vec64 = Vector<f64>;
pub type Body = ConvexBody<f64>;
pub type Sample = lift::BodySample<f64>;
pub type Curve = lift::StopLossCurve<f64>;
pub type Polygon = lift::Polygon2D<f64>;
pub type Grid = order::DirectionGrid<f64>;
pub type TupleSample = tuples::CoupledTupleSample<f64>;
pub type Points = tuples::VectorSample<f64>;
/// Finite distribution with exact rational probabilities.
pub type RationalDist = identify::FiniteSupportDist<f64, num_rational::Ratio<i64>>;

pub type Vec32 = Vector<f32>;
pub type Body32 = ConvexBody<f32>;
pub type Sample32 = lift::BodySample<f32>;



