//! Uniform metric graphs that approximate the Euclidean and hyperbolic
//! planes up to a bounded additive error, together with the numerical
//! machinery that certifies them.
//!
//! * [`lowdisc`]: irrational rotations and their bounded ergodic sums.
//! * [`profiles`]: planar norms via dual profiles and Legendre duality.
//! * [`betaseq`]: the edge-length sequence driving the planar lattice.
//! * [`graphcore`]: metric graphs and shortest paths.
//! * [`planar`]: the two-layer lattice graph on ℤ².
//! * [`hyperbolic`]: net, tree and shortcut graph on the hyperbolic plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod betaseq;
pub mod graphcore;
pub mod hyperbolic;
pub mod lowdisc;
pub mod planar;
pub mod profiles;
mod quad;

pub use betaseq::BetaSequence;
pub use graphcore::{MetricGraph, UniformityReport, VertexId};
pub use lowdisc::QuadraticIrrational;
pub use profiles::{DualProfile, Norm2D, NormSection};
