//! Threshold GIRG toolkit: sampling, hierarchical box tessellation over the
//! weight-augmented torus, inactive-region analysis, routing certificates,
//! tower renormalization, diameter algorithms and the Gray-curve lower-bound
//! probe.
//!
//! The geometric core is generic over the scalar type (f32/f64) via
//! [`Scalar`]; the aliases below fix `f64` for ordinary use.

pub mod diameter;
pub mod error;
pub mod format;
pub mod geometry;
pub mod graph;
pub mod lowerbound;
pub mod regions;
pub mod router;
pub mod sampler;
pub mod scalar;
pub mod tessellation;
pub mod towers;

pub use error::{GirgError, Result};
pub use scalar::Scalar;

/// Default scalar for all concrete entry points.
pub type Real = f64;
pub type Params = geometry::ModelParams<Real>;
pub type Point = geometry::TorusPoint<Real>;
pub type Vertex = geometry::WeightedVertex<Real>;
pub type Graph = graph::GirgGraph<Real>;
pub type Tess = tessellation::Tessellation<Real>;
