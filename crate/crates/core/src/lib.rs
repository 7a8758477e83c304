//! Multilevel expanded-graph preconditioners for graph Laplacian systems.
//!
//! The pipeline: coarsen a positively weighted graph by maximal weighted
//! matching ([`aggregation`]), assemble the multilevel expanded Laplacian
//! P(mu)^T L P(mu) ([`expansion`]), keep its positively weighted subgraph as
//! a preconditioner (PEGP) or sparsify that further into a tree-like
//! multilevel sparsifier (MSP), and solve the expanded system with flexible
//! GMRES ([`solver`]). The [`spectral`] module verifies the spectral
//! equivalence bounds at desk scale.
//!
//! All numerical code is generic over the scalar type through
//! [`scalar::Scalar`]; `f64` is the working precision for anything that has
//! to meet tight tolerances.

// index-based loops mirror the matrix subscripts in the dense kernels
#![allow(clippy::needless_range_loop)]

pub mod aggregation;
pub mod dense;
pub mod error;
pub mod expansion;
pub mod graph;
pub mod scalar;
pub mod sparse;
pub mod spectral;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};

pub type WeightedGraphF64 = graph::WeightedGraph<f64>;
pub type WeightedGraphF32 = graph::WeightedGraph<f32>;
pub type SparseMatrixF64 = sparse::SparseMatrix<f64>;
pub type SparseMatrixF32 = sparse::SparseMatrix<f32>;
pub type DenseMatrixF64 = dense::DenseMatrix<f64>;
pub type ExpandedSystemF64 = expansion::ExpandedSystem<f64>;
pub type PreconditionerF64 = solver::Preconditioner<f64>;
