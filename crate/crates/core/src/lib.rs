//! Numerical convex geometry around volume-product inequalities: polar
//! bodies and Santaló points, functional and measure versions of the
//! volume-product bound, discrete Legendre transforms and Steiner
//! symmetrization.

// `!(x > 0.0)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod error;
pub mod functional;
pub mod fuzz;
pub mod harness;
pub mod legendre;
pub mod logconcave;
pub mod measure;
pub mod optim;
pub mod polar;
pub mod polytope;
pub mod quadrature;
pub mod report;
pub mod rho;
pub mod rng;
pub mod sphere;
pub mod star;
pub mod steiner;
pub mod vector;

pub use error::{Error, Result};
