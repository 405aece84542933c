// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod functions;
pub mod gallery;
pub mod geometry;
pub mod kconst;
pub mod krylov;
pub mod lemmas;
pub mod matrix;
pub mod minimax;
pub mod potential;
pub mod quadrature;
pub mod rational;
pub mod regions;
pub mod svg;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
