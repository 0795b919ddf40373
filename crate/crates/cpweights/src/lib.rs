//! Numerical toolkit for C_p weights: maximal functions, sparse forms,
//! Marcinkiewicz functionals, tail functionals and C_ψ certifiers, and the
//! Kahanpää–Mejlbro counterexample weights.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod marcinkiewicz;
pub mod maximal;
pub mod oracles;
pub mod singular;
pub mod sparse;
pub mod weights;

pub use calculus::{CertifiedValue, GridFunctionND, StepFunction1D};
pub use error::{Error, Ratio, Result};
pub use geometry::{Cube, DyadicCube, OpenSet, Rect};
pub use weights::{PsiFunction, Weight};
