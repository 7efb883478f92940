//! Numerical ergodic theory on finite traced `*`-algebras.
//!
//! A [`TracedAlgebra`] is a finite direct sum of matrix blocks `M_{d_1} ⊕ … ⊕ M_{d_k}`
//! where block `i` carries a positive trace weight `w_i`, so that
//! `τ(x) = Σ_i w_i · tr(x_i)`. On top of that model the crate provides
//!
//! * generalized singular-value functions `t ↦ μ_t(x)`, `L^p` norms, the
//!   K-functional and weak submajorization (`algebra`),
//! * structured linear maps with exact Dunford–Schwartz certification (`superops`),
//! * multiparameter Cesàro averages along sector nets and Besicovitch-weighted
//!   semigroup flows (`ergodic`),
//! * witness projections certifying almost-uniform and bilaterally almost-uniform
//!   convergence of finite traces (`certify`).
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(a > b)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod certify;
pub mod ergodic;
pub mod linalg;
pub mod rng;
pub mod superops;

mod error;
mod tolerance;

pub use algebra::{Block, Element, MeasureNeighborhood, Projection, StepFunction, TracedAlgebra};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use tolerance::Tolerances;
