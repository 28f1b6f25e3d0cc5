//! Frame-based tensor calculus for almost complex manifolds.
//!
//! Everything is expressed in a local frame `e_1..e_n` with dual coframe
//! `θ^1..θ^n`. Connection coefficients are stored as `(1,2)` tensors indexed
//! `[b][c][a]` with `∇_{e_a} e_c = Γ^b_{ca} e_b`: the differentiating
//! direction always sits in the last lower slot.
//!
//! Two scalar backends are provided: exact rationals for homogeneous
//! (constant structure) fixtures and `f64` for chart presentations, where
//! frame derivatives come from finite differences.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod almost_complex;
pub mod conformal;
pub mod connection;
pub mod error;
pub mod families;
pub mod field;
pub mod forms;
pub mod frame;
pub mod hermitian;
pub mod linalg;
pub mod metric;
pub mod projective;
pub mod scalar;
pub mod tensor;

pub use error::{GeometryError, Result};
pub use field::{Field, HermitianSplit};
pub use frame::{Differencing, FrameComplex};
pub use linalg::Matrix;
pub use scalar::{Rational, Scalar, Tolerance};
pub use tensor::{Shape, Tensor, TensorOp};
