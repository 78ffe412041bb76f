//! Piecewise-constant discontinuous Galerkin time stepping with P1 finite
//! elements for subdiffusion, plus the convergence harness around it.

#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod dg;
pub mod error;
pub mod fem;
pub mod frac_ops;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod mittag_leffler;
pub mod quadrature;
pub mod reference;
pub mod special;

pub use error::{Error, Result};
