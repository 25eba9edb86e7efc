//! Heterogeneous-firm toolkit for vertical outward FDI under input-cost
//! shocks.
//!
//! The crate has five layers:
//!
//! - [`numerics`]: Pareto utilities, bisection, fixed-effects least squares
//!   with robust covariance, chi-square tails.
//! - [`model`]: the firm's closed-form problem — pricing, profit, entry and
//!   investment cutoffs, the investment probability and its comparative
//!   statics.
//! - [`market`]: the upstream intermediate-input market — kinked aggregate
//!   demand, a parametric supply family with a policy-ban rotation,
//!   equilibrium solving and regime classification.
//! - [`panel`]: synthetic unbalanced firm-year panels (structural and
//!   reduced-form data-generating processes) plus CSV import/export.
//! - [`did`]: the difference-in-differences estimation engine — build-up
//!   control specifications, event-study pre-trend testing, and the
//!   aggregate-level semi-parametric estimator.
//!
//! The `ofdi` binary (see [`cli`]) wires JSON run configurations to these
//! layers.
//!
//! Validation code writes domain checks as negated comparisons
//! (`!(x > 0.0)`) so that NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod did;
pub mod error;
pub mod market;
pub mod model;
pub mod numerics;
pub mod panel;

pub use error::{Error, Result};
