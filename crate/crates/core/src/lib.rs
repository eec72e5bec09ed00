//! Local-realistic probability models, Bell-inequality verdicts that keep
//! genuine and auxiliary-assumption inequalities apart, closed-form quantum
//! predictions for photon-pair experiments, and a linear-programming search
//! for detection-loophole local models.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod feasibility;
pub mod harness;
pub mod inequality;
pub mod kinematics;
pub mod lp;
pub mod model;
pub mod quantum;
pub mod sampling;
pub mod search;

pub use error::{Error, Result};
