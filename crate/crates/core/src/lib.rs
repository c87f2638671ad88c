//! Thermodynamic-cost learning curves.
//!
//! Cost trajectories under experience-driven and exogenous innovation with a
//! floor cost and a one-off policy shock, the exergy consumption they imply,
//! the conditions for absolute decoupling, a cumulative-emissions temperature
//! extension, and calibration of the curve family to observed series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod climate;
pub mod decoupling;
pub mod error;
pub mod model;
pub mod numeric;
pub mod scenario_io;

pub use error::{Error, Result};
pub use model::{
    derive_policy_context, eval_curve, policy_coefficient_from_gamma, AbsoluteParams, Bounds, CurveKind,
    LearningParams, PolicyContext, RelativeParams, Sampling, Scenario, TrajectoryPoint,
};
