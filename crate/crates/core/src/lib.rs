//! Exact and iterative solvers for fused sequential smoothing problems.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod highorder;
pub mod link;
pub mod multivariate;
pub mod oracle;
pub mod problem;
pub mod pwl;
pub mod skiplist;
pub mod univariate;

pub use error::{Error, Result};
pub use link::{BregmanLink, Potential};
pub use problem::{
    evaluate_objective, kkt_residual, DualCertificate, PenaltySpec, Problem, Signal, SolverResult, Status,
};
