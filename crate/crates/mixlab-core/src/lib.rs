//! Desk-scale verification toolkit for fast-rate learning guarantees on
//! finite discrete problems.
//!
//! The crate makes the following objects computable and cross-checkable:
//!
//! * [`problem`] — finite learning problems `(ℓ, F, P)`, risks, excess-loss
//!   random variables, minimizers, and risk-level subclasses;
//! * [`mixability`] — cumulant generating functions, stochastic mixability
//!   constants η*, weak mixability, Bernstein constants, and the
//!   hyper-concentration perturbation;
//! * [`moment`] — the two-moment problem over a bounded interval: grid LP,
//!   dual certificates, the feasibility boundary, and the change of scale;
//! * [`simplex`] — a small dense simplex used purely as an independent
//!   cross-check of the grid LP;
//! * [`erm`] — seeded Monte Carlo ERM replication, Cramér–Chernoff tails,
//!   log-log rate fits, and bound-violation frequencies;
//! * [`bounds`] — closed-form excess-risk bound evaluators and greedy ε-nets;
//! * [`diagnostics`] — the effective-convexity (non-unique-minimizer) test.
//!
//! With the default `parallel` feature the hot loops (grid LP scans, Monte
//! Carlo trials) run on rayon; results are identical to the sequential
//! fallback bit for bit.

#![forbid(unsafe_code)]
// Validation uses `!(x > 0.0)` style guards so NaN inputs fail closed; the
// un-negated comparison clippy suggests would silently accept them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod diagnostics;
pub mod erm;
mod exec;
pub mod mixability;
pub mod moment;
pub mod problem;
pub mod simplex;

pub use problem::{Atom, ExcessLossRv, Hypothesis, LearningProblem, Loss};
