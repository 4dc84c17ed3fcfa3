//! Distributionally robust separating-input design for active fault
//! diagnosis of nonlinear uncertain systems.
//!
//! The pipeline: propagate a bank of fault-scenario models through Monte
//! Carlo ensembles ([`sysmodel`]), fit moment densities and measure their
//! overlap with total variation distance ([`distfit`]), inflate each fitted
//! density into an ambiguity box ([`ambiguity`]), maximize the common-area
//! bound over those boxes with a KKT certificate ([`worstcase`]), and pick
//! the piecewise-constant input that minimizes the worst case interval by
//! interval ([`inputdesign`]). [`diagnose`] replays a designed schedule on a
//! "true" bank and issues maximum-likelihood fault decisions.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential execution otherwise; results are
//! identical either way because all randomness comes from counter-addressed
//! streams ([`rng`]).

pub mod ambiguity;
pub mod diagnose;
pub mod distfit;
pub mod error;
pub mod inputdesign;
pub mod parallel;
pub mod rng;
pub mod schedule;
pub mod special;
pub mod sysmodel;
pub mod worstcase;

pub use error::{AfdError, Result};
pub use schedule::InputSchedule;
