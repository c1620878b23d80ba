//! Sum-rate-optimal relay amplification for two-way amplify-and-forward
//! MIMO relaying.
//!
//! Two single-antenna terminals exchange data through an AF relay with
//! `m_r` antennas. The relay applies a complex amplification matrix `G`
//! to its received signal; choosing `G` to maximize the two-terminal
//! sum-rate is a non-convex product-of-Rayleigh-quotients problem in
//! `g = vec(G)`. This crate solves it two independent ways and certifies
//! the result against a computable upper bound:
//!
//! - [`potdc`]: SDP relaxation plus iterative linearization of the single
//!   concave constraint, each round solved by a log-barrier interior-point
//!   kernel ([`subproblem`]).
//! - [`rages`]: stationary points parameterized as dominant generalized
//!   eigenvectors of a two-parameter matrix pencil, searched over a 2-D
//!   (or 1-D) parameter box.
//! - [`bound`]: a segmented convex-hull upper bound on the optimal value,
//!   tight enough to certify global optimality in practice.
//!
//! [`harness`] reproduces the Monte-Carlo experiments (sum-rate versus
//! noise level, relay placement, antenna count, and a diagonal-relay
//! restriction) and writes deterministic CSV reports.

pub mod bound;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod potdc;
pub mod problem;
pub mod rages;
pub mod subproblem;

pub use error::{Error, Result};
pub use linalg::{ComplexVector, HermitianMatrix};
