//! Covariance evolution of the peeling decoder on (b,d)-regular LDPC
//! ensembles over the binary erasure channel.
//!
//! * [`analytic`]: closed-form covariances, `y -> 0` limits and the
//!   stability correlation.
//! * [`ode`]: direct RK4 integration of the covariance-evolution system.
//! * [`threshold`]: the threshold point and the scaling parameter `α`.
//! * [`sim`]: Monte Carlo peeling on configuration-model graphs.
//! * [`cli`]: the `covevo` command-line front end.

pub mod analytic;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod matrix;
pub mod ode;
pub mod sim;
pub mod threshold;

pub use ensemble::{edge_fractions, g_coeff, state_point, tau_of_y, y_of_tau, EdgeFractions, EnsembleParams, StatePoint};
pub use error::{Error, Result};
pub use matrix::{CovarianceMatrix, Label};
