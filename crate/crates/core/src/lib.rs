//! Least-squares drift estimation for a Brownian regression model observed at
//! random times.
//!
//! The model is `Y_{τ_{i+1}} = a·τ_{i+1} + (W_{τ_{i+1}} − W_{τ_i})` where the
//! observation times come from one of two schemes:
//!
//! * **jittered**: `τ_i = i/N + ν_i` with symmetric noise on `[−1/(2N), 1/(2N)]`;
//! * **renewal**: `τ_i` is a sum of `i` exponential gaps with rate `N`, observed
//!   up to `N_α = ⌊αN⌋`.
//!
//! Modules, bottom-up:
//!
//! * [`sampling`]: time grids and the Gamma tail of the last renewal time.
//! * [`model`]: observation synthesis on a grid.
//! * [`estimator`]: the LSE `â_N`, its `A_N / D_N` decomposition and the bracket `Q_N`.
//! * [`oracle`]: exact finite-`N` moments and renewal joint densities.
//! * [`montecarlo`]: deterministic parallel replication engine and summaries.

pub mod error;
pub mod estimator;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
