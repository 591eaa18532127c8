//! Worst-case line-outage screening for lossless AC power networks.
//!
//! Given a network with balanced injections, the library searches for the K
//! transmission-line outages that force the largest load shed, under the
//! active-power model `E D diag(gamma) sin(E' theta) = P + z` with box
//! limits on the adjustments and a pi/2 angle limit per line. The power-flow
//! equation is moved into the objective as a quadratic penalty and the
//! resulting nonconvex problem is minimized by a Gauss-Seidel proximal
//! alternating linearized method whose three subproblems are a closed-form
//! binary projection, a box-plus-hyperplane projection, and a polyhedral
//! projection solved on its dual.
//!
//! The iteration is deterministic and the objective is provably nonincreasing
//! along the iterates, which the driver checks at runtime.
//!
//! # Quick start
//!
//! ```
//! use loadshed::caseio::Rebalance;
//! use loadshed::palm::{self, SolverConfig};
//! use loadshed::runner;
//!
//! let net = runner::load_network("toy2bus", Rebalance::Proportional).unwrap();
//! let config = SolverConfig { k: 1, max_iters: 100, ..SolverConfig::default() };
//! let report = palm::solve(&net, &config).unwrap();
//! assert_eq!(report.removed_lines, vec![1]);
//! ```
//!
//! The `examples/` directory has one runnable program per capability
//! (validation, single solves, K-sweeps, rho-sweeps, gradient checking,
//! exhaustive small-instance comparison, and trace reading);
//! `cargo run --example sweep_k` produces the bundled-case tables. A thin
//! `loadshed` binary wraps [`runner::run`] for shell use.

pub mod caseio;
pub mod error;
pub mod netmodel;
pub mod objective;
pub mod palm;
pub mod projections;
pub mod runner;
pub mod spectral;

pub use caseio::{build_network, parse_case, RawCase, Rebalance};
pub use netmodel::{DecisionState, PowerNetwork};
pub use palm::{solve, SolveReport, SolverConfig};
