//! Gradient-flow solver for mathematical programs with complementarity
//! constraints (MPCC).
//!
//! Each complementarity pair `0 <= G ⟂ H >= 0` is relaxed with an NCP
//! function and a parameter `β`, the relaxed constraints are folded into a
//! quadratic-penalty energy `E(w, β)` with weight `λ`, and the flow
//! `dw/dt = -∇E` is integrated to an equilibrium. Driving `β → 0` and
//! `λ → ∞` over a schedule of stages approaches MPCC solutions, whose
//! stationarity class is then checked from recovered multipliers.
//!
//! ```
//! use mpcc_flow::{driver, flow::FlowConfig, suite};
//!
//! let problem = suite::mpcc1();
//! let schedule = driver::Schedule::single(1e-4, 1e6);
//! let report = driver::solve(&problem, &schedule, &[1.0, 1.0], &FlowConfig::default()).unwrap();
//! assert!(report.final_objective <= 1e-10);
//! assert_eq!(report.stationarity, driver::Stationarity::S);
//! ```

pub mod cli;
pub mod driver;
pub mod energy;
pub mod error;
pub mod flow;
pub mod model;
pub mod regularize;
pub mod suite;

pub use driver::{multi_start, solve, Schedule, SolveReport, Stationarity};
pub use energy::EnergyParams;
pub use error::{Error, Result};
pub use flow::{FlowConfig, TerminalReason, Trajectory};
pub use model::{ProblemDef, ScalarField};
