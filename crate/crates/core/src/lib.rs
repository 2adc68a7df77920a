//! Optimal control of a viscous Cahn–Hilliard tumour-growth model with a
//! free terminal time.
//!
//! The state `(mu, phi, sigma)` solves
//!
//! ```text
//! alpha d_t mu + d_t phi - Δmu = P(phi)(sigma - mu)
//! mu = beta d_t phi - Δphi + F'(phi)
//! d_t sigma - Δsigma = -P(phi)(sigma - mu) + u
//! ```
//!
//! with homogeneous Neumann conditions, on a 1D or 2D tensor grid. The
//! crate provides the forward solver, the linearised and adjoint solvers
//! (exact algebraic partners of the forward scheme), the cost functional
//! with its terminal-time derivative, a projected-gradient optimiser over
//! `(u, tau)` and a set of verification oracles.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

mod banded;
mod scheme;

pub mod adjoint;
pub mod error;
pub mod grid;
pub mod linearized;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod potential;
pub mod presets;
pub mod state;
pub mod trajectory;
pub mod verification;

pub use adjoint::{solve_adjoint, solve_adjoint_at_time, AdjointTerminalData};
pub use error::{Error, Result};
pub use grid::{inner, integrate, laplacian_neumann, Field, Grid, TimeGrid};
pub use linearized::solve_linearized;
pub use model::{project_control, BoundValue, ControlBounds, ControlField, InitialData, ModelParams};
pub use objective::{
    control_gradient, evaluate_cost, evaluate_cost_relaxed, evaluate_objective, lambda_term,
    time_derivative, time_derivative_detailed, CostBreakdown, CostSpec, CostWeights, Relaxation,
    Target, TimeDerivative,
};
pub use optimizer::{
    classify_time_optimality, optimize, ArmijoConfig, IterationRecord, OptResult, OptimizerConfig,
    Termination, TimeCase, TimeOptimalityReport,
};
pub use potential::{Potential, Proliferation, SplitPart};
pub use presets::{preset_initial_data, Preset};
pub use state::{
    separation_report, solve_state, solve_state_with, NewtonOptions, SeparationReport,
    StateSolution, StepDiagnostics,
};
pub use trajectory::{
    interpolate_in_time, AdjointFrame, AdjointTrajectory, FieldTriple, SensitivityFrame,
    SensitivityTrajectory, StateFrame, StateTrajectory, Trajectory,
};
