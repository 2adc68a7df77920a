//! Block-coordinate projected-gradient minimisation over `(u, tau)`.

use alloc::vec::Vec;

use crate::adjoint::solve_adjoint_at_time;
use crate::error::{Error, Result};
use crate::model::{ControlField, InitialData, ModelParams};
use crate::objective::{control_gradient, evaluate_objective, time_derivative_detailed, CostBreakdown, CostSpec};
use crate::state::{solve_state_with, NewtonOptions};
use crate::trajectory::{AdjointTrajectory, StateTrajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoConfig {
    pub c1: f64,
    pub backtrack: f64,
    /// First trial step of the first control line search.
    pub s0: f64,
    pub max_backtracks: usize,
    /// Start later control line searches from the Barzilai–Borwein step
    /// instead of `s0`.
    pub bb_initial_step: bool,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            backtrack: 0.5,
            s0: 1.0,
            max_backtracks: 30,
            bb_initial_step: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_outer_iters: usize,
    pub armijo: ArmijoConfig,
    /// Stationarity tolerance for both blocks (relative measures, see
    /// [`IterationRecord`]).
    pub grad_tol: f64,
    /// First trial step of the terminal-time line search.
    pub tau_step_scale: f64,
    /// Terminal-time line searches per outer iteration; the state is fixed
    /// during these so they cost no solves.
    pub max_tau_steps: usize,
    pub newton: NewtonOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 500,
            armijo: ArmijoConfig::default(),
            grad_tol: 1e-6,
            tau_step_scale: 1.0,
            max_tau_steps: 50,
            newton: NewtonOptions::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        if !(a.c1 > 0.0 && a.c1 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "optimizer.armijo.c1",
                reason: "must lie in (0, 1)",
            });
        }
        if !(a.backtrack > 0.0 && a.backtrack < 1.0) {
            return Err(Error::InvalidParameter {
                name: "optimizer.armijo.backtrack",
                reason: "must lie in (0, 1)",
            });
        }
        if !(a.s0 > 0.0 && self.tau_step_scale > 0.0 && self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "optimizer",
                reason: "step scales and tolerances must be positive",
            });
        }
        Ok(())
    }
}

/// Position of the terminal time relative to `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeCase {
    BoundaryLow,
    Interior,
    BoundaryHigh,
}

impl TimeCase {
    /// Within `dt/2` of an endpoint counts as that endpoint.
    pub fn classify(tau: f64, t_final: f64, dt: f64) -> Self {
        if tau <= 0.5 * dt {
            TimeCase::BoundaryLow
        } else if tau >= t_final - 0.5 * dt {
            TimeCase::BoundaryHigh
        } else {
            TimeCase::Interior
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TimeCase::BoundaryLow => "boundary_low",
            TimeCase::Interior => "interior",
            TimeCase::BoundaryHigh => "boundary_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOptimalityReport {
    pub case: TimeCase,
    pub derivative: f64,
    pub lambda: f64,
    /// Whether the sign condition of the detected case holds within `tol`.
    pub consistent: bool,
    /// `|tau - (tau_star - Lambda / b6)|` for an interior `tau` and `b6 > 0`.
    pub fixed_point_residual: Option<f64>,
}

/// Checks the first-order condition in `tau`:
/// `D_tau J >= 0` at `tau = 0`, `= 0` inside, `<= 0` at `tau = T`.
pub fn classify_time_optimality(
    state: &StateTrajectory,
    tau: f64,
    cost: &CostSpec,
    tol: f64,
) -> Result<TimeOptimalityReport> {
    let tg = state.time_grid();
    let d = time_derivative_detailed(state, tau, cost)?;
    let case = TimeCase::classify(tau, tg.t_final(), tg.dt());
    let consistent = match case {
        TimeCase::BoundaryLow => d.value >= -tol,
        TimeCase::Interior => d.value.abs() <= tol,
        TimeCase::BoundaryHigh => d.value <= tol,
    };
    let b6 = cost.weights.b6;
    let fixed_point_residual = if case == TimeCase::Interior && b6 != 0.0 {
        Some((tau - (cost.tau_star - d.lambda / b6)).abs())
    } else {
        None
    };
    Ok(TimeOptimalityReport {
        case,
        derivative: d.value,
        lambda: d.lambda,
        consistent,
        fixed_point_residual,
    })
}

/// One row of the optimisation history, recorded before the steps of that
/// iteration are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: CostBreakdown,
    pub tau: f64,
    /// `|u - P(u - grad / b0)| / (1 + |u|)`, or with unit step when `b0 = 0`.
    pub u_stationarity: f64,
    /// `|tau - clamp(tau - D_tau J)| / (1 + |J|)`.
    pub tau_stationarity: f64,
    pub time_derivative: f64,
    pub time_case: TimeCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No Armijo decrease was found; the result holds the last iterate.
    LineSearchFailure { iteration: usize },
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub u_opt: ControlField,
    pub tau_opt: f64,
    pub state: StateTrajectory,
    pub adjoint: AdjointTrajectory,
    pub gradient: ControlField,
    pub cost: CostBreakdown,
    pub history: Vec<IterationRecord>,
    pub time_case: TimeCase,
    pub termination: Termination,
}

struct Evaluation {
    state: StateTrajectory,
    cost: CostBreakdown,
}

fn evaluate(
    params: &ModelParams,
    init: &InitialData,
    cost: &CostSpec,
    u: &ControlField,
    tau: f64,
    newton: &NewtonOptions,
) -> Result<Evaluation> {
    let state = solve_state_with(params, init, u, newton)?.trajectory;
    let breakdown = evaluate_objective(&state, u, tau, cost)?;
    Ok(Evaluation {
        state,
        cost: breakdown,
    })
}

/// Projected-gradient residual `u - P(u - step * grad)`.
fn projected_residual(u: &ControlField, grad: &ControlField, step: f64) -> Result<f64> {
    let moved = u.add_scaled(-step, grad)?.project();
    Ok(u.sub(&moved)?.norm_l2())
}

/// Minimises the reduced cost over `U_ad x [0, T]`.
///
/// Each outer iteration solves the state, solves the adjoint at the current
/// `tau`, takes one projected Armijo step in `u` along the reduced gradient
/// and then projected Armijo steps in `tau` along `-D_tau J`. Iteration
/// stops when both stationarity measures fall below `grad_tol` with the
/// node containing `tau` unchanged over the last two iterations.
pub fn optimize(
    params: &ModelParams,
    init: &InitialData,
    cost: &CostSpec,
    config: &OptimizerConfig,
    u0: &ControlField,
    tau0: f64,
) -> Result<OptResult> {
    params.validate()?;
    config.validate()?;
    cost.validate(&params.grid, &params.time_grid)?;
    let tg = params.time_grid;
    let t_final = tg.t_final();
    let armijo = &config.armijo;
    let b0 = cost.weights.b0;
    let u_scale = if b0 > 0.0 { 1.0 / b0 } else { 1.0 };

    let mut u = u0.project();
    let mut tau = tau0.clamp(0.0, t_final);
    let mut current = evaluate(params, init, cost, &u, tau, &config.newton)?;
    let mut history = Vec::new();
    let mut previous_node: Option<usize> = None;
    let mut stable_hits = 0usize;
    let mut last_step: Option<(ControlField, ControlField, f64)> = None;
    let mut termination = Termination::MaxIterations;

    for iteration in 0..=config.max_outer_iters {
        let adjoint = solve_adjoint_at_time(params, &current.state, tau, cost)?;
        let grad = control_gradient(&adjoint, &u, b0)?;
        let u_stat = projected_residual(&u, &grad, u_scale)? / (1.0 + u.norm_l2());
        let d_tau = time_derivative_detailed(&current.state, tau, cost)?.value;
        let j_scale = 1.0 + current.cost.total.abs();
        let tau_stat = (tau - (tau - d_tau).clamp(0.0, t_final)).abs() / j_scale;
        let case = TimeCase::classify(tau, t_final, tg.dt());
        history.push(IterationRecord {
            iteration,
            cost: current.cost,
            tau,
            u_stationarity: u_stat,
            tau_stationarity: tau_stat,
            time_derivative: d_tau,
            time_case: case,
        });

        let node = tg.locate(tau)?.0;
        if previous_node == Some(node) {
            stable_hits += 1;
        } else {
            stable_hits = 0;
        }
        previous_node = Some(node);
        if u_stat <= config.grad_tol && tau_stat <= config.grad_tol && stable_hits >= 1 {
            termination = Termination::Converged;
            return Ok(finish(u, tau, current, adjoint, grad, history, termination, tg.dt()));
        }
        if iteration == config.max_outer_iters {
            return Ok(finish(u, tau, current, adjoint, grad, history, termination, tg.dt()));
        }

        // Control block.
        if u_stat > config.grad_tol {
            let mut step = match (&last_step, armijo.bb_initial_step) {
                (Some((du, g_old, prev)), true) => {
                    let dg = grad.sub(g_old)?;
                    let num = du.inner(du)?;
                    let den = du.inner(&dg)?;
                    if den > 0.0 && num > 0.0 {
                        (num / den).clamp(1e-10, 1e10)
                    } else {
                        2.0 * prev
                    }
                }
                (Some((_, _, prev)), false) => prev.max(armijo.s0),
                (None, _) => armijo.s0,
            };
            let mut accepted = None;
            for _ in 0..=armijo.max_backtracks {
                let trial = u.add_scaled(-step, &grad)?.project();
                let delta = trial.sub(&u)?;
                let predicted = grad.inner(&delta)?;
                if predicted >= 0.0 {
                    step *= armijo.backtrack;
                    continue;
                }
                let eval = evaluate(params, init, cost, &trial, tau, &config.newton)?;
                if eval.cost.total <= current.cost.total + armijo.c1 * predicted {
                    accepted = Some((trial, delta, eval));
                    break;
                }
                step *= armijo.backtrack;
            }
            match accepted {
                Some((trial, delta, eval)) => {
                    last_step = Some((delta, grad.clone(), step));
                    u = trial;
                    current = eval;
                }
                None => {
                    termination = Termination::LineSearchFailure { iteration };
                    return Ok(finish(u, tau, current, adjoint, grad, history, termination, tg.dt()));
                }
            }
        }

        // Terminal-time block: the state does not depend on tau.
        for _ in 0..config.max_tau_steps {
            let d = time_derivative_detailed(&current.state, tau, cost)?.value;
            let stat = (tau - (tau - d).clamp(0.0, t_final)).abs() / (1.0 + current.cost.total.abs());
            if stat <= 0.1 * config.grad_tol {
                break;
            }
            let mut step = config.tau_step_scale;
            let mut moved = false;
            for _ in 0..=armijo.max_backtracks {
                let trial = (tau - step * d).clamp(0.0, t_final);
                let predicted = d * (trial - tau);
                if predicted < 0.0 {
                    let j = evaluate_objective(&current.state, &u, trial, cost)?;
                    if j.total <= current.cost.total + armijo.c1 * predicted {
                        tau = trial;
                        current.cost = j;
                        moved = true;
                        break;
                    }
                }
                step *= armijo.backtrack;
            }
            if !moved {
                break;
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

#[allow(clippy::too_many_arguments)]
fn finish(
    u: ControlField,
    tau: f64,
    current: Evaluation,
    adjoint: AdjointTrajectory,
    gradient: ControlField,
    history: Vec<IterationRecord>,
    termination: Termination,
    dt: f64,
) -> OptResult {
    let t_final = current.state.time_grid().t_final();
    OptResult {
        u_opt: u,
        tau_opt: tau,
        time_case: TimeCase::classify(tau, t_final, dt),
        state: current.state,
        adjoint,
        gradient,
        cost: current.cost,
        history,
        termination,
    }
}
