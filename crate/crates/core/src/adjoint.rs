//! Backward adjoint solve: the transpose of the linearised step map, run
//! from the terminal time down to `t = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::linearized::{check_state_shape, step_coefficients, ExplicitCoupling};
use crate::model::ModelParams;
use crate::objective::{state_sources, CostSpec};
use crate::scheme::{self, MU, PHI, SIGMA};
use crate::trajectory::{AdjointFrame, AdjointTrajectory, StateTrajectory, Trajectory};

/// `beta q(tau) = b2 (phi(tau) - phi_Omega) + b4/2`, `p(tau) = r(tau) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTerminalData {
    pub q_terminal: Field,
    pub p_terminal: Field,
    pub r_terminal: Field,
}

impl AdjointTerminalData {
    /// Terminal data at node `tau_index`.
    pub fn new(params: &ModelParams, state: &StateTrajectory, tau_index: usize, cost: &CostSpec) -> Result<Self> {
        let tau = params.time_grid.node(tau_index);
        Self::at_time(params, state, tau, cost)
    }

    fn at_time(params: &ModelParams, state: &StateTrajectory, tau: f64, cost: &CostSpec) -> Result<Self> {
        let src = state_sources(state, tau, cost)?;
        Ok(Self::from_terminal_phi(params, &src.terminal_phi))
    }

    fn from_terminal_phi(params: &ModelParams, terminal_phi: &Field) -> Self {
        Self {
            q_terminal: terminal_phi.scale(1.0 / params.beta),
            p_terminal: Field::zeros(params.grid),
            r_terminal: Field::zeros(params.grid),
        }
    }

    fn into_frame(self) -> AdjointFrame {
        AdjointFrame {
            q: self.q_terminal,
            p: self.p_terminal,
            r: self.r_terminal,
        }
    }
}

/// Adjoint on nodes `0..=tau_index` with terminal data at `t_{tau_index}`.
pub fn solve_adjoint(
    params: &ModelParams,
    state: &StateTrajectory,
    tau_index: usize,
    cost: &CostSpec,
) -> Result<AdjointTrajectory> {
    let nt = params.time_grid.nt();
    if tau_index > nt {
        return Err(Error::InvalidTauIndex { index: tau_index, nt });
    }
    solve_adjoint_at_time(params, state, params.time_grid.node(tau_index), cost)
}

/// Adjoint for an arbitrary terminal time `tau` in `[0, T]`.
///
/// With `tau` in `(t_{K-1}, t_K]` the cost depends on the state up to node
/// `K` through linear interpolation; the pointwise-in-time terms at `tau`
/// are split between the terminal condition at node `K` (weight `theta`)
/// and a source at node `K-1` (weight `1 - theta`). On a node this is the
/// plain terminal condition.
pub fn solve_adjoint_at_time(
    params: &ModelParams,
    state: &StateTrajectory,
    tau: f64,
    cost: &CostSpec,
) -> Result<AdjointTrajectory> {
    params.validate()?;
    check_state_shape(params, state)?;
    let grid = params.grid;
    let n = grid.cell_count();
    let dt = params.dt();
    let src = state_sources(state, tau, cost)?;
    let last = src.last;

    let terminal = AdjointTerminalData::from_terminal_phi(params, &src.terminal_phi);
    let mut frames: Vec<AdjointFrame> = Vec::with_capacity(last + 1);
    frames.push(terminal.into_frame());
    if !frames[0].q.is_finite() {
        return Err(Error::NanDetected("adjoint terminal data"));
    }

    // Interleaved (p, q, r) of the node just above the one being solved.
    let mut above = interleave_adjoint(&frames[0]);
    for j in (0..last).rev() {
        let lu = scheme::factor_jacobian(params, &step_coefficients(params, state, j)?, true)?;
        let coupling = if j + 1 < last {
            Some(ExplicitCoupling::new(params, state, j + 1)?)
        } else {
            None
        };
        let c_phi = src.phi[j + 1].values();
        let c_sig = src.sigma[j + 1].values();
        let mut rhs = vec![0.0; 3 * n];
        for i in 0..n {
            let (p, q, r) = (above[3 * i], above[3 * i + 1], above[3 * i + 2]);
            rhs[3 * i + MU] = params.alpha * p / dt;
            rhs[3 * i + PHI] = (c_phi[i] + p + params.beta * q) / dt;
            rhs[3 * i + SIGMA] = (c_sig[i] + r) / dt;
            if let Some(cp) = &coupling {
                rhs[3 * i + PHI] -= cp.smooth_curv[i] * q + cp.exchange_slope[i] * (r - p);
            }
        }
        lu.solve_in_place(&mut rhs);
        scheme::check_finite(&rhs, "adjoint state")?;
        above = rhs;
        let [p, q, r] = scheme::deinterleave(&above);
        frames.push(AdjointFrame {
            q: Field::from_values(grid, q)?,
            p: Field::from_values(grid, p)?,
            r: Field::from_values(grid, r)?,
        });
    }
    frames.reverse();
    Trajectory::new(params.time_grid, frames)
}

fn interleave_adjoint(frame: &AdjointFrame) -> Vec<f64> {
    scheme::interleave(frame.p.values(), frame.q.values(), frame.r.values())
}
