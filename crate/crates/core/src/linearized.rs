//! Directional derivative of the control-to-state map.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{ControlField, ModelParams};
use crate::scheme::{self, StepCoefficients, MU, PHI, SIGMA};
use crate::trajectory::{SensitivityFrame, SensitivityTrajectory, StateTrajectory, Trajectory};

/// Explicit-side couplings of step `k -> k+1`, shared with the adjoint.
pub(crate) struct ExplicitCoupling {
    /// `P'(phi_k) (sigma_{k+1} - mu_{k+1})`
    pub exchange_slope: Vec<f64>,
    /// `pi'(phi_k)`
    pub smooth_curv: Vec<f64>,
}

impl ExplicitCoupling {
    pub fn new(params: &ModelParams, state: &StateTrajectory, k: usize) -> Result<Self> {
        let old = state.frame(k);
        let new = state.frame(k + 1);
        let slope = scheme::prolif_values(params, old.phi.values(), 1)?;
        let exchange_slope = slope
            .iter()
            .zip(new.sigma.values().iter().zip(new.mu.values()))
            .map(|(p, (s, m))| p * (s - m))
            .collect();
        Ok(Self {
            exchange_slope,
            smooth_curv: scheme::smooth_values(params, old.phi.values(), 2)?,
        })
    }
}

pub(crate) fn step_coefficients(params: &ModelParams, state: &StateTrajectory, k: usize) -> Result<StepCoefficients> {
    StepCoefficients::new(
        params,
        state.frame(k).phi.values(),
        state.frame(k + 1).phi.values(),
    )
}

pub(crate) fn check_state_shape(params: &ModelParams, state: &StateTrajectory) -> Result<()> {
    if *state.grid() != params.grid || *state.time_grid() != params.time_grid || !state.is_complete() {
        return Err(Error::Dimension("state trajectory does not match the model grids"));
    }
    Ok(())
}

/// Solves the linearised system along `h`, i.e. the exact derivative of the
/// discrete state update. Frame 0 is zero.
pub fn solve_linearized(
    params: &ModelParams,
    state: &StateTrajectory,
    h: &ControlField,
) -> Result<SensitivityTrajectory> {
    check_state_shape(params, state)?;
    if *h.grid() != params.grid || *h.time_grid() != params.time_grid {
        return Err(Error::Dimension("perturbation does not match the model grids"));
    }
    let grid = params.grid;
    let n = grid.cell_count();
    let nt = params.time_grid.nt();
    let dt = params.dt();

    let mut frames = Vec::with_capacity(nt + 1);
    frames.push(SensitivityFrame::zeros_on(grid));
    let mut y = vec![0.0; 3 * n];
    for k in 0..nt {
        let coupling = ExplicitCoupling::new(params, state, k)?;
        let lu = scheme::factor_jacobian(params, &step_coefficients(params, state, k)?, false)?;
        let hk = h.interval(k).values();
        let mut rhs = vec![0.0; 3 * n];
        for i in 0..n {
            let (eta, theta, rho) = (y[3 * i + MU], y[3 * i + PHI], y[3 * i + SIGMA]);
            let s = coupling.exchange_slope[i];
            rhs[3 * i + MU] = (params.alpha * eta + theta) / dt + s * theta;
            rhs[3 * i + PHI] = params.beta * theta / dt - coupling.smooth_curv[i] * theta;
            rhs[3 * i + SIGMA] = rho / dt - s * theta + hk[i];
        }
        lu.solve_in_place(&mut rhs);
        scheme::check_finite(&rhs, "linearized state")?;
        y = rhs;
        let [eta, theta, rho] = scheme::deinterleave(&y);
        frames.push(SensitivityFrame {
            eta: Field::from_values(grid, eta)?,
            theta: Field::from_values(grid, theta)?,
            rho: Field::from_values(grid, rho)?,
        });
    }
    Trajectory::new(params.time_grid, frames)
}

impl SensitivityFrame {
    fn zeros_on(grid: crate::grid::Grid) -> Self {
        <Self as crate::trajectory::FieldTriple>::zeros(grid)
    }
}
