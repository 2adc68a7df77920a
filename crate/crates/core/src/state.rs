//! Forward solve of the state system.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{integrate, Field};
use crate::model::{ControlField, InitialData, ModelParams};
use crate::potential::Potential;
use crate::scheme::{self, StepCoefficients, PHI};
use crate::trajectory::{StateFrame, StateTrajectory, Trajectory};

/// Inner Newton iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Tolerance on the residual infinity norm, relative to
    /// `1 + |E X_k / dt|_inf + |u_k|_inf` (the size of the data of the
    /// step). Iteration also stops once the Newton update reaches round-off.
    pub tol: f64,
    /// Iterates of a singular potential are kept this far inside its domain.
    pub clamp_margin: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-13,
            clamp_margin: 1e-6,
        }
    }
}

/// Per-step diagnostics of a forward solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Index of the node reached by this step.
    pub step: usize,
    pub newton_iters: usize,
    pub residual: f64,
    /// Relative defect of the discrete mass identity after this step.
    pub mass_residual: f64,
    /// Distance of `phi` to the potential's domain boundary; infinite for
    /// the quartic potential.
    pub delta_sep: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSolution {
    pub trajectory: StateTrajectory,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Solves the state system with default Newton settings.
pub fn solve_state(params: &ModelParams, init: &InitialData, u: &ControlField) -> Result<StateSolution> {
    solve_state_with(params, init, u, &NewtonOptions::default())
}

pub fn solve_state_with(
    params: &ModelParams,
    init: &InitialData,
    u: &ControlField,
    opts: &NewtonOptions,
) -> Result<StateSolution> {
    params.validate()?;
    init.validate(params)?;
    if *u.time_grid() != params.time_grid || *u.grid() != params.grid {
        return Err(Error::Dimension("control does not match the model grids"));
    }
    if !u.is_finite() {
        return Err(Error::NanDetected("control"));
    }

    let grid = params.grid;
    let n = grid.cell_count();
    let nt = params.time_grid.nt();
    let dt = params.dt();
    let (lower, upper) = params.potential.domain();

    let mass_of = |x: &[f64]| -> f64 {
        let vol = grid.cell_volume();
        x.chunks_exact(3)
            .map(|c| params.alpha * c[0] + c[1] + c[2])
            .sum::<f64>()
            * vol
    };

    let mut frames = Vec::with_capacity(nt + 1);
    frames.push(init.as_frame());
    let mut diagnostics = Vec::with_capacity(nt);

    let mut old = scheme::interleave(init.mu0.values(), init.phi0.values(), init.sigma0.values());
    let mass0 = mass_of(&old);
    let mut injected = 0.0;
    let mut res = vec![0.0; 3 * n];

    for k in 0..nt {
        let phi_old: Vec<f64> = old.chunks_exact(3).map(|c| c[PHI]).collect();
        let prolif = scheme::prolif_values(params, &phi_old, 0)?;
        let smooth = scheme::smooth_values(params, &phi_old, 1)?;
        let control = u.interval(k).values();

        let scale = 1.0
            + old
                .chunks_exact(3)
                .map(|c| {
                    (params.alpha * c[0] + c[1])
                        .abs()
                        .max((params.beta * c[1]).abs())
                        .max(c[2].abs())
                })
                .fold(0.0, f64::max)
                / dt
            + scheme::max_abs(control);

        let mut new = old.clone();
        let mut iters = 0;
        let mut rnorm;
        let mut stalled = false;
        loop {
            scheme::residual(params, &old, &new, &prolif, &smooth, control, &mut res)?;
            rnorm = scheme::max_abs(&res);
            if !rnorm.is_finite() {
                return Err(Error::NanDetected("state residual"));
            }
            if rnorm <= opts.tol * scale || stalled {
                break;
            }
            if iters == opts.max_iter {
                return Err(Error::NewtonDivergence {
                    step: k + 1,
                    iterations: iters,
                    residual: rnorm,
                });
            }
            let phi_new: Vec<f64> = new.chunks_exact(3).map(|c| c[PHI]).collect();
            let coeffs = StepCoefficients {
                prolif: prolif.clone(),
                convex_curv: scheme::convex_values(params, &phi_new, 2)?,
            };
            let lu = scheme::factor_jacobian(params, &coeffs, false)?;
            lu.solve_in_place(&mut res);
            let update = scheme::max_abs(&res);
            for (x, d) in new.iter_mut().zip(&res) {
                *x -= d;
            }
            // Updates at round-off level: the residual cannot drop further.
            stalled = update <= 1e-14 * (1.0 + scheme::max_abs(&new));
            if params.potential.is_singular() {
                let lo = lower + opts.clamp_margin;
                let hi = upper - opts.clamp_margin;
                for c in new.chunks_exact_mut(3) {
                    c[PHI] = c[PHI].clamp(lo, hi);
                }
            }
            iters += 1;
        }
        scheme::check_finite(&new, "state")?;

        let delta_sep = separation_of(new.chunks_exact(3).map(|c| c[PHI]), &params.potential);
        if params.potential.is_singular() && delta_sep <= opts.clamp_margin {
            let value = new
                .chunks_exact(3)
                .map(|c| c[PHI])
                .fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
            return Err(Error::SeparationViolation { step: k + 1, value });
        }

        injected += dt * integrate(u.interval(k));
        let mass_residual = (mass_of(&new) - mass0 - injected).abs() / (1.0 + mass0.abs());
        diagnostics.push(StepDiagnostics {
            step: k + 1,
            newton_iters: iters,
            residual: rnorm,
            mass_residual,
            delta_sep,
        });

        frames.push(frame_from(&new, params)?);
        old = new;
    }

    Ok(StateSolution {
        trajectory: Trajectory::new(params.time_grid, frames)?,
        diagnostics,
    })
}

fn frame_from(x: &[f64], params: &ModelParams) -> Result<StateFrame> {
    let [mu, phi, sigma] = scheme::deinterleave(x);
    Ok(StateFrame {
        mu: Field::from_values(params.grid, mu)?,
        phi: Field::from_values(params.grid, phi)?,
        sigma: Field::from_values(params.grid, sigma)?,
    })
}

fn separation_of(phi: impl Iterator<Item = f64>, potential: &Potential) -> f64 {
    let (lower, upper) = potential.domain();
    phi.map(|v| (v - lower).min(upper - v)).fold(f64::INFINITY, f64::min)
}

/// Smallest distance of the phase field to the potential's domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub delta_sep: f64,
    pub argmin_frame: usize,
}

pub fn separation_report(traj: &StateTrajectory, potential: &Potential) -> SeparationReport {
    let mut report = SeparationReport {
        delta_sep: f64::INFINITY,
        argmin_frame: 0,
    };
    for (k, frame) in traj.frames().iter().enumerate() {
        let d = separation_of(frame.phi.values().iter().copied(), potential);
        if d < report.delta_sep {
            report = SeparationReport {
                delta_sep: d,
                argmin_frame: k,
            };
        }
    }
    report
}
