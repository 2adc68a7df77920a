//! Cost functional, its relaxed variant, the derivative with respect to the
//! terminal time and the reduced gradient.
//!
//! Time integrals over `[0, tau]` use the nodal values of the integrand,
//! interpolated linearly in time and integrated exactly. On full intervals
//! this is the trapezoid rule; on the last, partial interval the weights
//! follow the interpolant, so the derivative of the discrete integral with
//! respect to `tau` is the interpolated integrand at `tau`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{inner_unchecked, integrate, Field, Grid, TimeGrid};
use crate::model::{ControlBounds, ControlField};
use crate::trajectory::{AdjointTrajectory, StateTrajectory};

/// Non-negative weights `b0..b6` of the cost functional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostWeights {
    /// control energy over the whole horizon
    pub b0: f64,
    /// phase-field tracking over `[0, tau]`
    pub b1: f64,
    /// phase-field target at `tau`
    pub b2: f64,
    /// nutrient tracking over `[0, tau]`
    pub b3: f64,
    /// tumour mass at `tau`
    pub b4: f64,
    /// linear treatment-time penalty
    pub b5: f64,
    /// quadratic pull towards the target time
    pub b6: f64,
}

impl CostWeights {
    pub fn as_array(&self) -> [f64; 7] {
        [self.b0, self.b1, self.b2, self.b3, self.b4, self.b5, self.b6]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let [b0, b1, b2, b3, b4, b5, b6] = self.as_array().map(|b| s * b);
        Self { b0, b1, b2, b3, b4, b5, b6 }
    }
}

/// Target trajectory given either once for all times or per time node.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Steady(Field),
    Nodes(Vec<Field>),
}

impl Target {
    pub fn at_node(&self, k: usize) -> &Field {
        match self {
            Target::Steady(f) => f,
            Target::Nodes(v) => &v[k],
        }
    }

    fn validate(&self, grid: &Grid, tg: &TimeGrid) -> Result<()> {
        let fields: &[Field] = match self {
            Target::Steady(f) => core::slice::from_ref(f),
            Target::Nodes(v) => {
                if v.len() != tg.nt() + 1 {
                    return Err(Error::Dimension("target needs one field per time node"));
                }
                v
            }
        };
        for f in fields {
            if f.grid() != grid {
                return Err(Error::Dimension("target grid differs from model grid"));
            }
            if !f.is_finite() {
                return Err(Error::NanDetected("target"));
            }
        }
        Ok(())
    }
}

/// Windowed nutrient penalty `(gamma / 2 eps) int_{tau-eps}^{tau} |sigma - sigma_Omega|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub gamma: f64,
    pub eps: f64,
    pub sigma_omega: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub weights: CostWeights,
    pub phi_q: Target,
    pub sigma_q: Target,
    pub phi_omega: Field,
    pub tau_star: f64,
    pub relaxation: Option<Relaxation>,
}

impl CostSpec {
    pub fn validate(&self, grid: &Grid, tg: &TimeGrid) -> Result<()> {
        let w = self.weights.as_array();
        if w.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "cost.weights",
                reason: "weights must be non-negative",
            });
        }
        if w.iter().all(|&b| b == 0.0) {
            return Err(Error::InvalidParameter {
                name: "cost.weights",
                reason: "weights must not all vanish",
            });
        }
        if !(0.0..=tg.t_final()).contains(&self.tau_star) {
            return Err(Error::InvalidParameter {
                name: "cost.tau_star",
                reason: "target time must lie in [0, T]",
            });
        }
        self.phi_q.validate(grid, tg)?;
        self.sigma_q.validate(grid, tg)?;
        if self.phi_omega.grid() != grid {
            return Err(Error::Dimension("phi_omega grid differs from model grid"));
        }
        if let Some(rel) = &self.relaxation {
            if !(rel.gamma.is_finite() && rel.gamma >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "cost.relaxation.gamma",
                    reason: "must be non-negative",
                });
            }
            if !(rel.eps.is_finite() && rel.eps > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "cost.relaxation.eps",
                    reason: "must be positive",
                });
            }
            if rel.sigma_omega.grid() != grid {
                return Err(Error::Dimension("sigma_omega grid differs from model grid"));
            }
        }
        Ok(())
    }

    /// Same targets, different weights.
    pub fn with_weights(&self, weights: CostWeights) -> Self {
        Self {
            weights,
            ..self.clone()
        }
    }
}

/// Value of every addend of the cost functional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub tracking_q: f64,
    pub tracking_omega: f64,
    pub nutrient_q: f64,
    pub tumour_mass: f64,
    pub linear_time: f64,
    pub quadratic_time: f64,
    pub control_energy: f64,
    pub relaxed_term: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.tracking_q
            + self.tracking_omega
            + self.nutrient_q
            + self.tumour_mass
            + self.linear_time
            + self.quadratic_time
            + self.control_energy
            + self.relaxed_term;
        self
    }
}

/// Weights `w_k = int_0^t hat_k(s) ds` of the nodal hat functions; the
/// returned vector covers nodes `0..=K` with `t` in `(t_{K-1}, t_K]`.
pub(crate) fn cumulative_weights(tg: &TimeGrid, t: f64) -> Result<Vec<f64>> {
    let (k, theta) = tg.locate(t)?;
    let dt = tg.dt();
    let mut w = vec![0.0; k + 1];
    if k == 0 {
        return Ok(w);
    }
    for j in 0..k - 1 {
        w[j] += 0.5 * dt;
        w[j + 1] += 0.5 * dt;
    }
    w[k - 1] += dt * (theta - 0.5 * theta * theta);
    w[k] += 0.5 * dt * theta * theta;
    Ok(w)
}

/// Nodal weights of `int_{tau-eps}^{tau}` where the integrand is extended by
/// its node-0 value for negative times.
pub(crate) fn window_weights(tg: &TimeGrid, tau: f64, eps: f64) -> Result<Vec<f64>> {
    let mut w = cumulative_weights(tg, tau)?;
    let start = tau - eps;
    if start > 0.0 {
        let lower = cumulative_weights(tg, start)?;
        for (a, b) in w.iter_mut().zip(&lower) {
            *a -= b;
        }
    } else {
        w[0] += -start;
    }
    Ok(w)
}

/// Hat-function values at `tau`: `(K, theta)` meaning weight `theta` on node
/// `K` and `1 - theta` on node `K - 1`.
fn interpolation_weights(tg: &TimeGrid, tau: f64) -> Result<(usize, f64)> {
    tg.locate(tau)
}

fn check_state(state: &StateTrajectory, cost: &CostSpec) -> Result<()> {
    if !state.is_complete() {
        return Err(Error::Dimension("state trajectory must cover every time node"));
    }
    cost.validate(state.grid(), state.time_grid())
}

fn tracking_node_values(state: &StateTrajectory, cost: &CostSpec, upto: usize) -> (Vec<f64>, Vec<f64>) {
    let w = &cost.weights;
    let mut phi = vec![0.0; upto + 1];
    let mut sig = vec![0.0; upto + 1];
    for k in 0..=upto {
        let f = state.frame(k);
        if w.b1 != 0.0 {
            phi[k] = squared_distance(&f.phi, cost.phi_q.at_node(k));
        }
        if w.b3 != 0.0 {
            sig[k] = squared_distance(&f.sigma, cost.sigma_q.at_node(k));
        }
    }
    (phi, sig)
}

fn squared_distance(a: &Field, b: &Field) -> f64 {
    let vol = a.grid().cell_volume();
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        * vol
}

/// `J(phi, sigma, u, tau)` without the relaxed term.
pub fn evaluate_cost(
    state: &StateTrajectory,
    u: &ControlField,
    tau: f64,
    cost: &CostSpec,
) -> Result<CostBreakdown> {
    check_state(state, cost)?;
    if u.time_grid() != state.time_grid() || u.grid() != state.grid() {
        return Err(Error::Dimension("control does not match the state grids"));
    }
    let tg = state.time_grid();
    let w = &cost.weights;
    let quad = cumulative_weights(tg, tau)?;
    let (phi_sq, sig_sq) = tracking_node_values(state, cost, quad.len() - 1);
    let mut out = CostBreakdown::default();
    if w.b1 != 0.0 {
        out.tracking_q = 0.5 * w.b1 * dot(&quad, &phi_sq);
    }
    if w.b3 != 0.0 {
        out.nutrient_q = 0.5 * w.b3 * dot(&quad, &sig_sq);
    }
    if w.b2 != 0.0 || w.b4 != 0.0 {
        let phi_tau = state.interpolate(1, tau)?;
        if w.b2 != 0.0 {
            out.tracking_omega = 0.5 * w.b2 * squared_distance(&phi_tau, &cost.phi_omega);
        }
        if w.b4 != 0.0 {
            out.tumour_mass = 0.5 * w.b4 * integrate(&phi_tau.map(|v| 1.0 + v));
        }
    }
    out.linear_time = w.b5 * tau;
    out.quadratic_time = 0.5 * w.b6 * (tau - cost.tau_star) * (tau - cost.tau_star);
    if w.b0 != 0.0 {
        out.control_energy = 0.5 * w.b0 * u.inner(u)?;
    }
    Ok(out.finish())
}

/// `J_eps = J + (gamma / 2 eps) int_{tau-eps}^{tau} int |sigma - sigma_Omega|^2`,
/// with `sigma(t) = sigma_0` for `t < 0`.
pub fn evaluate_cost_relaxed(
    state: &StateTrajectory,
    u: &ControlField,
    tau: f64,
    cost: &CostSpec,
) -> Result<CostBreakdown> {
    let rel = cost.relaxation.as_ref().ok_or(Error::InvalidParameter {
        name: "cost.relaxation",
        reason: "relaxed cost requested without relaxation parameters",
    })?;
    let mut out = evaluate_cost(state, u, tau, cost)?;
    let window = window_weights(state.time_grid(), tau, rel.eps)?;
    let integral: f64 = window
        .iter()
        .enumerate()
        .map(|(k, wk)| wk * squared_distance(&state.frame(k).sigma, &rel.sigma_omega))
        .sum();
    out.relaxed_term = rel.gamma / (2.0 * rel.eps) * integral;
    Ok(out.finish())
}

/// Reduced cost: relaxed when the cost carries a relaxation, plain otherwise.
pub fn evaluate_objective(
    state: &StateTrajectory,
    u: &ControlField,
    tau: f64,
    cost: &CostSpec,
) -> Result<CostBreakdown> {
    if cost.relaxation.is_some() {
        evaluate_cost_relaxed(state, u, tau, cost)
    } else {
        evaluate_cost(state, u, tau, cost)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `D_tau J_red` together with a flag telling whether `d phi / dt` had to
/// be taken as a forward difference (only at `tau = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDerivative {
    pub value: f64,
    pub lambda: f64,
    pub forward_difference: bool,
}

/// Evaluates the terminal-time derivative without rejecting `tau = 0`.
pub fn time_derivative_detailed(state: &StateTrajectory, tau: f64, cost: &CostSpec) -> Result<TimeDerivative> {
    check_state(state, cost)?;
    let tg = state.time_grid();
    let w = &cost.weights;
    let dt = tg.dt();
    let (k, theta) = interpolation_weights(tg, tau)?;
    let lower = k.saturating_sub(1);
    let blend = |a: f64, b: f64| if k == 0 { b } else { (1.0 - theta) * a + theta * b };

    let mut lambda = w.b5;
    if w.b1 != 0.0 || w.b3 != 0.0 {
        let (phi_sq, sig_sq) = tracking_node_values(state, cost, k);
        lambda += 0.5 * w.b1 * blend(phi_sq[lower], phi_sq[k]);
        lambda += 0.5 * w.b3 * blend(sig_sq[lower], sig_sq[k]);
    }

    let forward_difference = k == 0 && (w.b2 != 0.0 || w.b4 != 0.0);
    if w.b2 != 0.0 || w.b4 != 0.0 {
        let (a, b) = if k == 0 { (0, 1) } else { (k - 1, k) };
        let dphi = state.frame(b).phi.sub(&state.frame(a).phi)?.scale(1.0 / dt);
        if w.b2 != 0.0 {
            let phi_tau = state.interpolate(1, tau)?;
            let diff = phi_tau.sub(&cost.phi_omega)?;
            lambda += w.b2 * inner_unchecked(&diff, &dphi);
        }
        if w.b4 != 0.0 {
            lambda += 0.5 * w.b4 * integrate(&dphi);
        }
    }

    if let Some(rel) = &cost.relaxation {
        let node_sq = |j: usize| squared_distance(&state.frame(j).sigma, &rel.sigma_omega);
        let interp_sq = |t: f64| -> Result<f64> {
            if t <= 0.0 {
                return Ok(node_sq(0));
            }
            let (j, th) = tg.locate(t)?;
            Ok((1.0 - th) * node_sq(j - 1) + th * node_sq(j))
        };
        lambda += rel.gamma / (2.0 * rel.eps) * (interp_sq(tau)? - interp_sq(tau - rel.eps)?);
    }

    Ok(TimeDerivative {
        value: lambda + w.b6 * (tau - cost.tau_star),
        lambda,
        forward_difference,
    })
}

/// `D_tau J_red(u, tau)`. At `tau = 0` with `b2` or `b4` active the phase
/// velocity needs a forward difference; that case is reported as
/// [`Error::ForwardDifferenceRequired`] carrying the one-sided value.
pub fn time_derivative(state: &StateTrajectory, tau: f64, cost: &CostSpec) -> Result<f64> {
    let d = time_derivative_detailed(state, tau, cost)?;
    if d.forward_difference {
        return Err(Error::ForwardDifferenceRequired {
            forward_value: d.value,
        });
    }
    Ok(d.value)
}

/// `Lambda(u, tau) = D_tau J_red - b6 (tau - tau_star)`.
pub fn lambda_term(state: &StateTrajectory, tau: f64, cost: &CostSpec) -> Result<f64> {
    let d = time_derivative_detailed(state, tau, cost)?;
    if d.forward_difference {
        return Err(Error::ForwardDifferenceRequired {
            forward_value: d.value,
        });
    }
    Ok(d.lambda)
}

/// Reduced gradient `r~ + b0 u` in the L2(Q) inner product: interval `k`
/// receives the adjoint nutrient component at node `k` while `k` lies in the
/// adjoint's range, and zero beyond it.
pub fn control_gradient(adjoint: &AdjointTrajectory, u: &ControlField, b0: f64) -> Result<ControlField> {
    if adjoint.grid() != u.grid() || adjoint.time_grid() != u.time_grid() {
        return Err(Error::Dimension("adjoint and control grids differ"));
    }
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, uk)| {
            let mut g = uk.scale(b0);
            if k < adjoint.len() {
                g.axpy(1.0, &adjoint.frame(k).r)?;
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    ControlField::new(*u.time_grid(), values, ControlBounds::unbounded())
}

/// Derivatives of the state-dependent part of the cost with respect to the
/// nodal state, divided by the cell volume.
pub(crate) struct StateSources {
    /// `dJ/dphi_k` for nodes `0..=K`.
    pub phi: Vec<Field>,
    /// `dJ/dsigma_k` for nodes `0..=K`.
    pub sigma: Vec<Field>,
    /// Part of `dJ/dphi_K` coming from the pointwise-in-time terms at `tau`;
    /// kept apart because it seeds the terminal condition.
    pub terminal_phi: Field,
    pub last: usize,
}

pub(crate) fn state_sources(state: &StateTrajectory, tau: f64, cost: &CostSpec) -> Result<StateSources> {
    check_state(state, cost)?;
    let tg = state.time_grid();
    let grid = *state.grid();
    let w = &cost.weights;
    let quad = cumulative_weights(tg, tau)?;
    let last = quad.len() - 1;
    let mut phi = Vec::with_capacity(last + 1);
    let mut sigma = Vec::with_capacity(last + 1);
    for (k, &q) in quad.iter().enumerate() {
        let f = state.frame(k);
        phi.push(f.phi.sub(cost.phi_q.at_node(k))?.scale(w.b1 * q));
        sigma.push(f.sigma.sub(cost.sigma_q.at_node(k))?.scale(w.b3 * q));
    }
    if let Some(rel) = &cost.relaxation {
        let window = window_weights(tg, tau, rel.eps)?;
        let c = rel.gamma / rel.eps;
        for (k, wk) in window.iter().enumerate() {
            let d = state.frame(k).sigma.sub(&rel.sigma_omega)?;
            sigma[k].axpy(c * wk, &d)?;
        }
    }
    let (k, theta) = interpolation_weights(tg, tau)?;
    let mut terminal_phi = Field::zeros(grid);
    if w.b2 != 0.0 || w.b4 != 0.0 {
        let phi_tau = state.interpolate(1, tau)?;
        let pointwise = phi_tau
            .sub(&cost.phi_omega)?
            .map(|v| w.b2 * v + 0.5 * w.b4);
        terminal_phi = pointwise.scale(theta);
        if k > 0 && theta < 1.0 {
            phi[k - 1].axpy(1.0 - theta, &pointwise)?;
        }
    }
    Ok(StateSources {
        phi,
        sigma,
        terminal_phi,
        last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{StateFrame, Trajectory};

    fn grid() -> Grid {
        Grid::new_1d(8, 1.0).unwrap()
    }

    fn frozen_state(phi: f64, sigma: f64, nt: usize) -> StateTrajectory {
        let g = grid();
        let tg = TimeGrid::new(1.0, nt).unwrap();
        let frames = (0..=nt)
            .map(|_| StateFrame {
                mu: Field::zeros(g),
                phi: Field::constant(g, phi),
                sigma: Field::constant(g, sigma),
            })
            .collect();
        Trajectory::new(tg, frames).unwrap()
    }

    fn spec(weights: CostWeights) -> CostSpec {
        CostSpec {
            weights,
            phi_q: Target::Steady(Field::constant(grid(), 0.2)),
            sigma_q: Target::Steady(Field::constant(grid(), -0.1)),
            phi_omega: Field::constant(grid(), 0.2),
            tau_star: 0.5,
            relaxation: None,
        }
    }

    fn zero_control(nt: usize) -> ControlField {
        ControlField::constant(grid(), TimeGrid::new(1.0, nt).unwrap(), 0.0, ControlBounds::unbounded()).unwrap()
    }

    #[test]
    fn cumulative_weights_are_trapezoid_on_nodes() {
        let tg = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(cumulative_weights(&tg, 0.5).unwrap(), vec![0.125, 0.25, 0.125]);
        assert_eq!(cumulative_weights(&tg, 0.0).unwrap(), vec![0.0]);
        let w = cumulative_weights(&tg, 0.3).unwrap();
        assert!((w.iter().sum::<f64>() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn window_weights_sum_to_eps() {
        let tg = TimeGrid::new(1.0, 16).unwrap();
        for (tau, eps) in [(0.5, 0.1), (0.73, 0.2), (0.05, 0.1), (1.0, 1.0)] {
            let w = window_weights(&tg, tau, eps).unwrap();
            assert!((w.iter().sum::<f64>() - eps).abs() < 1e-14, "{tau} {eps}");
            assert!(w.iter().all(|&x| x >= -1e-17));
        }
    }

    #[test]
    fn only_b5() {
        let s = frozen_state(0.0, 0.0, 10);
        let c = spec(CostWeights { b5: 1.0, ..Default::default() });
        let j = evaluate_cost(&s, &zero_control(10), 0.3, &c).unwrap();
        assert!((j.total - 0.3).abs() < 1e-15);
        for tau in [0.1, 0.45, 0.9] {
            assert_eq!(time_derivative(&s, tau, &c).unwrap(), 1.0);
            assert_eq!(lambda_term(&s, tau, &c).unwrap(), 1.0);
        }
    }

    #[test]
    fn only_b6() {
        let s = frozen_state(0.0, 0.0, 10);
        let c = spec(CostWeights { b6: 1.0, ..Default::default() });
        let d = time_derivative(&s, 0.7, &c).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        assert_eq!(lambda_term(&s, 0.7, &c).unwrap(), 0.0);
    }

    #[test]
    fn perfect_tracking_costs_nothing() {
        let s = frozen_state(0.2, -0.1, 10);
        let c = spec(CostWeights { b1: 1.0, b2: 1.0, b3: 1.0, b6: 1.0, b0: 1.0, ..Default::default() });
        let j = evaluate_cost(&s, &zero_control(10), 0.5, &c).unwrap();
        assert_eq!(j.total, 0.0);
    }

    #[test]
    fn healthy_tissue_has_zero_tumour_mass() {
        let s = frozen_state(-1.0, 0.0, 10);
        let c = spec(CostWeights { b4: 2.0, ..Default::default() });
        let j = evaluate_cost(&s, &zero_control(10), 0.4, &c).unwrap();
        assert_eq!(j.tumour_mass, 0.0);
    }

    #[test]
    fn relaxed_term_normalisation() {
        let s = frozen_state(0.0, 1.0, 20);
        let mut c = spec(CostWeights { b5: 1.0, ..Default::default() });
        c.relaxation = Some(Relaxation {
            gamma: 0.7,
            eps: 0.25,
            sigma_omega: Field::zeros(grid()),
        });
        let j = evaluate_cost_relaxed(&s, &zero_control(20), 0.6, &c).unwrap();
        assert!((j.relaxed_term - 0.35).abs() < 1e-12);

        let mut zero = c.clone();
        zero.relaxation.as_mut().unwrap().gamma = 0.0;
        let a = evaluate_cost_relaxed(&s, &zero_control(20), 0.6, &zero).unwrap();
        let b = evaluate_cost(&s, &zero_control(20), 0.6, &zero).unwrap();
        assert_eq!(a.total.to_bits(), b.total.to_bits());

        let mut matched = c.clone();
        matched.relaxation.as_mut().unwrap().sigma_omega = Field::constant(grid(), 1.0);
        let m = evaluate_cost_relaxed(&s, &zero_control(20), 0.6, &matched).unwrap();
        assert_eq!(m.relaxed_term, 0.0);
    }

    #[test]
    fn relaxed_without_parameters_is_rejected() {
        let s = frozen_state(0.0, 1.0, 4);
        let c = spec(CostWeights { b5: 1.0, ..Default::default() });
        assert!(evaluate_cost_relaxed(&s, &zero_control(4), 0.5, &c).is_err());
    }

    #[test]
    fn forward_difference_flagged_at_origin() {
        let s = frozen_state(0.0, 0.0, 4);
        let c = spec(CostWeights { b4: 1.0, ..Default::default() });
        assert!(matches!(
            time_derivative(&s, 0.0, &c),
            Err(Error::ForwardDifferenceRequired { .. })
        ));
        let c = spec(CostWeights { b1: 1.0, ..Default::default() });
        assert!(time_derivative(&s, 0.0, &c).is_ok());
    }

    #[test]
    fn invalid_specs_rejected() {
        let tg = TimeGrid::new(1.0, 4).unwrap();
        assert!(spec(CostWeights::default()).validate(&grid(), &tg).is_err());
        assert!(spec(CostWeights { b1: -1.0, b2: 1.0, ..Default::default() })
            .validate(&grid(), &tg)
            .is_err());
        let mut c = spec(CostWeights { b1: 1.0, ..Default::default() });
        c.tau_star = 2.0;
        assert!(c.validate(&grid(), &tg).is_err());
    }
}
