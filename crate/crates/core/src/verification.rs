//! Independent oracles for the gradient, the adjoint duality identity, the
//! Lipschitz stability of the control-to-state map and mass balance.
//!
//! Random directions are drawn from a seeded ChaCha generator, standard
//! normal per cell and interval, then normalised in L2(Q); reports are
//! therefore reproducible bit for bit.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::adjoint::solve_adjoint_at_time;
use crate::error::Result;
use crate::grid::{inner_unchecked, integrate, Field};
use crate::linearized::solve_linearized;
use crate::model::{ControlBounds, ControlField, InitialData, ModelParams};
use crate::objective::{control_gradient, cumulative_weights, evaluate_objective, window_weights, CostSpec};
use crate::state::solve_state;
use crate::trajectory::StateTrajectory;

pub const DEFAULT_SEED: u64 = 0x5EED_C0DE;

/// `count` unit-norm directions shaped like `like`.
pub fn random_directions(like: &ControlField, count: usize, seed: u64) -> Result<Vec<ControlField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *like.grid();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let values = (0..like.values().len())
            .map(|_| {
                let v = (0..grid.cell_count())
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                Field::from_values(grid, v)
            })
            .collect::<Result<Vec<_>>>()?;
        let h = ControlField::new(*like.time_grid(), values, ControlBounds::unbounded())?;
        let norm = h.norm_l2();
        out.push(h.scale(1.0 / norm));
    }
    Ok(out)
}

fn relative_gap(a: f64, b: f64, abs_floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= abs_floor {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Least-squares slope of `log(err)` against `log(delta)`.
fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(d, e)| (libm::log(*d), libm::log(*e)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientProbe {
    pub direction: usize,
    pub delta: f64,
    /// `<grad J_red, h>`
    pub analytic: f64,
    /// `(J(u + delta h) - J(u - delta h)) / (2 delta)`
    pub finite_difference: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    pub probes: Vec<GradientProbe>,
    /// Log-log slope of the error against `delta`, one per direction.
    pub slopes: Vec<Option<f64>>,
}

impl GradientCheckReport {
    pub fn max_rel_error_at(&self, delta: f64) -> f64 {
        self.probes
            .iter()
            .filter(|p| p.delta == delta)
            .map(|p| p.rel_error)
            .fold(0.0, f64::max)
    }

    pub fn slope_range(&self) -> Option<(f64, f64)> {
        let s: Vec<f64> = self.slopes.iter().flatten().copied().collect();
        if s.is_empty() {
            return None;
        }
        Some((
            s.iter().copied().fold(f64::INFINITY, f64::min),
            s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ))
    }
}

/// Compares the adjoint gradient against central differences of the
/// reduced cost for `directions` random directions and every `delta`.
/// `slope_deltas` (may be empty) are extra step sizes used only for the
/// convergence-order fit.
#[allow(clippy::too_many_arguments)]
pub fn fd_gradient_check(
    params: &ModelParams,
    init: &InitialData,
    cost: &CostSpec,
    u: &ControlField,
    tau: f64,
    directions: usize,
    deltas: &[f64],
    slope_deltas: &[f64],
    seed: u64,
) -> Result<GradientCheckReport> {
    let state = solve_state(params, init, u)?.trajectory;
    let adjoint = solve_adjoint_at_time(params, &state, tau, cost)?;
    let grad = control_gradient(&adjoint, u, cost.weights.b0)?;
    let j_red = |v: &ControlField| -> Result<f64> {
        let s = solve_state(params, init, v)?.trajectory;
        Ok(evaluate_objective(&s, v, tau, cost)?.total)
    };
    let mut probes = Vec::new();
    let mut slopes = Vec::new();
    for (d, h) in random_directions(u, directions, seed)?.iter().enumerate() {
        let analytic = grad.inner(h)?;
        let mut fit = Vec::new();
        for (i, &delta) in deltas.iter().chain(slope_deltas).enumerate() {
            let plus = j_red(&u.add_scaled(delta, h)?)?;
            let minus = j_red(&u.add_scaled(-delta, h)?)?;
            let fd = (plus - minus) / (2.0 * delta);
            let err = relative_gap(analytic, fd, 0.0);
            if i < deltas.len() {
                probes.push(GradientProbe {
                    direction: d,
                    delta,
                    analytic,
                    finite_difference: fd,
                    rel_error: err,
                });
            }
            if slope_deltas.is_empty() || i >= deltas.len() {
                fit.push((delta, err));
            }
        }
        slopes.push(loglog_slope(&fit));
    }
    Ok(GradientCheckReport { probes, slopes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityProbe {
    /// `int_{Q_tau} r h`
    pub adjoint_side: f64,
    /// Cost derivative along the linearised state.
    pub sensitivity_side: f64,
    pub rel_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub probes: Vec<DualityProbe>,
}

impl DualityReport {
    pub fn max_rel_mismatch(&self) -> f64 {
        self.probes.iter().map(|p| p.rel_mismatch).fold(0.0, f64::max)
    }
}

/// Checks `int_{Q_tau} r h = b1 int (phi - phi_Q) theta + b2 int (phi(tau) -
/// phi_Omega) theta(tau) + b3 int (sigma - sigma_Q) rho + b4/2 int theta(tau)
/// (+ the relaxed window term)` with the right-hand side built from the
/// linearised solve.
pub fn duality_check(
    params: &ModelParams,
    state: &StateTrajectory,
    tau: f64,
    cost: &CostSpec,
    like: &ControlField,
    directions: usize,
    seed: u64,
) -> Result<DualityReport> {
    let adjoint = solve_adjoint_at_time(params, state, tau, cost)?;
    let r_tilde = control_gradient(&adjoint, like, 0.0)?;
    let tg = state.time_grid();
    let w = &cost.weights;
    let quad = cumulative_weights(tg, tau)?;
    let window = match &cost.relaxation {
        Some(rel) => Some((rel, window_weights(tg, tau, rel.eps)?)),
        None => None,
    };
    let phi_tau = state.interpolate(1, tau)?;

    let mut probes = Vec::new();
    for h in random_directions(like, directions, seed)? {
        let lhs = r_tilde.inner(&h)?;
        let lin = solve_linearized(params, state, &h)?;
        let mut rhs = 0.0;
        for (k, wk) in quad.iter().enumerate() {
            let s = state.frame(k);
            let y = lin.frame(k);
            rhs += w.b1 * wk * inner_unchecked(&s.phi.sub(cost.phi_q.at_node(k))?, &y.theta);
            rhs += w.b3 * wk * inner_unchecked(&s.sigma.sub(cost.sigma_q.at_node(k))?, &y.rho);
        }
        let theta_tau = lin.interpolate(1, tau)?;
        rhs += w.b2 * inner_unchecked(&phi_tau.sub(&cost.phi_omega)?, &theta_tau);
        rhs += 0.5 * w.b4 * integrate(&theta_tau);
        if let Some((rel, vw)) = &window {
            for (k, wk) in vw.iter().enumerate() {
                let d = state.frame(k).sigma.sub(&rel.sigma_omega)?;
                rhs += rel.gamma / rel.eps * wk * inner_unchecked(&d, &lin.frame(k).rho);
            }
        }
        probes.push(DualityProbe {
            adjoint_side: lhs,
            sensitivity_side: rhs,
            rel_mismatch: relative_gap(lhs, rhs, 1e-14),
        });
    }
    Ok(DualityReport { probes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzProbe {
    pub magnitude: f64,
    pub pair: usize,
    /// `sup_k |phi1 - phi2|_{L2}` etc., each divided by `|u1 - u2|_{L2(Q)}`.
    pub phi: f64,
    pub sigma: f64,
    pub mu: f64,
    /// Same for `alpha (mu1 - mu2) + (phi1 - phi2) + (sigma1 - sigma2)`.
    pub combined: f64,
    /// `phi + sigma`, the quantity the stability estimate bounds.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub probes: Vec<LipschitzProbe>,
}

impl LipschitzReport {
    pub fn max_ratio(&self) -> f64 {
        self.probes.iter().map(|p| p.ratio).fold(0.0, f64::max)
    }

    /// Largest over smallest `ratio` among all probes.
    pub fn pair_spread(&self) -> f64 {
        let min = self.probes.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        self.max_ratio() / min
    }

    /// Largest over smallest `ratio` across magnitudes, worst pair.
    pub fn magnitude_spread(&self) -> f64 {
        let pairs = self.probes.iter().map(|p| p.pair).max().map_or(0, |m| m + 1);
        (0..pairs)
            .map(|i| {
                let (lo, hi) = self
                    .probes
                    .iter()
                    .filter(|p| p.pair == i)
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.ratio), hi.max(p.ratio)));
                hi / lo
            })
            .fold(0.0, f64::max)
    }

    /// Ratios agree within a factor 10 across pairs and across magnitudes.
    pub fn passes(&self) -> bool {
        self.pair_spread() <= 10.0 && self.magnitude_spread() <= 10.0
    }
}

/// Stability ratios of the control-to-state map for `pairs` random control
/// pairs `(u, u + m h)` around `base`, at each magnitude `m`.
pub fn lipschitz_check(
    params: &ModelParams,
    init: &InitialData,
    base: &ControlField,
    pairs: usize,
    magnitudes: &[f64],
    seed: u64,
) -> Result<LipschitzReport> {
    let reference = solve_state(params, init, base)?.trajectory;
    let mut probes = Vec::new();
    for (pair, h) in random_directions(base, pairs, seed)?.iter().enumerate() {
        for &m in magnitudes {
            let other = base.add_scaled(m, h)?;
            let perturbed = solve_state(params, init, &other)?.trajectory;
            let du = other.sub(base)?.norm_l2();
            probes.push(stability_probe(params, &reference, &perturbed, du, m, pair)?);
        }
    }
    Ok(LipschitzReport { probes })
}

/// Ratios for one pair of trajectories; zero when the controls coincide.
pub fn stability_probe(
    params: &ModelParams,
    a: &StateTrajectory,
    b: &StateTrajectory,
    control_distance: f64,
    magnitude: f64,
    pair: usize,
) -> Result<LipschitzProbe> {
    let mut sup = [0.0f64; 4];
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        let dmu = fa.mu.sub(&fb.mu)?;
        let dphi = fa.phi.sub(&fb.phi)?;
        let dsig = fa.sigma.sub(&fb.sigma)?;
        let mut comb = dmu.scale(params.alpha);
        comb.axpy(1.0, &dphi)?;
        comb.axpy(1.0, &dsig)?;
        for (s, f) in sup.iter_mut().zip([&dphi, &dsig, &dmu, &comb]) {
            *s = s.max(f.norm_l2());
        }
    }
    let ratio = |x: f64| if control_distance == 0.0 { 0.0 } else { x / control_distance };
    Ok(LipschitzProbe {
        magnitude,
        pair,
        phi: ratio(sup[0]),
        sigma: ratio(sup[1]),
        mu: ratio(sup[2]),
        combined: ratio(sup[3]),
        ratio: ratio(sup[0] + sup[1]),
    })
}

/// `max_k |M_k - M_0 - sum_{j<k} dt int u_j| / (1 + |M_0|)` with
/// `M = int (alpha mu + phi + sigma)`.
pub fn mass_balance_check(traj: &StateTrajectory, u: &ControlField, params: &ModelParams) -> f64 {
    let mass = |k: usize| {
        let f = traj.frame(k);
        params.alpha * integrate(&f.mu) + integrate(&f.phi) + integrate(&f.sigma)
    };
    let m0 = mass(0);
    let dt = traj.time_grid().dt();
    let mut injected = 0.0;
    let mut worst = 0.0f64;
    for k in 1..traj.len() {
        injected += dt * integrate(u.interval(k - 1));
        worst = worst.max((mass(k) - m0 - injected).abs() / (1.0 + m0.abs()));
    }
    worst
}
