//! One step of the convex-splitting scheme, written as a residual
//! `G(X_{k+1}; X_k, u_k) = 0` with unknowns interleaved per cell as
//! `(mu, phi, sigma)`:
//!
//! ```text
//! G1 = alpha (mu+ - mu)/dt + (phi+ - phi)/dt - L mu+ - P(phi)(sigma+ - mu+)
//! G2 = beta (phi+ - phi)/dt - L phi+ + B(phi+) + pi(phi) - mu+
//! G3 = (sigma+ - sigma)/dt - L sigma+ + P(phi)(sigma+ - mu+) - u
//! ```
//!
//! The state solver drives `G` to zero with Newton; the sensitivity and
//! adjoint solvers reuse the Jacobian `dG/dX_{k+1}` (and its transpose) so
//! all three are exact algebraic partners.

use alloc::vec::Vec;

use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::ModelParams;
use crate::potential::SplitPart;

pub(crate) const MU: usize = 0;
pub(crate) const PHI: usize = 1;
pub(crate) const SIGMA: usize = 2;

/// Pointwise coefficients frozen over one step.
pub(crate) struct StepCoefficients {
    /// `P(phi_k)`
    pub prolif: Vec<f64>,
    /// `B'(phi_{k+1})`, the implicit convex curvature.
    pub convex_curv: Vec<f64>,
}

impl StepCoefficients {
    pub fn new(params: &ModelParams, phi_old: &[f64], phi_new: &[f64]) -> Result<Self> {
        Ok(Self {
            prolif: prolif_values(params, phi_old, 0)?,
            convex_curv: phi_new
                .iter()
                .map(|&r| params.potential.split_eval(r, SplitPart::Convex, 2))
                .collect::<Result<_>>()?,
        })
    }
}

pub(crate) fn prolif_values(params: &ModelParams, phi: &[f64], order: u8) -> Result<Vec<f64>> {
    phi.iter().map(|&r| params.proliferation.eval(r, order)).collect()
}

pub(crate) fn smooth_values(params: &ModelParams, phi: &[f64], order: u8) -> Result<Vec<f64>> {
    phi.iter()
        .map(|&r| params.potential.split_eval(r, SplitPart::Smooth, order))
        .collect()
}

pub(crate) fn convex_values(params: &ModelParams, phi: &[f64], order: u8) -> Result<Vec<f64>> {
    phi.iter()
        .map(|&r| params.potential.split_eval(r, SplitPart::Convex, order))
        .collect()
}

/// Assembles `dG/dX_{k+1}` (or its transpose) in band form.
pub(crate) fn assemble_jacobian(
    params: &ModelParams,
    coeffs: &StepCoefficients,
    transpose: bool,
) -> BandMatrix {
    let grid = params.grid;
    let n = grid.cell_count();
    let dt = params.dt();
    let band = 3 * grid.stencil_reach();
    let mut m = BandMatrix::zeros(3 * n, band, band);
    let mut put = |eq: usize, unk: usize, v: f64| {
        if transpose {
            m.add(unk, eq, v);
        } else {
            m.add(eq, unk, v);
        }
    };
    for i in 0..n {
        let p = coeffs.prolif[i];
        let mut diag = 0.0;
        grid.for_each_neighbor(i, |j, w| {
            diag += w;
            put(3 * i + MU, 3 * j + MU, -w);
            put(3 * i + PHI, 3 * j + PHI, -w);
            put(3 * i + SIGMA, 3 * j + SIGMA, -w);
        });
        put(3 * i + MU, 3 * i + MU, params.alpha / dt + p + diag);
        put(3 * i + MU, 3 * i + PHI, 1.0 / dt);
        put(3 * i + MU, 3 * i + SIGMA, -p);

        put(3 * i + PHI, 3 * i + MU, -1.0);
        put(3 * i + PHI, 3 * i + PHI, params.beta / dt + diag + coeffs.convex_curv[i]);

        put(3 * i + SIGMA, 3 * i + MU, -p);
        put(3 * i + SIGMA, 3 * i + SIGMA, 1.0 / dt + p + diag);
    }
    m
}

pub(crate) fn factor_jacobian(
    params: &ModelParams,
    coeffs: &StepCoefficients,
    transpose: bool,
) -> Result<BandLu> {
    assemble_jacobian(params, coeffs, transpose).factorize()
}

/// Applies the Neumann Laplacian to one interleaved component.
pub(crate) fn laplacian_component(grid: &Grid, x: &[f64], comp: usize, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let xi = x[3 * i + comp];
        let mut acc = 0.0;
        grid.for_each_neighbor(i, |j, w| acc += w * (x[3 * j + comp] - xi));
        *o = acc;
    }
}

/// Full nonlinear residual `G(X_new; X_old, u)`.
pub(crate) fn residual(
    params: &ModelParams,
    old: &[f64],
    new: &[f64],
    prolif_old: &[f64],
    smooth_old: &[f64],
    control: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let grid = params.grid;
    let n = grid.cell_count();
    let dt = params.dt();
    let mut lap = [Vec::new(), Vec::new(), Vec::new()];
    for (c, l) in lap.iter_mut().enumerate() {
        l.resize(n, 0.0);
        laplacian_component(&grid, new, c, l);
    }
    for i in 0..n {
        let (mu, phi, sig) = (new[3 * i], new[3 * i + 1], new[3 * i + 2]);
        let (mu0, phi0, sig0) = (old[3 * i], old[3 * i + 1], old[3 * i + 2]);
        let exchange = prolif_old[i] * (sig - mu);
        let convex = params.potential.split_eval(phi, SplitPart::Convex, 1)?;
        out[3 * i + MU] =
            params.alpha * (mu - mu0) / dt + (phi - phi0) / dt - lap[MU][i] - exchange;
        out[3 * i + PHI] =
            params.beta * (phi - phi0) / dt - lap[PHI][i] + convex + smooth_old[i] - mu;
        out[3 * i + SIGMA] = (sig - sig0) / dt - lap[SIGMA][i] + exchange - control[i];
    }
    Ok(())
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Packs three per-cell arrays into the interleaved layout.
pub(crate) fn interleave(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * a.len());
    for i in 0..a.len() {
        out.push(a[i]);
        out.push(b[i]);
        out.push(c[i]);
    }
    out
}

pub(crate) fn deinterleave(x: &[f64]) -> [Vec<f64>; 3] {
    let n = x.len() / 3;
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for cell in x.chunks_exact(3) {
        out[0].push(cell[0]);
        out[1].push(cell[1]);
        out[2].push(cell[2]);
    }
    out
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NanDetected(what))
    }
}
