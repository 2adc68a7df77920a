//! Named initial data.
//!
//! Every preset starts from the phase field and sets `mu0 = sigma0 =
//! F'(phi0)`, so that equilibrium data is stationary for a zero control.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::InitialData;
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Constant phase `c`.
    Equilibrium { c: f64 },
    /// `tanh((x - position) / width)` along the first axis.
    TanhFront { width: f64, position: f64 },
    /// Independent uniform samples in `[-amplitude, amplitude]`.
    RandomInterior { amplitude: f64, seed: u64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Equilibrium { .. } => "equilibrium",
            Preset::TanhFront { .. } => "tanh_front",
            Preset::RandomInterior { .. } => "random_interior",
        }
    }
}

pub fn preset_initial_data(preset: &Preset, grid: Grid, potential: &Potential) -> Result<InitialData> {
    let phi0 = match *preset {
        Preset::Equilibrium { c } => {
            potential.check_domain(c)?;
            Field::constant(grid, c)
        }
        Preset::TanhFront { width, position } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "tanh_front.width",
                    reason: "must be positive",
                });
            }
            // Keep singular potentials strictly inside their domain.
            let cap = if potential.is_singular() { 1.0 - 1e-3 } else { 1.0 };
            Field::from_fn(grid, |x| cap * libm::tanh((x[0] - position) / width))
        }
        Preset::RandomInterior { amplitude, seed } => {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "random_interior.amplitude",
                    reason: "must be non-negative",
                });
            }
            potential.check_domain(amplitude)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = if amplitude == 0.0 {
                alloc::vec![0.0; grid.cell_count()]
            } else {
                let dist = Uniform::new_inclusive(-amplitude, amplitude).map_err(|_| {
                    Error::InvalidParameter {
                        name: "random_interior.amplitude",
                        reason: "invalid sampling range",
                    }
                })?;
                (0..grid.cell_count()).map(|_| dist.sample(&mut rng)).collect()
            };
            Field::from_values(grid, values)?
        }
    };
    let mut fprime = Vec::with_capacity(grid.cell_count());
    for &r in phi0.values() {
        fprime.push(potential.eval(r, 1)?);
    }
    let mu0 = Field::from_values(grid, fprime)?;
    Ok(InitialData {
        sigma0: mu0.clone(),
        mu0,
        phi0,
    })
}
