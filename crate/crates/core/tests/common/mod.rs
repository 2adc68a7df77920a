#![allow(dead_code)]

use chfree_core::*;

pub const T: f64 = 1.0;

pub fn params(n: usize, nt: usize, potential: Potential) -> ModelParams {
    ModelParams {
        alpha: 0.1,
        beta: 0.1,
        potential,
        proliferation: Proliferation::SmoothRamp { p0: 1.0, width: 0.5 },
        grid: Grid::new_1d(n, 1.0).unwrap(),
        time_grid: TimeGrid::new(T, nt).unwrap(),
    }
}

pub fn baseline_params() -> ModelParams {
    params(128, 256, Potential::Quartic)
}

pub fn baseline_init(p: &ModelParams) -> InitialData {
    let front = Preset::TanhFront { width: 0.1, position: 0.5 };
    preset_initial_data(&front, p.grid, &p.potential).unwrap()
}

pub fn weights(b: [f64; 7]) -> CostWeights {
    let [b0, b1, b2, b3, b4, b5, b6] = b;
    CostWeights { b0, b1, b2, b3, b4, b5, b6 }
}

pub fn baseline_weights() -> CostWeights {
    weights([1e-3, 1.0, 0.0, 1.0, 0.0, 0.01, 1.0])
}

/// Targets are the `phi = 0` equilibrium trajectory of the quartic
/// potential, `(mu, phi, sigma) = (0, 0, 0)`.
pub fn cost(p: &ModelParams, w: CostWeights) -> CostSpec {
    CostSpec {
        weights: w,
        phi_q: Target::Steady(Field::zeros(p.grid)),
        sigma_q: Target::Steady(Field::zeros(p.grid)),
        phi_omega: Field::constant(p.grid, -1.0),
        tau_star: 0.5 * T,
        relaxation: None,
    }
}

pub fn bounds() -> ControlBounds {
    ControlBounds::constant(0.0, 2.0).unwrap()
}

pub fn midpoint_control(p: &ModelParams) -> ControlField {
    ControlField::midpoint(p.grid, p.time_grid, bounds()).unwrap()
}

/// A smooth, non-constant feasible control.
pub fn wavy_control(p: &ModelParams) -> ControlField {
    let tg = p.time_grid;
    let values = (0..tg.nt())
        .map(|k| {
            let t = tg.node(k) + 0.5 * tg.dt();
            Field::from_fn(p.grid, |x| 1.0 + 0.5 * (6.0 * x[0] + 3.0 * t).sin())
        })
        .collect();
    ControlField::new(tg, values, bounds()).unwrap()
}
