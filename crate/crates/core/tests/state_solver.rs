mod common;

use chfree_core::verification::mass_balance_check;
use chfree_core::*;
use common::*;

fn perturbed_equilibrium(p: &ModelParams) -> InitialData {
    let phi0 = Field::from_fn(p.grid, |x| 0.8 + 0.05 * (std::f64::consts::PI * x[0]).cos());
    let fprime = phi0.map(|r| p.potential.eval(r, 1).unwrap());
    InitialData {
        mu0: fprime.clone(),
        phi0,
        sigma0: fprime,
    }
}

#[test]
fn first_order_in_time() {
    let phi_at_t = |nt: usize| {
        let p = params(32, nt, Potential::Quartic);
        let u = ControlField::constant(p.grid, p.time_grid, 0.0, ControlBounds::unbounded()).unwrap();
        let s = solve_state(&p, &perturbed_equilibrium(&p), &u).unwrap();
        s.trajectory.frame(nt).phi.clone()
    };
    let fields: Vec<Field> = [16, 32, 64, 128].iter().map(|&nt| phi_at_t(nt)).collect();
    let errs: Vec<f64> = fields.windows(2).map(|w| w[0].sub(&w[1]).unwrap().norm_l2()).collect();
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn mass_drift_equals_injected_control() {
    let p = params(32, 64, Potential::Quartic);
    let init = baseline_init(&p);
    let u = ControlField::constant(p.grid, p.time_grid, 1.0, ControlBounds::unbounded()).unwrap();
    let s = solve_state(&p, &init, &u).unwrap();
    let mass = |f: &StateFrame| p.alpha * integrate(&f.mu) + integrate(&f.phi) + integrate(&f.sigma);
    let drift = mass(s.trajectory.frame(64)) - mass(s.trajectory.frame(0));
    assert!((drift - T).abs() <= 1e-10);
    assert!(mass_balance_check(&s.trajectory, &u, &p) <= 1e-10);
    assert!(s.diagnostics.iter().all(|d| d.mass_residual <= 1e-10));
}

#[test]
fn equilibrium_run_conserves_mass_to_roundoff() {
    let p = params(32, 64, Potential::Logarithmic { lambda: 2.0 });
    let init = preset_initial_data(&Preset::Equilibrium { c: 0.3 }, p.grid, &p.potential).unwrap();
    let u = ControlField::constant(p.grid, p.time_grid, 0.0, ControlBounds::unbounded()).unwrap();
    let s = solve_state(&p, &init, &u).unwrap();
    assert!(mass_balance_check(&s.trajectory, &u, &p) <= 1e-12);
    for f in s.trajectory.frames() {
        assert!(f.phi.values().iter().all(|v| (v - 0.3).abs() <= 1e-10));
    }
}

#[test]
fn two_dimensional_run_is_consistent() {
    let grid = Grid::new_2d([12, 10], [1.0, 0.8]).unwrap();
    let p = ModelParams {
        grid,
        ..params(8, 32, Potential::Quartic)
    };
    let init = preset_initial_data(&Preset::RandomInterior { amplitude: 0.2, seed: 3 }, grid, &p.potential).unwrap();
    let u = ControlField::constant(grid, p.time_grid, 0.5, ControlBounds::constant(0.0, 1.0).unwrap()).unwrap();
    let s = solve_state(&p, &init, &u).unwrap();
    assert!(mass_balance_check(&s.trajectory, &u, &p) <= 1e-10);
    assert!(s.trajectory.frames().iter().all(|f| f.phi.is_finite()));
}

#[test]
fn logarithmic_random_data_stays_separated() {
    let p = params(64, 128, Potential::Logarithmic { lambda: 2.0 });
    let init = preset_initial_data(&Preset::RandomInterior { amplitude: 0.3, seed: 5 }, p.grid, &p.potential).unwrap();
    let s = solve_state(&p, &init, &midpoint_control(&p)).unwrap();
    let rep = separation_report(&s.trajectory, &p.potential);
    assert!(rep.delta_sep >= 0.01);
    assert!(s.diagnostics.iter().all(|d| d.newton_iters < 50));
}

#[test]
fn solves_are_bitwise_reproducible() {
    let p = params(32, 32, Potential::Quartic);
    let init = baseline_init(&p);
    let u = wavy_control(&p);
    let a = solve_state(&p, &init, &u).unwrap();
    let b = solve_state(&p, &init, &u).unwrap();
    assert_eq!(a, b);
}
