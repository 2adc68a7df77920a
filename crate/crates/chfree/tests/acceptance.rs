//! Acceptance criteria A1-A10. Every test prints one `PASS` or `FAIL` line
//! before asserting.

use std::path::PathBuf;

use chfree::config::{FieldSpec, RelaxationConfig};
use chfree::{ExperimentConfig, Problem};
use chfree_core::verification::{duality_check, fd_gradient_check, lipschitz_check, mass_balance_check, random_directions};
use chfree_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    chfree::load_config(&path, None, None, None).unwrap()
}

fn baseline() -> Problem {
    Problem::from_config(&config("baseline.toml")).unwrap()
}

fn relaxed_baseline() -> Problem {
    let mut cfg = config("baseline.toml");
    cfg.cost.relaxation = Some(RelaxationConfig {
        gamma: 0.5,
        eps: 0.1,
        sigma_omega: FieldSpec::Constant { value: 0.2 },
    });
    Problem::from_config(&cfg).unwrap()
}

fn verdict(id: &str, passed: bool, detail: String) {
    println!("{id} {}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{id} failed: {detail}");
}

/// A feasible, non-constant control of the baseline problem.
fn wavy(problem: &Problem) -> ControlField {
    let tg = problem.params.time_grid;
    let values = (0..tg.nt())
        .map(|k| {
            let t = tg.node(k) + 0.5 * tg.dt();
            Field::from_fn(problem.params.grid, |x| 1.0 + 0.5 * (6.0 * x[0] + 3.0 * t).sin())
        })
        .collect();
    problem.u0.with_values(values).unwrap()
}

fn gradient_agreement(problem: &Problem, label: &str) -> (bool, String) {
    let slope_deltas = [0.4, 0.2, 0.1, 0.05];
    let rep = fd_gradient_check(
        &problem.params,
        &problem.init,
        &problem.cost,
        &problem.u0,
        problem.tau0,
        5,
        &[1e-4],
        &slope_deltas,
        SEED,
    )
    .unwrap();
    let err = rep.max_rel_error_at(1e-4);
    let (lo, hi) = rep.slope_range().unwrap();
    let slopes_ok = rep.slopes.iter().all(|s| s.is_some_and(|s| (1.7..=2.3).contains(&s)));
    (
        err <= 1e-6 && slopes_ok,
        format!("{label}: max relative error {err:.3e} at delta 1e-4 (tol 1e-6); slopes [{lo:.3}, {hi:.3}] (range [1.7, 2.3])"),
    )
}

fn duality_agreement(problem: &Problem, label: &str) -> (bool, String) {
    let mut worst = 0.0f64;
    for (u, tau) in [(problem.u0.clone(), problem.tau0), (wavy(problem), 0.4321)] {
        let state = solve_state(&problem.params, &problem.init, &u).unwrap().trajectory;
        let rep = duality_check(&problem.params, &state, tau, &problem.cost, &u, 10, SEED).unwrap();
        worst = worst.max(rep.max_rel_mismatch());
    }
    (worst <= 1e-9, format!("{label}: max relative mismatch {worst:.3e} over 10 directions (tol 1e-9)"))
}

#[test]
fn a1_gradient_matches_finite_differences() {
    let (ok, detail) = gradient_agreement(&baseline(), "baseline");
    verdict("A1", ok, detail);
}

#[test]
fn a2_duality_identity() {
    let (ok, detail) = duality_agreement(&baseline(), "baseline");
    verdict("A2", ok, detail);
}

#[test]
fn a3_logarithmic_run_stays_separated() {
    let problem = Problem::from_config(&config("logarithmic.toml")).unwrap();
    let result = solve_state(&problem.params, &problem.init, &problem.u0);
    let (ok, detail) = match result {
        Ok(sol) => {
            let rep = separation_report(&sol.trajectory, &problem.params.potential);
            let steps = sol.diagnostics.len();
            (
                steps == 256 && rep.delta_sep >= 0.01,
                format!("{steps} steps, delta_sep {:.4} at frame {} (min 0.01), no Newton failures", rep.delta_sep, rep.argmin_frame),
            )
        }
        Err(e) => (false, format!("solver error: {e}")),
    };
    verdict("A3", ok, detail);
}

#[test]
fn a4_mass_identity_on_every_run() {
    let base = baseline();
    let log = Problem::from_config(&config("logarithmic.toml")).unwrap();
    let two_d = Problem::from_config(&config("relaxed-2d.toml")).unwrap();
    let random = {
        let h = &random_directions(&base.u0, 1, SEED).unwrap()[0];
        base.u0.add_scaled(3.0, h).unwrap()
    };
    let runs: Vec<(&str, &Problem, ControlField)> = vec![
        ("baseline midpoint", &base, base.u0.clone()),
        ("baseline wavy", &base, wavy(&base)),
        ("baseline random", &base, random),
        ("baseline zero", &base, base.u0.zeros_like()),
        ("logarithmic", &log, log.u0.clone()),
        ("two-dimensional", &two_d, two_d.u0.clone()),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, p, u) in runs {
        let s = solve_state(&p.params, &p.init, &u).unwrap().trajectory;
        let r = mass_balance_check(&s, &u, &p.params);
        worst = worst.max(r);
        parts.push(format!("{name} {r:.1e}"));
    }
    verdict("A4", worst <= 1e-10, format!("max residual {worst:.2e} (tol 1e-10): {}", parts.join(", ")));
}

#[test]
fn a5_time_derivative_matches_finite_differences() {
    let p = baseline();
    let u = wavy(&p);
    let state = solve_state(&p.params, &p.init, &u).unwrap().trajectory;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let tau: f64 = rng.random_range(0.05..0.95);
        let j = |t: f64| evaluate_objective(&state, &u, t, &p.cost).unwrap().total;
        let fd = (j(tau + 1e-3) - j(tau - 1e-3)) / 2e-3;
        let exact = time_derivative(&state, tau, &p.cost).unwrap();
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    verdict("A5", worst <= 1e-2, format!("max relative error {worst:.3e} at 5 interior tau (tol 1e-2)"));
}

#[test]
fn a6_optimizer_satisfies_kkt_conditions() {
    let p = baseline();
    let r = optimize(&p.params, &p.init, &p.cost, &p.optimizer, &p.u0, p.tau0).unwrap();
    let b0 = p.cost.weights.b0;
    let target = r.u_opt.add_scaled(-1.0 / b0, &r.gradient).unwrap().project();
    let control_res = r.u_opt.sub(&target).unwrap().norm_l2();
    let control_tol = 1e-4 * (1.0 + r.u_opt.norm_l2());
    let time_tol = 1e-4 * (1.0 + r.cost.total.abs());
    let rep = classify_time_optimality(&r.state, r.tau_opt, &p.cost, time_tol).unwrap();
    let dt = p.params.dt();
    let fixed_ok = match rep.case {
        TimeCase::Interior => rep.fixed_point_residual.is_some_and(|f| f <= dt),
        _ => true,
    };
    let ok = r.termination == Termination::Converged && control_res <= control_tol && rep.consistent && fixed_ok;
    verdict(
        "A6",
        ok,
        format!(
            "{:?} after {} iterations; control residual {control_res:.2e} (tol {control_tol:.2e}); tau {:.5} {}, D_tau J {:.2e} (tol {time_tol:.2e}); fixed-point residual {} (tol dt = {dt})",
            r.termination,
            r.history.len(),
            r.tau_opt,
            rep.case.as_str(),
            rep.derivative,
            rep.fixed_point_residual.map_or("n/a".to_string(), |f| format!("{f:.2e}")),
        ),
    );
}

#[test]
fn a7_degenerate_problems_have_analytic_optima() {
    let p = baseline();
    let only = |i: usize| {
        let mut b = [0.0; 7];
        b[i] = 1.0;
        let [b0, b1, b2, b3, b4, b5, b6] = b;
        p.cost.with_weights(CostWeights { b0, b1, b2, b3, b4, b5, b6 })
    };
    let wide = ControlBounds::constant(-1.0, 2.0).unwrap();
    let u0 = ControlField::midpoint(p.params.grid, p.params.time_grid, wide).unwrap();

    let energy = optimize(&p.params, &p.init, &only(0), &p.optimizer, &u0, p.tau0).unwrap();
    let u_norm = energy.u_opt.norm_l2();

    let linear = optimize(&p.params, &p.init, &only(5), &p.optimizer, &p.u0, p.tau0).unwrap();
    let d_linear = time_derivative(&linear.state, linear.tau_opt, &only(5)).unwrap();

    let quadratic = optimize(&p.params, &p.init, &only(6), &p.optimizer, &p.u0, 0.9).unwrap();
    let dt = p.params.dt();

    let ok = u_norm <= 1e-8
        && linear.tau_opt == 0.0
        && d_linear == 1.0
        && (quadratic.tau_opt - p.cost.tau_star).abs() <= dt;
    verdict(
        "A7",
        ok,
        format!(
            "b0 only: |u| = {u_norm:.1e} (tol 1e-8); b5 only: tau = {}, D_tau J = {d_linear}; b6 only: tau = {:.6} (target {} +- {dt})",
            linear.tau_opt, quadratic.tau_opt, p.cost.tau_star
        ),
    );
}

fn sensitivity_error(a: &StateTrajectory, b: &StateTrajectory, eps: f64, lin: &SensitivityTrajectory, dt: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..a.len() {
        let (fa, fb, fl) = (a.frame(k), b.frame(k), lin.frame(k));
        for (x, y, l) in [(&fa.mu, &fb.mu, &fl.eta), (&fa.phi, &fb.phi, &fl.theta), (&fa.sigma, &fb.sigma, &fl.rho)] {
            let q = x.sub(y).unwrap().scale(1.0 / eps).sub(l).unwrap();
            sum += dt * q.norm_l2().powi(2);
        }
    }
    sum.sqrt()
}

#[test]
fn a8_linearisation_is_consistent() {
    let p = baseline();
    let u = wavy(&p);
    let h = &random_directions(&u, 1, SEED).unwrap()[0];
    let base = solve_state(&p.params, &p.init, &u).unwrap().trajectory;
    let lin = solve_linearized(&p.params, &base, h).unwrap();
    let epsilons = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = epsilons
        .iter()
        .map(|&e| {
            let moved = solve_state(&p.params, &p.init, &u.add_scaled(e, h).unwrap()).unwrap().trajectory;
            sensitivity_error(&moved, &base, e, &lin, p.params.dt())
        })
        .collect();
    let n = 3.0;
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    verdict(
        "A8",
        (slope - 1.0).abs() <= 0.3,
        format!("errors {:?} for eps {epsilons:?}; slope {slope:.3} (1 +- 0.3)", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()),
    );
}

#[test]
fn a9_relaxed_functional() {
    let p = relaxed_baseline();
    let (g_ok, g_detail) = gradient_agreement(&p, "relaxed gradient");
    let (d_ok, d_detail) = duality_agreement(&p, "relaxed duality");

    // sigma - sigma_Omega = 1 on the unit interval.
    let grid = p.params.grid;
    let tg = p.params.time_grid;
    let frame = StateFrame {
        mu: Field::zeros(grid),
        phi: Field::zeros(grid),
        sigma: Field::constant(grid, 1.2),
    };
    let traj = Trajectory::new(tg, vec![frame; tg.nt() + 1]).unwrap();
    let gamma = p.cost.relaxation.as_ref().unwrap().gamma;
    let mut worst = 0.0f64;
    for tau in [0.05, 0.5, 0.4321, 1.0] {
        let c = evaluate_cost_relaxed(&traj, &p.u0, tau, &p.cost).unwrap();
        worst = worst.max((c.relaxed_term - 0.5 * gamma).abs());
    }
    let s_ok = worst <= 1e-12;
    verdict(
        "A9",
        g_ok && d_ok && s_ok,
        format!("{g_detail}; {d_detail}; synthetic relaxed term off by {worst:.1e} from gamma/2 (tol 1e-12)"),
    );
}

#[test]
fn a10_lipschitz_stability() {
    let p = baseline();
    let rep = lipschitz_check(&p.params, &p.init, &wavy(&p), 5, &[1e-1, 1e-2, 1e-3], SEED).unwrap();
    let spread = rep.magnitude_spread();
    verdict(
        "A10",
        spread <= 3.0,
        format!(
            "ratio spread across magnitudes {spread:.5} (max 3) over 5 pairs; max ratio {:.3e}; spread across pairs {:.3}",
            rep.max_ratio(),
            rep.pair_spread()
        ),
    );
}
