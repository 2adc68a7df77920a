//! Orchestration of a run: problem assembly, the simulate / optimise /
//! verify stages and their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use chfree_core::verification::{
    duality_check, fd_gradient_check, lipschitz_check, mass_balance_check, DualityReport, GradientCheckReport,
    LipschitzReport,
};
use chfree_core::{
    classify_time_optimality, evaluate_objective, optimize, preset_initial_data, solve_state_with, BoundValue,
    ControlBounds, ControlField, CostSpec, Field, Grid, InitialData, ModelParams, OptResult, OptimizerConfig,
    Potential, Relaxation, Target, Termination, TimeGrid,
};

use crate::config::{ExperimentConfig, FieldSpec, InitialConfig, Pipeline, TargetSpec, VerificationConfig};
use crate::error::{ConfigError, IoError, RunError};
use crate::io::{self, Manifest};

pub const VERSION: &str = match option_env!("CHFREE_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

/// Everything the solvers need, assembled from a configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: ModelParams,
    pub init: InitialData,
    pub cost: CostSpec,
    pub u0: ControlField,
    pub tau0: f64,
    pub optimizer: OptimizerConfig,
}

fn snapshot(path: &Path, grid: Grid, field: &str) -> Result<Field, ConfigError> {
    io::read_snapshot(path, grid).map_err(|e| ConfigError::Field {
        field: field.into(),
        message: e.to_string(),
    })
}

fn equilibrium_value(potential: &Potential, c: f64, phase: bool, field: &str) -> Result<f64, ConfigError> {
    potential.check_domain(c).map_err(|e| ConfigError::core(field, e))?;
    if phase {
        Ok(c)
    } else {
        potential.eval(c, 1).map_err(|e| ConfigError::core(field, e))
    }
}

fn build_field(spec: &FieldSpec, grid: Grid, potential: &Potential, phase: bool, field: &str) -> Result<Field, ConfigError> {
    match spec {
        FieldSpec::Constant { value } => Ok(Field::constant(grid, *value)),
        FieldSpec::Snapshot { path } => snapshot(path, grid, field),
        FieldSpec::Equilibrium { c } => Ok(Field::constant(grid, equilibrium_value(potential, *c, phase, field)?)),
    }
}

fn build_target(
    spec: &TargetSpec,
    grid: Grid,
    tg: &TimeGrid,
    potential: &Potential,
    phase: bool,
    field: &str,
) -> Result<Target, ConfigError> {
    let steady = |f: FieldSpec| build_field(&f, grid, potential, phase, field).map(Target::Steady);
    match spec {
        TargetSpec::Constant { value } => steady(FieldSpec::Constant { value: *value }),
        TargetSpec::Snapshot { path } => steady(FieldSpec::Snapshot { path: path.clone() }),
        TargetSpec::Equilibrium { c } => steady(FieldSpec::Equilibrium { c: *c }),
        TargetSpec::Trajectory { manifest, component } => {
            let err = |m: String| ConfigError::Field {
                field: field.into(),
                message: m,
            };
            let m = Manifest::read(manifest).map_err(|e| err(e.to_string()))?;
            if m.nodes.len() != tg.nt() + 1 || m.nodes.iter().enumerate().any(|(k, n)| n.index != k) {
                return Err(err("target manifest must list every time node".into()));
            }
            let fields = m.load_component(manifest, component, grid).map_err(|e| err(e.to_string()))?;
            Ok(Target::Nodes(fields))
        }
    }
}

fn bound_value(spec: &FieldSpec, grid: Grid, potential: &Potential, field: &str) -> Result<BoundValue, ConfigError> {
    Ok(match spec {
        FieldSpec::Constant { value } => BoundValue::Constant(*value),
        other => BoundValue::Field(build_field(other, grid, potential, false, field)?),
    })
}

impl Problem {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let time_grid = cfg.time_grid()?;
        let potential = Potential::from(cfg.model.potential);
        let params = ModelParams {
            alpha: cfg.model.alpha,
            beta: cfg.model.beta,
            potential,
            proliferation: cfg.model.proliferation.into(),
            grid,
            time_grid,
        };
        params.validate().map_err(|e| ConfigError::core("model", e))?;

        let init = match (&cfg.initial, cfg.preset()) {
            (_, Some(preset)) => {
                preset_initial_data(&preset, grid, &potential).map_err(|e| ConfigError::core("initial", e))?
            }
            (InitialConfig::Snapshot { mu, phi, sigma }, None) => InitialData {
                mu0: snapshot(mu, grid, "initial.mu")?,
                phi0: snapshot(phi, grid, "initial.phi")?,
                sigma0: snapshot(sigma, grid, "initial.sigma")?,
            },
            _ => unreachable!("every non-snapshot initial condition is a preset"),
        };
        init.validate(&params).map_err(|e| ConfigError::core("initial", e))?;

        let c = &cfg.cost;
        let relaxation = match &c.relaxation {
            Some(r) => Some(Relaxation {
                gamma: r.gamma,
                eps: r.eps,
                sigma_omega: build_field(&r.sigma_omega, grid, &potential, false, "cost.relaxation.sigma_omega")?,
            }),
            None => None,
        };
        let cost = CostSpec {
            weights: c.weights(),
            phi_q: build_target(&c.phi_q, grid, &time_grid, &potential, true, "cost.phi_q")?,
            sigma_q: build_target(&c.sigma_q, grid, &time_grid, &potential, false, "cost.sigma_q")?,
            phi_omega: build_field(&c.phi_omega, grid, &potential, true, "cost.phi_omega")?,
            tau_star: c.tau_star,
            relaxation,
        };
        cost.validate(&grid, &time_grid).map_err(|e| ConfigError::core("cost", e))?;

        let bounds = ControlBounds::new(
            bound_value(&cfg.bounds.lower, grid, &potential, "bounds.lower")?,
            bound_value(&cfg.bounds.upper, grid, &potential, "bounds.upper")?,
            &grid,
        )
        .map_err(|e| ConfigError::core("bounds", e))?;
        let u0 = match cfg.control.u0 {
            Some(v) => ControlField::constant(grid, time_grid, v, bounds),
            None => ControlField::midpoint(grid, time_grid, bounds),
        }
        .map_err(|e| ConfigError::core("control.u0", e))?;

        Ok(Self {
            params,
            init,
            cost,
            u0,
            tau0: cfg.tau0(),
            optimizer: cfg.optimizer.to_core(),
        })
    }
}

/// Outcome of one oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub passed: bool,
    /// The quantity compared against `threshold`.
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub enum CheckReport {
    Gradient(GradientCheckReport),
    Duality(DualityReport),
    Lipschitz(LipschitzReport),
    Mass(f64),
}

#[derive(Clone, Copy)]
enum Check {
    Gradient,
    Duality,
    Lipschitz,
    Mass,
}

fn run_check(
    check: Check,
    problem: &Problem,
    v: &VerificationConfig,
    seed: u64,
) -> Result<(CheckOutcome, CheckReport), chfree_core::Error> {
    let Problem { params, init, cost, u0, tau0, optimizer } = problem;
    let tau = v.tau.unwrap_or(*tau0);
    Ok(match check {
        Check::Gradient => {
            let rep = fd_gradient_check(params, init, cost, u0, tau, v.gradient_directions, &v.gradient_deltas, &v.slope_deltas, seed)?;
            let err = v.gradient_deltas.iter().map(|&d| rep.max_rel_error_at(d)).fold(0.0, f64::max);
            let [lo, hi] = v.slope_range;
            let slopes_ok = v.slope_deltas.is_empty()
                || rep.slopes.iter().all(|s| s.is_some_and(|s| (lo..=hi).contains(&s)));
            let detail = match rep.slope_range() {
                Some((a, b)) => format!("max relative error {err:.3e}; slopes in [{a:.3}, {b:.3}]"),
                None => format!("max relative error {err:.3e}"),
            };
            (
                CheckOutcome {
                    check: "gradient",
                    passed: err <= v.gradient_tol && slopes_ok,
                    metric: err,
                    threshold: v.gradient_tol,
                    detail,
                },
                CheckReport::Gradient(rep),
            )
        }
        Check::Duality => {
            let state = solve_state_with(params, init, u0, &optimizer.newton)?.trajectory;
            let rep = duality_check(params, &state, tau, cost, u0, v.duality_directions, seed)?;
            let m = rep.max_rel_mismatch();
            (
                CheckOutcome {
                    check: "duality",
                    passed: m <= v.duality_tol,
                    metric: m,
                    threshold: v.duality_tol,
                    detail: format!("max relative mismatch {m:.3e}"),
                },
                CheckReport::Duality(rep),
            )
        }
        Check::Lipschitz => {
            let rep = lipschitz_check(params, init, u0, v.lipschitz_pairs, &v.lipschitz_magnitudes, seed)?;
            let spread = rep.magnitude_spread();
            (
                CheckOutcome {
                    check: "lipschitz",
                    passed: spread <= v.lipschitz_spread && rep.passes(),
                    metric: spread,
                    threshold: v.lipschitz_spread,
                    detail: format!(
                        "max ratio {:.4e}; spread across magnitudes {spread:.4}; across pairs {:.4}",
                        rep.max_ratio(),
                        rep.pair_spread()
                    ),
                },
                CheckReport::Lipschitz(rep),
            )
        }
        Check::Mass => {
            let state = solve_state_with(params, init, u0, &optimizer.newton)?.trajectory;
            let r = mass_balance_check(&state, u0, params);
            (
                CheckOutcome {
                    check: "mass",
                    passed: r <= v.mass_tol,
                    metric: r,
                    threshold: v.mass_tol,
                    detail: format!("mass residual {r:.3e}"),
                },
                CheckReport::Mass(r),
            )
        }
    })
}

/// Runs the enabled oracles concurrently; results keep a fixed order.
pub fn verify(
    problem: &Problem,
    v: &VerificationConfig,
    seed: u64,
) -> Result<Vec<(CheckOutcome, CheckReport)>, chfree_core::Error> {
    use rayon::prelude::*;
    let checks: Vec<Check> = [
        (v.gradient, Check::Gradient),
        (v.duality, Check::Duality),
        (v.lipschitz, Check::Lipschitz),
        (v.mass, Check::Mass),
    ]
    .into_iter()
    .filter_map(|(on, c)| on.then_some(c))
    .collect();
    checks.into_par_iter().map(|c| run_check(c, problem, v, seed)).collect()
}

/// First-order optimality measures of an optimiser result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktSummary {
    /// `|u - P(-r~ / b0)|_{L2(Q)}`; absent when `b0 = 0`.
    pub control_residual: Option<f64>,
    pub time_derivative: f64,
    pub lambda: f64,
    pub time_consistent: bool,
    pub fixed_point_residual: Option<f64>,
}

pub fn kkt_summary(result: &OptResult, cost: &CostSpec, tol: f64) -> Result<KktSummary, chfree_core::Error> {
    let b0 = cost.weights.b0;
    let control_residual = if b0 > 0.0 {
        let target = result.u_opt.add_scaled(-1.0 / b0, &result.gradient)?.project();
        Some(result.u_opt.sub(&target)?.norm_l2())
    } else {
        None
    };
    let rep = classify_time_optimality(&result.state, result.tau_opt, cost, tol)?;
    Ok(KktSummary {
        control_residual,
        time_derivative: rep.derivative,
        lambda: rep.lambda,
        time_consistent: rep.consistent,
        fixed_point_residual: rep.fixed_point_residual,
    })
}

#[derive(Debug, Default, Serialize)]
pub struct RunSummary {
    pub version: String,
    pub pipeline: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verify: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub cost_at_tau0: f64,
    pub max_mass_residual: f64,
    pub min_delta_sep: f64,
    pub max_newton_iters: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeSummary {
    pub termination: String,
    pub iterations: usize,
    pub tau_opt: f64,
    pub time_case: String,
    pub cost: f64,
    pub control_norm: f64,
    pub kkt: KktSummary,
}

fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(|e| IoError::file(path, e))
}

/// Writes the resolved configuration and, for every enabled stage, its
/// artifacts under `cfg.output.dir`. Artifacts of finished stages are kept
/// when a later stage fails.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let problem = Problem::from_config(cfg)?;
    let out = cfg.output.dir.clone();
    create_dir(&out)?;
    io::write_file(&out.join("resolved_config.toml"), &cfg.resolved_toml())?;

    let mut summary = RunSummary {
        version: VERSION.to_string(),
        pipeline: format!("{:?}", cfg.pipeline).to_lowercase(),
        ..RunSummary::default()
    };
    let result = run_stages(cfg, &problem, &out, &mut summary);
    summary.exit_code = match &result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    };
    write_summary(&out, cfg, &summary)?;
    result.map(|()| summary)
}

fn run_stages(cfg: &ExperimentConfig, problem: &Problem, out: &Path, summary: &mut RunSummary) -> Result<(), RunError> {
    let stride = cfg.output.snapshot_stride;
    let newton = problem.optimizer.newton;
    if cfg.pipeline.simulates() {
        let dir = out.join("simulate");
        create_dir(&dir)?;
        let sol = solve_state_with(&problem.params, &problem.init, &problem.u0, &newton)?;
        let cost = evaluate_objective(&sol.trajectory, &problem.u0, problem.tau0, &problem.cost)?;
        io::write_state(&dir, &sol.trajectory, stride)?;
        io::write_diagnostics_csv(&dir.join("diagnostics.csv"), &sol.diagnostics)?;
        io::write_breakdown_csv(&dir.join("breakdown.csv"), &[(0, problem.tau0, cost)])?;
        summary.simulate = Some(SimulateSummary {
            cost_at_tau0: cost.total,
            max_mass_residual: sol.diagnostics.iter().map(|d| d.mass_residual).fold(0.0, f64::max),
            min_delta_sep: sol.diagnostics.iter().map(|d| d.delta_sep).fold(f64::INFINITY, f64::min),
            max_newton_iters: sol.diagnostics.iter().map(|d| d.newton_iters).max().unwrap_or(0),
        });
    }
    if cfg.pipeline.optimizes() {
        let dir = out.join("optimize");
        create_dir(&dir)?;
        let r = optimize(&problem.params, &problem.init, &problem.cost, &problem.optimizer, &problem.u0, problem.tau0)?;
        let tol = problem.optimizer.grad_tol.max(1e-4) * (1.0 + r.cost.total.abs());
        let kkt = kkt_summary(&r, &problem.cost, tol)?;
        io::write_history_csv(&dir.join("history.csv"), &r.history)?;
        let rows: Vec<_> = r.history.iter().map(|h| (h.iteration, h.tau, h.cost)).collect();
        io::write_breakdown_csv(&dir.join("breakdown.csv"), &rows)?;
        io::write_control(&dir, &r.u_opt)?;
        io::write_state(&dir, &r.state, stride)?;
        io::write_adjoint(&dir, &r.adjoint, stride)?;
        let sol = solve_state_with(&problem.params, &problem.init, &r.u_opt, &newton)?;
        io::write_diagnostics_csv(&dir.join("diagnostics.csv"), &sol.diagnostics)?;
        let termination = match r.termination {
            Termination::Converged => "converged".to_string(),
            Termination::MaxIterations => "max_iterations".to_string(),
            Termination::LineSearchFailure { iteration } => format!("line_search_failure at iteration {iteration}"),
        };
        summary.optimize = Some(OptimizeSummary {
            termination,
            iterations: r.history.len(),
            tau_opt: r.tau_opt,
            time_case: r.time_case.as_str().to_string(),
            cost: r.cost.total,
            control_norm: r.u_opt.norm_l2(),
            kkt,
        });
        if let Termination::LineSearchFailure { iteration } = r.termination {
            return Err(RunError::Solver(chfree_core::Error::LineSearchFailure {
                iteration,
                backtracks: problem.optimizer.armijo.max_backtracks,
            }));
        }
    }
    if cfg.pipeline.verifies() {
        let dir = out.join("verify");
        create_dir(&dir)?;
        let results = verify(problem, &cfg.verification, cfg.seed)?;
        for (outcome, report) in &results {
            io::write_file(&dir.join(format!("{}.toml", outcome.check)), &report_text(outcome, report))?;
        }
        let outcomes: Vec<CheckOutcome> = results.into_iter().map(|(o, _)| o).collect();
        let json = serde_json::to_string_pretty(&outcomes).expect("outcomes serialise");
        io::write_file(&dir.join("summary.json"), &json)?;
        if outcomes.iter().any(|o| !o.passed) {
            summary.verify = outcomes.clone();
            return Err(RunError::Verification(outcomes));
        }
        summary.verify = outcomes;
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    summary: &'a RunSummary,
    config: &'a ExperimentConfig,
}

fn write_summary(out: &Path, cfg: &ExperimentConfig, summary: &RunSummary) -> Result<(), IoError> {
    let path = out.join("run_summary.toml");
    let text = toml::to_string(&SummaryFile { summary, config: cfg })
        .map_err(|e| IoError::format(&path, e.to_string()))?;
    io::write_file(&path, &text)
}

#[derive(Serialize)]
struct GradientProbeRow {
    direction: usize,
    delta: f64,
    analytic: f64,
    finite_difference: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    #[serde(flatten)]
    outcome: &'a CheckOutcome,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    slopes: Vec<f64>,
    probes: Vec<T>,
}

#[derive(Serialize)]
struct Empty {}

/// One structured-text report per check.
pub fn report_text(outcome: &CheckOutcome, report: &CheckReport) -> String {
    let text = match report {
        CheckReport::Gradient(r) => toml::to_string(&ReportFile {
            outcome,
            slopes: r.slopes.iter().map(|s| s.unwrap_or(f64::NAN)).collect(),
            probes: r
                .probes
                .iter()
                .map(|p| GradientProbeRow {
                    direction: p.direction,
                    delta: p.delta,
                    analytic: p.analytic,
                    finite_difference: p.finite_difference,
                    rel_error: p.rel_error,
                })
                .collect(),
        }),
        CheckReport::Duality(r) => toml::to_string(&ReportFile {
            outcome,
            slopes: vec![],
            probes: r
                .probes
                .iter()
                .map(|p| [p.adjoint_side, p.sensitivity_side, p.rel_mismatch])
                .collect(),
        }),
        CheckReport::Lipschitz(r) => toml::to_string(&ReportFile {
            outcome,
            slopes: vec![],
            probes: r
                .probes
                .iter()
                .map(|p| [p.pair as f64, p.magnitude, p.phi, p.sigma, p.mu, p.combined, p.ratio])
                .collect(),
        }),
        CheckReport::Mass(_) => toml::to_string(&ReportFile::<Empty> {
            outcome,
            slopes: vec![],
            probes: vec![],
        }),
    };
    text.expect("reports serialise")
}

/// Loads a configuration file, resolves relative input paths against its
/// directory and applies command-line overrides.
pub fn load_config(
    path: &Path,
    pipeline: Option<Pipeline>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    if let Some(p) = pipeline {
        cfg.pipeline = p;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(d) = out_dir {
        cfg.output.dir = d;
    }
    cfg.validate()?;
    Ok(cfg)
}
