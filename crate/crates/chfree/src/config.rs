//! Experiment configuration, read from TOML.
//!
//! Physics parameters, grids, initial data, cost weights and control bounds
//! have no defaults. Solver, optimiser, verification and output settings
//! do. [`ExperimentConfig::resolved_toml`] writes the configuration with
//! every default filled in; parsing that text gives back an equal value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use chfree_core::{
    ArmijoConfig, ControlBounds, CostWeights, Grid, NewtonOptions, OptimizerConfig, Potential, Preset,
    Proliferation, TimeGrid,
};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Simulate,
    Optimize,
    Verify,
    #[default]
    All,
}

impl Pipeline {
    pub fn simulates(&self) -> bool {
        matches!(self, Pipeline::Simulate | Pipeline::All)
    }

    pub fn optimizes(&self) -> bool {
        matches!(self, Pipeline::Optimize | Pipeline::All)
    }

    pub fn verifies(&self) -> bool {
        matches!(self, Pipeline::Verify | Pipeline::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub pipeline: Pipeline,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub cost: CostConfig,
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub verification: VerificationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Write every `snapshot_stride`-th node of each trajectory (the last
    /// node is always written).
    #[serde(default = "one")]
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            snapshot_stride: 1,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub beta: f64,
    pub potential: PotentialConfig,
    pub proliferation: ProliferationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Quartic,
    Logarithmic { lambda: f64 },
}

impl From<PotentialConfig> for Potential {
    fn from(p: PotentialConfig) -> Self {
        match p {
            PotentialConfig::Quartic => Potential::Quartic,
            PotentialConfig::Logarithmic { lambda } => Potential::Logarithmic { lambda },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProliferationConfig {
    Constant { p0: f64 },
    SmoothRamp { p0: f64, width: f64 },
}

impl From<ProliferationConfig> for Proliferation {
    fn from(p: ProliferationConfig) -> Self {
        match p {
            ProliferationConfig::Constant { p0 } => Proliferation::Constant { p0 },
            ProliferationConfig::SmoothRamp { p0, width } => Proliferation::SmoothRamp { p0, width },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: Vec<usize>,
    pub extents: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub nt: usize,
}

/// Initial data: a named preset for the phase field (the other fields are
/// set to `F'(phi0)`), or three snapshot files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Equilibrium {
        c: f64,
    },
    TanhFront {
        width: f64,
        position: f64,
    },
    RandomInterior {
        amplitude: f64,
        /// Falls back to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Snapshot {
        mu: PathBuf,
        phi: PathBuf,
        sigma: PathBuf,
    },
}

/// A spatial field: constant, a snapshot file, or the `c`-equilibrium of
/// the potential (`c` for the phase field, `F'(c)` otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    Snapshot { path: PathBuf },
    Equilibrium { c: f64 },
}

/// A target in space-time: a steady field or one component of a trajectory
/// manifest with one snapshot per time node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Constant { value: f64 },
    Snapshot { path: PathBuf },
    Equilibrium { c: f64 },
    Trajectory { manifest: PathBuf, component: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub b6: f64,
    pub tau_star: f64,
    pub phi_q: TargetSpec,
    pub sigma_q: TargetSpec,
    pub phi_omega: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<RelaxationConfig>,
}

impl CostConfig {
    pub fn weights(&self) -> CostWeights {
        CostWeights {
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
            b3: self.b3,
            b4: self.b4,
            b5: self.b5,
            b6: self.b6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    pub gamma: f64,
    pub eps: f64,
    pub sigma_omega: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lower: FieldSpec,
    pub upper: FieldSpec,
}

/// Starting point of the optimiser and evaluation point of the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Constant initial control; the midpoint of the bounds when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    /// Initial terminal time; `T/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub max_outer_iters: usize,
    pub c1: f64,
    pub backtrack: f64,
    pub s0: f64,
    pub max_backtracks: usize,
    pub bb_initial_step: bool,
    pub grad_tol: f64,
    pub tau_step_scale: f64,
    pub max_tau_steps: usize,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    pub newton_clamp_margin: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self::from(OptimizerConfig::default())
    }
}

impl From<OptimizerConfig> for OptimizerSection {
    fn from(c: OptimizerConfig) -> Self {
        Self {
            max_outer_iters: c.max_outer_iters,
            c1: c.armijo.c1,
            backtrack: c.armijo.backtrack,
            s0: c.armijo.s0,
            max_backtracks: c.armijo.max_backtracks,
            bb_initial_step: c.armijo.bb_initial_step,
            grad_tol: c.grad_tol,
            tau_step_scale: c.tau_step_scale,
            max_tau_steps: c.max_tau_steps,
            newton_max_iter: c.newton.max_iter,
            newton_tol: c.newton.tol,
            newton_clamp_margin: c.newton.clamp_margin,
        }
    }
}

impl OptimizerSection {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            max_iter: self.newton_max_iter,
            tol: self.newton_tol,
            clamp_margin: self.newton_clamp_margin,
        }
    }

    pub fn to_core(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_outer_iters: self.max_outer_iters,
            armijo: ArmijoConfig {
                c1: self.c1,
                backtrack: self.backtrack,
                s0: self.s0,
                max_backtracks: self.max_backtracks,
                bb_initial_step: self.bb_initial_step,
            },
            grad_tol: self.grad_tol,
            tau_step_scale: self.tau_step_scale,
            max_tau_steps: self.max_tau_steps,
            newton: self.newton(),
        }
    }
}

/// Which oracles run and what they must achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerificationConfig {
    pub gradient: bool,
    pub duality: bool,
    pub lipschitz: bool,
    pub mass: bool,
    /// Terminal time of the gradient and duality checks; `tau0` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub gradient_directions: usize,
    pub gradient_deltas: Vec<f64>,
    /// Step sizes of the convergence-order fit.
    pub slope_deltas: Vec<f64>,
    pub gradient_tol: f64,
    pub slope_range: [f64; 2],
    pub duality_directions: usize,
    pub duality_tol: f64,
    pub lipschitz_pairs: usize,
    pub lipschitz_magnitudes: Vec<f64>,
    /// Largest admissible ratio spread across magnitudes.
    pub lipschitz_spread: f64,
    pub mass_tol: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            gradient: true,
            duality: true,
            lipschitz: true,
            mass: true,
            tau: None,
            gradient_directions: 5,
            gradient_deltas: vec![1e-4],
            slope_deltas: vec![0.4, 0.2, 0.1, 0.05],
            gradient_tol: 1e-6,
            slope_range: [1.7, 2.3],
            duality_directions: 10,
            duality_tol: 1e-9,
            lipschitz_pairs: 5,
            lipschitz_magnitudes: vec![1e-1, 1e-2, 1e-3],
            lipschitz_spread: 3.0,
            mass_tol: 1e-10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// The configuration with every default spelled out.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serialises")
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let g = &self.grid;
        let built = match g.dim {
            1 => {
                if g.n.len() != 1 || g.extents.len() != 1 {
                    return Err(ConfigError::field("grid", "a 1D grid needs one entry in n and extents"));
                }
                Grid::new_1d(g.n[0], g.extents[0])
            }
            2 => {
                if g.n.len() != 2 || g.extents.len() != 2 {
                    return Err(ConfigError::field("grid", "a 2D grid needs two entries in n and extents"));
                }
                Grid::new_2d([g.n[0], g.n[1]], [g.extents[0], g.extents[1]])
            }
            _ => return Err(ConfigError::field("grid.dim", "must be 1 or 2")),
        };
        built.map_err(|e| ConfigError::core("grid", e))
    }

    pub fn time_grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::new(self.time.t_final, self.time.nt).map_err(|e| ConfigError::core("time", e))
    }

    pub fn tau0(&self) -> f64 {
        self.control.tau0.unwrap_or(0.5 * self.time.t_final)
    }

    pub fn preset(&self) -> Option<Preset> {
        match self.initial {
            InitialConfig::Equilibrium { c } => Some(Preset::Equilibrium { c }),
            InitialConfig::TanhFront { width, position } => Some(Preset::TanhFront { width, position }),
            InitialConfig::RandomInterior { amplitude, seed } => Some(Preset::RandomInterior {
                amplitude,
                seed: seed.unwrap_or(self.seed),
            }),
            InitialConfig::Snapshot { .. } => None,
        }
    }

    /// Checks everything that can be checked without reading snapshot files.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if !(m.alpha.is_finite() && m.alpha > 0.0) {
            return Err(ConfigError::field("model.alpha", "alpha and beta must be positive constants"));
        }
        if !(m.beta.is_finite() && m.beta > 0.0) {
            return Err(ConfigError::field("model.beta", "alpha and beta must be positive constants"));
        }
        let potential = Potential::from(m.potential);
        if let Potential::Logarithmic { lambda } = potential {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(ConfigError::field("model.potential.lambda", "must be positive"));
            }
        }
        Proliferation::from(m.proliferation)
            .validate()
            .map_err(|e| ConfigError::core("model.proliferation", e))?;
        self.grid()?;
        let tg = self.time_grid()?;

        let c = &self.cost;
        let w = c.weights().as_array();
        for (i, b) in w.iter().enumerate() {
            if !(b.is_finite() && *b >= 0.0) {
                return Err(ConfigError::Field {
                    field: format!("cost.b{i}"),
                    message: "weights must be non-negative".into(),
                });
            }
        }
        if w.iter().all(|&b| b == 0.0) {
            return Err(ConfigError::field("cost", "weights b0..b6 must not all vanish"));
        }
        if !(0.0..=tg.t_final()).contains(&c.tau_star) {
            return Err(ConfigError::field("cost.tau_star", "must lie in [0, T]"));
        }
        if let Some(r) = &c.relaxation {
            if !(r.gamma.is_finite() && r.gamma >= 0.0) {
                return Err(ConfigError::field("cost.relaxation.gamma", "must be non-negative"));
            }
            if !(r.eps.is_finite() && r.eps > 0.0) {
                return Err(ConfigError::field("cost.relaxation.eps", "must be positive"));
            }
        }
        if let (FieldSpec::Constant { value: lo }, FieldSpec::Constant { value: hi }) =
            (&self.bounds.lower, &self.bounds.upper)
        {
            ControlBounds::constant(*lo, *hi).map_err(|e| ConfigError::core("bounds", e))?;
        }
        if let Some(u0) = self.control.u0 {
            if !u0.is_finite() {
                return Err(ConfigError::field("control.u0", "must be finite"));
            }
        }
        let tau0 = self.tau0();
        if !(0.0..=tg.t_final()).contains(&tau0) {
            return Err(ConfigError::field("control.tau0", "must lie in [0, T]"));
        }
        if let Some(tau) = self.verification.tau {
            if !(0.0..=tg.t_final()).contains(&tau) {
                return Err(ConfigError::field("verification.tau", "must lie in [0, T]"));
            }
        }
        if self.output.snapshot_stride == 0 {
            return Err(ConfigError::field("output.snapshot_stride", "must be at least 1"));
        }
        self.optimizer
            .to_core()
            .validate()
            .map_err(|e| ConfigError::core("optimizer", e))?;
        let v = &self.verification;
        if v.gradient_deltas.iter().chain(&v.slope_deltas).chain(&v.lipschitz_magnitudes).any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(ConfigError::field("verification", "step sizes and magnitudes must be positive"));
        }
        if v.gradient && (v.gradient_directions == 0 || v.gradient_deltas.is_empty()) {
            return Err(ConfigError::field("verification.gradient_directions", "need at least one direction and step"));
        }
        Ok(())
    }

    /// Makes relative snapshot paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_field = |f: &mut FieldSpec| {
            if let FieldSpec::Snapshot { path } = f {
                fix(path);
            }
        };
        let fix_target = |t: &mut TargetSpec| match t {
            TargetSpec::Snapshot { path } => fix(path),
            TargetSpec::Trajectory { manifest, .. } => fix(manifest),
            _ => {}
        };
        if let InitialConfig::Snapshot { mu, phi, sigma } = &mut self.initial {
            fix(mu);
            fix(phi);
            fix(sigma);
        }
        fix_target(&mut self.cost.phi_q);
        fix_target(&mut self.cost.sigma_q);
        fix_field(&mut self.cost.phi_omega);
        if let Some(r) = &mut self.cost.relaxation {
            fix_field(&mut r.sigma_omega);
        }
        fix_field(&mut self.bounds.lower);
        fix_field(&mut self.bounds.upper);
    }
}
