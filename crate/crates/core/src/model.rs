//! Model parameters, initial data and controls.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{inner_unchecked, Field, Grid, TimeGrid};
use crate::potential::{Potential, Proliferation};
use crate::trajectory::StateFrame;

/// Physical and numerical parameters of the state system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Relaxation coefficient in the chemical-potential equation.
    pub alpha: f64,
    /// Viscosity coefficient in the phase-field equation.
    pub beta: f64,
    pub potential: Potential,
    pub proliferation: Proliferation,
    pub grid: Grid,
    pub time_grid: TimeGrid,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "alpha and beta must be positive constants",
            });
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "alpha and beta must be positive constants",
            });
        }
        if let Potential::Logarithmic { lambda } = self.potential {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "potential.lambda",
                    reason: "must be positive",
                });
            }
        }
        self.proliferation.validate()
    }

    pub fn dt(&self) -> f64 {
        self.time_grid.dt()
    }
}

/// `(mu0, phi0, sigma0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub mu0: Field,
    pub phi0: Field,
    pub sigma0: Field,
}

impl InitialData {
    /// Checks grids, finiteness and, for a singular potential, that `phi0`
    /// lies strictly inside the potential's domain.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        for f in [&self.mu0, &self.phi0, &self.sigma0] {
            if *f.grid() != params.grid {
                return Err(Error::Dimension("initial data grid differs from model grid"));
            }
            if !f.is_finite() {
                return Err(Error::NanDetected("initial data"));
            }
        }
        if params.potential.is_singular() {
            params.potential.check_domain(self.phi0.min())?;
            params.potential.check_domain(self.phi0.max())?;
        }
        Ok(())
    }

    pub fn as_frame(&self) -> StateFrame {
        StateFrame {
            mu: self.mu0.clone(),
            phi: self.phi0.clone(),
            sigma: self.sigma0.clone(),
        }
    }
}

/// One bound of the admissible box: constant or varying in space.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundValue {
    Constant(f64),
    Field(Field),
}

impl BoundValue {
    #[inline]
    pub fn at(&self, cell: usize) -> f64 {
        match self {
            BoundValue::Constant(c) => *c,
            BoundValue::Field(f) => f.values()[cell],
        }
    }
}

/// Box `u_* <= u <= u^*` defining the admissible controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBounds {
    pub lower: BoundValue,
    pub upper: BoundValue,
}

impl ControlBounds {
    pub fn new(lower: BoundValue, upper: BoundValue, grid: &Grid) -> Result<Self> {
        let bounds = Self { lower, upper };
        bounds.validate(grid)?;
        Ok(bounds)
    }

    pub fn constant(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: "lower bound exceeds upper bound",
            });
        }
        Ok(Self {
            lower: BoundValue::Constant(lower),
            upper: BoundValue::Constant(upper),
        })
    }

    pub fn unbounded() -> Self {
        Self {
            lower: BoundValue::Constant(f64::NEG_INFINITY),
            upper: BoundValue::Constant(f64::INFINITY),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for b in [&self.lower, &self.upper] {
            if let BoundValue::Field(f) = b {
                if f.grid() != grid {
                    return Err(Error::Dimension("bound field grid differs from model grid"));
                }
            }
        }
        for cell in 0..grid.cell_count() {
            let (lo, hi) = (self.lower.at(cell), self.upper.at(cell));
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidParameter {
                    name: "bounds",
                    reason: "lower bound exceeds upper bound",
                });
            }
        }
        Ok(())
    }

    /// Midpoint of the box, or zero where a side is unbounded.
    pub fn midpoint(&self, cell: usize) -> f64 {
        let (lo, hi) = (self.lower.at(cell), self.upper.at(cell));
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo.max(0.0),
            (false, true) => hi.min(0.0),
            (false, false) => 0.0,
        }
    }
}

/// Control piecewise constant in time: `values[k]` acts on `[t_k, t_{k+1})`,
/// so a control carries `nt` spatial fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    time_grid: TimeGrid,
    values: Vec<Field>,
    bounds: ControlBounds,
}

impl ControlField {
    pub fn new(time_grid: TimeGrid, values: Vec<Field>, bounds: ControlBounds) -> Result<Self> {
        if values.len() != time_grid.nt() {
            return Err(Error::Dimension("control needs one field per time interval"));
        }
        let grid = *values[0].grid();
        if values.iter().any(|f| *f.grid() != grid) {
            return Err(Error::Dimension("control fields live on different grids"));
        }
        bounds.validate(&grid)?;
        Ok(Self {
            time_grid,
            values,
            bounds,
        })
    }

    pub fn constant(grid: Grid, time_grid: TimeGrid, value: f64, bounds: ControlBounds) -> Result<Self> {
        let values = (0..time_grid.nt()).map(|_| Field::constant(grid, value)).collect();
        Self::new(time_grid, values, bounds)
    }

    /// Midpoint of the admissible box at every interval.
    pub fn midpoint(grid: Grid, time_grid: TimeGrid, bounds: ControlBounds) -> Result<Self> {
        bounds.validate(&grid)?;
        let mid = Field::from_values(
            grid,
            (0..grid.cell_count()).map(|c| bounds.midpoint(c)).collect(),
        )?;
        let values = (0..time_grid.nt()).map(|_| mid.clone()).collect();
        Self::new(time_grid, values, bounds)
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn grid(&self) -> &Grid {
        self.values[0].grid()
    }

    pub fn values(&self) -> &[Field] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Field] {
        &mut self.values
    }

    pub fn bounds(&self) -> &ControlBounds {
        &self.bounds
    }

    pub fn interval(&self, k: usize) -> &Field {
        &self.values[k]
    }

    /// Same time grid, grid and bounds but different values.
    pub fn with_values(&self, values: Vec<Field>) -> Result<Self> {
        Self::new(self.time_grid, values, self.bounds.clone())
    }

    pub fn zeros_like(&self) -> Self {
        let grid = *self.grid();
        Self {
            time_grid: self.time_grid,
            values: (0..self.values.len()).map(|_| Field::zeros(grid)).collect(),
            bounds: self.bounds.clone(),
        }
    }

    pub fn is_compatible(&self, other: &ControlField) -> bool {
        self.time_grid == other.time_grid && self.grid() == other.grid()
    }

    fn check_compatible(&self, other: &ControlField) -> Result<()> {
        if !self.is_compatible(other) {
            return Err(Error::Dimension("controls live on different space-time grids"));
        }
        Ok(())
    }

    /// L2(Q) inner product, exact for piecewise-constant-in-time controls.
    pub fn inner(&self, other: &ControlField) -> Result<f64> {
        self.check_compatible(other)?;
        let dt = self.time_grid.dt();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| dt * inner_unchecked(a, b))
            .sum())
    }

    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.inner(self).unwrap_or(0.0))
    }

    /// `self + a * dir`, keeping this control's bounds.
    pub fn add_scaled(&self, a: f64, dir: &ControlField) -> Result<ControlField> {
        self.check_compatible(dir)?;
        let values = self
            .values
            .iter()
            .zip(&dir.values)
            .map(|(u, d)| u.zip_map(d, |x, y| x + a * y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            time_grid: self.time_grid,
            values,
            bounds: self.bounds.clone(),
        })
    }

    pub fn sub(&self, other: &ControlField) -> Result<ControlField> {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> ControlField {
        Self {
            time_grid: self.time_grid,
            values: self.values.iter().map(|f| f.scale(s)).collect(),
            bounds: self.bounds.clone(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.values.iter().all(|f| {
            f.values()
                .iter()
                .enumerate()
                .all(|(c, &v)| v >= self.bounds.lower.at(c) && v <= self.bounds.upper.at(c))
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(Field::is_finite)
    }

    /// Pointwise clamp onto the admissible box.
    pub fn project(&self) -> ControlField {
        let values = self
            .values
            .iter()
            .map(|f| {
                let mut g = f.clone();
                for (c, v) in g.values_mut().iter_mut().enumerate() {
                    *v = v.max(self.bounds.lower.at(c)).min(self.bounds.upper.at(c));
                }
                g
            })
            .collect();
        Self {
            time_grid: self.time_grid,
            values,
            bounds: self.bounds.clone(),
        }
    }
}

/// Pointwise projection onto `U_ad`.
pub fn project_control(u: &ControlField) -> ControlField {
    u.project()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn setup() -> (Grid, TimeGrid) {
        (Grid::new_1d(6, 1.0).unwrap(), TimeGrid::new(1.0, 4).unwrap())
    }

    #[test]
    fn bounds_must_be_ordered() {
        assert!(ControlBounds::constant(1.0, 0.0).is_err());
        let (grid, _) = setup();
        let lower = BoundValue::Field(Field::constant(grid, 2.0));
        assert!(ControlBounds::new(lower, BoundValue::Constant(1.0), &grid).is_err());
    }

    #[test]
    fn projection_examples() {
        let (grid, tg) = setup();
        let bounds = ControlBounds::constant(-1.0, 1.0).unwrap();
        let inside = ControlField::constant(grid, tg, 0.3, bounds.clone()).unwrap();
        assert_eq!(inside.project(), inside);
        let above = ControlField::constant(grid, tg, 2.0, bounds.clone()).unwrap();
        let p = project_control(&above);
        assert!(p.values().iter().all(|f| f.values().iter().all(|&v| v == 1.0)));
        assert!(p.is_feasible());
        assert!(!above.is_feasible());
    }

    #[test]
    fn control_inner_product() {
        let (grid, tg) = setup();
        let one = ControlField::constant(grid, tg, 1.0, ControlBounds::unbounded()).unwrap();
        assert!((one.inner(&one).unwrap() - 1.0).abs() < 1e-15);
        let wrong = ControlField::new(tg, vec![Field::zeros(grid)], ControlBounds::unbounded());
        assert!(wrong.is_err());
    }

    #[test]
    fn midpoint_initialisation() {
        let (grid, tg) = setup();
        let u = ControlField::midpoint(grid, tg, ControlBounds::constant(0.0, 2.0).unwrap()).unwrap();
        assert!(u.values().iter().all(|f| f.values().iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn params_reject_nonpositive_coefficients() {
        let (grid, tg) = setup();
        let mut p = ModelParams {
            alpha: 0.1,
            beta: 0.0,
            potential: Potential::Quartic,
            proliferation: Proliferation::Constant { p0: 1.0 },
            grid,
            time_grid: tg,
        };
        assert!(p.validate().is_err());
        p.beta = 0.1;
        assert!(p.validate().is_ok());
        p.alpha = -1.0;
        assert!(p.validate().is_err());
    }
}
