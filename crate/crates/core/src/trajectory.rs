//! Time-indexed field triples.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, TimeGrid};

/// A frame made of three fields on a common grid.
pub trait FieldTriple: Clone {
    fn from_fields(fields: [Field; 3]) -> Self;
    fn fields(&self) -> [&Field; 3];

    fn grid(&self) -> &Grid {
        self.fields()[0].grid()
    }

    fn zeros(grid: Grid) -> Self {
        Self::from_fields([Field::zeros(grid), Field::zeros(grid), Field::zeros(grid)])
    }

    fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

macro_rules! triple {
    ($(#[$doc:meta])* $name:ident { $a:ident, $b:ident, $c:ident }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            pub $a: Field,
            pub $b: Field,
            pub $c: Field,
        }

        impl FieldTriple for $name {
            fn from_fields([$a, $b, $c]: [Field; 3]) -> Self {
                Self { $a, $b, $c }
            }

            fn fields(&self) -> [&Field; 3] {
                [&self.$a, &self.$b, &self.$c]
            }
        }
    };
}

triple!(
    /// Chemical potential, phase field and nutrient.
    StateFrame { mu, phi, sigma }
);
triple!(
    /// Directional derivative of the state: `(eta, theta, rho) = DS(u) h`.
    SensitivityFrame { eta, theta, rho }
);
triple!(
    /// Adjoint variables. `q` pairs with the phase-field equation, `p` with
    /// the chemical-potential equation and `r` with the nutrient equation.
    AdjointFrame { q, p, r }
);

/// One frame per time node, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    time_grid: TimeGrid,
    frames: Vec<F>,
}

pub type StateTrajectory = Trajectory<StateFrame>;
pub type SensitivityTrajectory = Trajectory<SensitivityFrame>;
pub type AdjointTrajectory = Trajectory<AdjointFrame>;

impl<F: FieldTriple> Trajectory<F> {
    /// Builds a trajectory covering nodes `0..frames.len()`. Full state
    /// trajectories carry `nt + 1` frames; adjoint trajectories stop at the
    /// terminal node.
    pub fn new(time_grid: TimeGrid, frames: Vec<F>) -> Result<Self> {
        if frames.is_empty() || frames.len() > time_grid.nt() + 1 {
            return Err(Error::Dimension("frame count does not fit the time grid"));
        }
        let grid = *frames[0].grid();
        for frame in &frames {
            if frame.fields().iter().any(|f| *f.grid() != grid) {
                return Err(Error::Dimension("frames live on different grids"));
            }
        }
        Ok(Self { time_grid, frames })
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    pub fn frames(&self) -> &[F] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &F {
        &self.frames[k]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Index of the last stored node.
    pub fn last_index(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn is_complete(&self) -> bool {
        self.frames.len() == self.time_grid.nt() + 1
    }

    pub fn into_frames(self) -> Vec<F> {
        self.frames
    }

    /// Piecewise-linear interpolation of component `component` (0, 1 or 2
    /// in the frame's field order) at time `tau`. At a node the stored frame
    /// is returned unchanged.
    pub fn interpolate(&self, component: usize, tau: f64) -> Result<Field> {
        if component > 2 {
            return Err(Error::Dimension("component index must be 0, 1 or 2"));
        }
        let (k, theta) = self.time_grid.locate(tau)?;
        if k > self.last_index() {
            return Err(Error::TimeOutOfRange {
                time: tau,
                horizon: self.time_grid.node(self.last_index()),
            });
        }
        let upper = self.frames[k].fields()[component];
        if theta == 1.0 {
            return Ok(upper.clone());
        }
        let lower = self.frames[k - 1].fields()[component];
        lower.zip_map(upper, |a, b| a + theta * (b - a))
    }
}

/// Interpolates a component of any trajectory; thin wrapper over
/// [`Trajectory::interpolate`].
pub fn interpolate_in_time<F: FieldTriple>(
    traj: &Trajectory<F>,
    component: usize,
    tau: f64,
) -> Result<Field> {
    traj.interpolate(component, tau)
}
