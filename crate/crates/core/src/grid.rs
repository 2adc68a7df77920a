//! Cell-centred tensor grids, scalar fields and the Neumann Laplacian.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform cell-centred grid on an interval (1D) or rectangle (2D).
///
/// In 1D the second axis is degenerate (`n[1] == 1`, unit extent), so cell
/// volumes and indexing are uniform across dimensions. Cells are stored with
/// the first axis running fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    extents: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        Self::new(1, [n, 1], [length, 1.0])
    }

    pub fn new_2d(n: [usize; 2], extents: [f64; 2]) -> Result<Self> {
        Self::new(2, n, extents)
    }

    fn new(dim: usize, n: [usize; 2], extents: [f64; 2]) -> Result<Self> {
        for axis in 0..dim {
            if n[axis] < 3 {
                return Err(Error::InvalidParameter {
                    name: "grid.n",
                    reason: "at least 3 cells per axis are required",
                });
            }
            if !(extents[axis].is_finite() && extents[axis] > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "grid.extents",
                    reason: "extents must be positive and finite",
                });
            }
        }
        Ok(Self { dim, n, extents })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis; the second entry is 1 for a 1D grid.
    pub fn n(&self) -> [usize; 2] {
        self.n
    }

    pub fn extents(&self) -> [f64; 2] {
        self.extents
    }

    pub fn spacing(&self) -> [f64; 2] {
        [
            self.extents[0] / self.n[0] as f64,
            self.extents[1] / self.n[1] as f64,
        ]
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1]
    }

    /// Measure of the whole domain.
    pub fn volume(&self) -> f64 {
        self.extents[0] * self.extents[1]
    }

    /// Coordinates of the centre of cell `idx`. In 1D the second entry is
    /// meaningless and set to zero.
    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let i = idx % self.n[0];
        let j = idx / self.n[0];
        let y = if self.dim == 2 { (j as f64 + 0.5) * h[1] } else { 0.0 };
        [(i as f64 + 0.5) * h[0], y]
    }

    /// Calls `f(neighbour, weight)` for every stencil neighbour of `idx`
    /// that lies inside the grid. The Laplacian row of `idx` is
    /// `sum weight * (v[neighbour] - v[idx])`; reflected ghost cells
    /// contribute nothing.
    pub(crate) fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize, f64)) {
        let h = self.spacing();
        let i = idx % self.n[0];
        let j = idx / self.n[0];
        let wx = 1.0 / (h[0] * h[0]);
        if i > 0 {
            f(idx - 1, wx);
        }
        if i + 1 < self.n[0] {
            f(idx + 1, wx);
        }
        if self.dim == 2 {
            let wy = 1.0 / (h[1] * h[1]);
            if j > 0 {
                f(idx - self.n[0], wy);
            }
            if j + 1 < self.n[1] {
                f(idx + self.n[0], wy);
            }
        }
    }

    /// Index distance between a cell and its farthest stencil neighbour.
    pub(crate) fn stencil_reach(&self) -> usize {
        if self.dim == 2 {
            self.n[0]
        } else {
            1
        }
    }
}

/// Scalar field with one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.cell_count()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Dimension("value count differs from grid cell count"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let values = (0..grid.cell_count())
            .map(|idx| f(grid.cell_center(idx)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination `f(a, b)`; grids must match.
    pub fn zip_map(&self, other: &Field, mut f: impl FnMut(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Field) -> Result<()> {
        self.check_same_grid(x)?;
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete L2(Omega) norm.
    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(inner_unchecked(self, self))
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension("fields live on different grids"));
        }
        Ok(())
    }
}

/// Five-point (2D) or three-point (1D) Laplacian with homogeneous Neumann
/// conditions imposed by reflecting ghost cells.
pub fn laplacian_neumann(f: &Field) -> Field {
    let grid = f.grid;
    let v = &f.values;
    let values = (0..grid.cell_count())
        .map(|idx| {
            let mut acc = 0.0;
            grid.for_each_neighbor(idx, |nb, w| acc += w * (v[nb] - v[idx]));
            acc
        })
        .collect();
    Field { grid, values }
}

/// Midpoint rule. The summation runs in storage order so results are
/// reproducible bit for bit.
pub fn integrate(f: &Field) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// L2(Omega) inner product.
pub fn inner(f: &Field, g: &Field) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(inner_unchecked(f, g))
}

pub(crate) fn inner_unchecked(f: &Field, g: &Field) -> f64 {
    f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * f.grid.cell_volume()
}

/// Uniform time grid `t_k = k * dt`, `k = 0..=nt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    nt: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, nt: usize) -> Result<Self> {
        if nt == 0 {
            return Err(Error::InvalidParameter {
                name: "time.nt",
                reason: "at least one time step is required",
            });
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidParameter {
                name: "time.t_final",
                reason: "final time must be positive and finite",
            });
        }
        Ok(Self { t_final, nt })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.nt {
            self.t_final
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_final).contains(&t) {
            return Err(Error::TimeOutOfRange {
                time: t,
                horizon: self.t_final,
            });
        }
        Ok(())
    }

    /// Node closest to `t` (ties go to the later node).
    pub fn nearest_node(&self, t: f64) -> usize {
        let k = libm::round(t / self.dt());
        (k.max(0.0) as usize).min(self.nt)
    }

    /// Locates `t` on the grid: returns `(k, theta)` with `t` in
    /// `(t_{k-1}, t_k]` and `t = t_{k-1} + theta * dt`, `theta` in `(0, 1]`.
    /// `t = 0` maps to `(0, 1)`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        self.check_time(t)?;
        if t <= 0.0 {
            return Ok((0, 1.0));
        }
        let dt = self.dt();
        let mut k = (libm::ceil(t / dt) as usize).clamp(1, self.nt);
        while k > 1 && t <= self.node(k - 1) {
            k -= 1;
        }
        while k < self.nt && t > self.node(k) {
            k += 1;
        }
        if t == self.node(k) {
            return Ok((k, 1.0));
        }
        let theta = ((t - self.node(k - 1)) / dt).clamp(f64::MIN_POSITIVE, 1.0);
        Ok((k, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(n: usize) -> Grid {
        Grid::new_1d(n, 1.0).unwrap()
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(Grid::new_1d(2, 1.0).is_err());
        assert!(Grid::new_2d([4, 2], [1.0, 1.0]).is_err());
        assert!(Grid::new_1d(8, 0.0).is_err());
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let f = Field::constant(grid_1d(16), 3.5);
        assert!(laplacian_neumann(&f).values().iter().all(|&v| v == 0.0));
        let g = Field::constant(Grid::new_2d([5, 7], [1.0, 2.0]).unwrap(), -1.25);
        assert!(laplacian_neumann(&g).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let grid = grid_1d(32);
        let f = Field::from_fn(grid, |x| x[0] * x[0]);
        let lap = laplacian_neumann(&f);
        for &v in &lap.values()[1..31] {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn integrate_examples() {
        let grid = grid_1d(64);
        assert_eq!(integrate(&Field::constant(grid, 1.0)), 1.0);
        assert_eq!(integrate(&Field::zeros(grid)), 0.0);
        assert_eq!(integrate(&Field::from_fn(grid, |x| x[0])), 0.5);
    }

    #[test]
    fn inner_grid_mismatch() {
        let a = Field::zeros(grid_1d(8));
        let b = Field::zeros(grid_1d(9));
        assert!(matches!(inner(&a, &b), Err(Error::Dimension(_))));
        let one = Field::constant(grid_1d(8), 1.0);
        assert_eq!(inner(&one, &one).unwrap(), 1.0);
    }

    #[test]
    fn time_grid_locate() {
        let tg = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(tg.locate(0.0).unwrap(), (0, 1.0));
        assert_eq!(tg.locate(0.25).unwrap(), (1, 1.0));
        let (k, th) = tg.locate(0.3).unwrap();
        assert_eq!(k, 2);
        assert!((th - 0.2).abs() < 1e-12);
        assert_eq!(tg.locate(1.0).unwrap(), (4, 1.0));
        assert!(tg.locate(1.5).is_err());
        assert!(tg.locate(-0.1).is_err());
        assert_eq!(tg.nearest_node(0.37), 1);
        assert_eq!(tg.node(4), 1.0);
    }
}
