//! Cell-centred uniform grids on a rectangle (or interval) with homogeneous
//! Neumann boundary conditions imposed through mirrored ghost cells.

pub mod krylov;
mod ops;
mod spectral;

pub use ops::{gradient, gradient_sq, laplacian, solve_helmholtz, DEFAULT_TOL};
pub use spectral::NeumannSpectral;

use crate::{Error, Result};

/// Geometry of a 1D or 2D cell-centred grid.
///
/// A 1D grid is stored as `n_y = 1`, `h_y = 1`, so cell areas and the total
/// measure reduce to lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
}

pub const MIN_CELLS: usize = 4;

impl Grid {
    pub fn new_1d(nx: usize, lx: f64) -> Result<Self> {
        Self::from_spacing(1, nx, 1, lx / nx as f64, 1.0)
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::from_spacing(2, nx, ny, lx / nx as f64, ly / ny as f64)
    }

    pub fn from_spacing(dim: usize, nx: usize, ny: usize, hx: f64, hy: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match dim {
            1 if ny != 1 => return bad(format!("1D grid needs n_y = 1, got {ny}")),
            1 | 2 => {}
            _ => return bad(format!("dimension must be 1 or 2, got {dim}")),
        }
        if nx < MIN_CELLS || (dim == 2 && ny < MIN_CELLS) {
            return bad(format!("need at least {MIN_CELLS} cells per direction, got {nx} x {ny}"));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return bad(format!("cell widths must be positive, got {hx} x {hy}"));
        }
        Ok(Self { dim, nx, ny, hx, hy })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn lx(&self) -> f64 {
        self.nx as f64 * self.hx
    }
    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.hy
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }
    /// `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.lx() * self.ly()
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    /// Cell-centre abscissa.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx
    }
    /// Cell-centre ordinate; `0.5` for 1D grids.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if self.dim == 1 {
            0.5
        } else {
            (j as f64 + 0.5) * self.hy
        }
    }
}

/// Scalar samples on a [`Grid`], row-major (`x` fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x, y)` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
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

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Midpoint quadrature `∫_Ω f`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `[f] = ∫_Ω f / |Ω|`.
    pub fn average(&self) -> f64 {
        self.integrate() / self.grid.measure()
    }

    /// `(f, g)₂` under midpoint quadrature.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Free-function forms of the quadrature.
pub fn integrate(f: &Field) -> f64 {
    f.integrate()
}

pub fn average(f: &Field) -> f64 {
    f.average()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new_2d(3, 8, 1.0, 1.0).is_err());
        assert!(Grid::new_1d(8, -1.0).is_err());
        assert!(Grid::from_spacing(3, 8, 8, 0.1, 0.1).is_err());
        assert!(Grid::from_spacing(1, 8, 2, 0.1, 1.0).is_err());
        let g = Grid::new_2d(8, 4, 2.0, 1.0).unwrap();
        assert_eq!(g.measure(), 2.0);
        assert_eq!(g.len(), 32);
        assert_eq!(Grid::new_1d(10, 3.0).unwrap().measure(), 3.0);
    }

    #[test]
    fn quadrature_of_constants() {
        let g = Grid::new_2d(8, 12, 2.0, 1.5).unwrap();
        let c = Field::constant(g, 1.7);
        assert!((c.integrate() - 1.7 * 3.0).abs() < 1e-14);
        assert!((c.average() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn cosine_integrates_to_zero() {
        let g = Grid::new_1d(37, 2.0).unwrap();
        let f = Field::from_fn(g, |x, _| (std::f64::consts::PI * x / 2.0).cos());
        assert!(f.integrate().abs() < 1e-12);
        let g = Grid::new_2d(16, 9, 1.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x, _| (std::f64::consts::PI * x).cos());
        assert!(f.average().abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::new(g, vec![0.0; 3]).is_err());
    }
}
