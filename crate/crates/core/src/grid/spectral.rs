//! Diagonalisation of the Neumann Laplacian by the even-symmetric cosine
//! transform (DCT-II forward, DCT-III inverse).

use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use super::{Field, Grid};

/// Cached cosine transforms and stencil eigenvalues for one grid.
///
/// The discrete eigenvalues of `−Δ_h` are
/// `λ_k = (2/h²)(1 − cos(πk/n))` per direction, summed over directions.
#[derive(Clone)]
pub struct NeumannSpectral {
    grid: Grid,
    tx: Arc<dyn TransformType2And3<f64>>,
    ty: Option<Arc<dyn TransformType2And3<f64>>>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
}

impl std::fmt::Debug for NeumannSpectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeumannSpectral").field("grid", &self.grid).finish()
    }
}

fn stencil_eigenvalues(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| 2.0 / (h * h) * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect()
}

impl NeumannSpectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = DctPlanner::new();
        let tx = planner.plan_dct2(grid.nx());
        let (ty, eig_y) = if grid.dim() == 2 {
            (Some(planner.plan_dct2(grid.ny())), stencil_eigenvalues(grid.ny(), grid.hy()))
        } else {
            (None, vec![0.0])
        };
        Self {
            grid,
            tx,
            ty,
            eig_x: stencil_eigenvalues(grid.nx(), grid.hx()),
            eig_y,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Eigenvalue of `−Δ_h` for the coefficient at flat index `idx`.
    #[inline]
    pub fn eigenvalue(&self, idx: usize) -> f64 {
        let nx = self.grid.nx();
        self.eig_x[idx % nx] + self.eig_y[idx / nx]
    }

    /// Eigenvalues of `−Δ_h` in coefficient order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|k| self.eigenvalue(k)).collect()
    }

    fn along_y(&self, data: &mut [f64], inverse: bool) {
        let Some(ty) = &self.ty else { return };
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut column = vec![0.0; ny];
        let mut scratch = vec![0.0; ty.get_scratch_len()];
        for i in 0..nx {
            for j in 0..ny {
                column[j] = data[j * nx + i];
            }
            if inverse {
                ty.process_dct3_with_scratch(&mut column, &mut scratch);
            } else {
                ty.process_dct2_with_scratch(&mut column, &mut scratch);
            }
            for j in 0..ny {
                data[j * nx + i] = column[j];
            }
        }
    }

    fn along_x(&self, data: &mut [f64], inverse: bool) {
        let mut scratch = vec![0.0; self.tx.get_scratch_len()];
        for row in data.chunks_exact_mut(self.grid.nx()) {
            if inverse {
                self.tx.process_dct3_with_scratch(row, &mut scratch);
            } else {
                self.tx.process_dct2_with_scratch(row, &mut scratch);
            }
        }
    }

    /// Cosine coefficients of `values` (unnormalised DCT-II).
    pub fn forward(&self, values: &[f64]) -> Vec<f64> {
        let mut data = values.to_vec();
        self.along_x(&mut data, false);
        self.along_y(&mut data, false);
        data
    }

    /// Inverse of [`NeumannSpectral::forward`].
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.along_y(&mut data, true);
        self.along_x(&mut data, true);
        let mut scale = 2.0 / self.grid.nx() as f64;
        if self.grid.dim() == 2 {
            scale *= 2.0 / self.grid.ny() as f64;
        }
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Solves `(shift − Δ_h) u = rhs`. With `shift = 0` the constant mode of
    /// `rhs` is discarded and the zero-mean solution returned.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let mut c = self.forward(rhs);
        for (k, v) in c.iter_mut().enumerate() {
            let d = shift + self.eigenvalue(k);
            *v = if d == 0.0 { 0.0 } else { *v / d };
        }
        self.inverse(&c)
    }

    /// `Δ_h f` evaluated spectrally; agrees with the stencil to roundoff.
    pub fn laplacian(&self, f: &Field) -> Field {
        let mut c = self.forward(f.values());
        for (k, v) in c.iter_mut().enumerate() {
            *v *= -self.eigenvalue(k);
        }
        Field::from_vec_unchecked(self.grid, self.inverse(&c))
    }
}
