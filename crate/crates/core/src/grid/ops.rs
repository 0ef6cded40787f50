use super::krylov::pcg;
use super::{Field, Grid, NeumannSpectral};
use crate::{Error, Result};

/// Default relative residual for implicit solves.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_CG_ITER: usize = 2000;

/// Neighbour values with mirrored ghosts, i.e. `f[-1] = f[0]`,
/// `f[n] = f[n-1]`.
#[inline]
fn neighbours(v: &[f64], grid: &Grid, i: usize, j: usize) -> (f64, f64, f64, f64) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let c = v[grid.index(i, j)];
    let w = if i > 0 { v[grid.index(i - 1, j)] } else { c };
    let e = if i + 1 < nx { v[grid.index(i + 1, j)] } else { c };
    let s = if j > 0 { v[grid.index(i, j - 1)] } else { c };
    let n = if j + 1 < ny { v[grid.index(i, j + 1)] } else { c };
    (w, e, s, n)
}

/// Five-point (three-point in 1D) Neumann Laplacian.
pub fn laplacian(f: &Field) -> Field {
    let grid = *f.grid();
    let v = f.values();
    let (ihx2, ihy2) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
    let mut out = Vec::with_capacity(v.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let c = v[grid.index(i, j)];
            let (w, e, s, n) = neighbours(v, &grid, i, j);
            let mut lap = (w - 2.0 * c + e) * ihx2;
            if grid.dim() == 2 {
                lap += (s - 2.0 * c + n) * ihy2;
            }
            out.push(lap);
        }
    }
    Field::from_vec_unchecked(grid, out)
}

/// `|∇f|²` at cell centres as the mean of the squared one-sided differences
/// on either side, per direction. Boundary faces carry zero flux, so
/// `∫ gradient_sq(f) = −(Δ_h f, f)` holds exactly.
pub fn gradient_sq(f: &Field) -> Field {
    let grid = *f.grid();
    let v = f.values();
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut out = Vec::with_capacity(v.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let c = v[grid.index(i, j)];
            let (w, e, s, n) = neighbours(v, &grid, i, j);
            let mut g = 0.5 * (((e - c) / hx).powi(2) + ((c - w) / hx).powi(2));
            if grid.dim() == 2 {
                g += 0.5 * (((n - c) / hy).powi(2) + ((c - s) / hy).powi(2));
            }
            out.push(g);
        }
    }
    Field::from_vec_unchecked(grid, out)
}

/// Centred-difference gradient components `(∂_x f, ∂_y f)`; `∂_y f ≡ 0`
/// in 1D.
pub fn gradient(f: &Field) -> (Field, Field) {
    let grid = *f.grid();
    let v = f.values();
    let mut gx = Vec::with_capacity(v.len());
    let mut gy = Vec::with_capacity(v.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (w, e, s, n) = neighbours(v, &grid, i, j);
            gx.push((e - w) / (2.0 * grid.hx()));
            gy.push(if grid.dim() == 2 { (n - s) / (2.0 * grid.hy()) } else { 0.0 });
        }
    }
    (Field::from_vec_unchecked(grid, gx), Field::from_vec_unchecked(grid, gy))
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `a·u + b·u − Δ_h u = rhs` with homogeneous Neumann conditions.
///
/// The returned `u` satisfies `‖a·u + b·u − Δ_h u − rhs‖ <= tol·‖rhs‖`
/// (Euclidean norms over cells). A spatially constant `b` is solved directly
/// by the cosine transform; otherwise conjugate gradients run with the
/// transform at the mean of `b` as preconditioner. With `a = 0` and `b ≡ 0`
/// the zero-mean solution is returned, and `rhs` must have zero mean.
pub fn solve_helmholtz(a: f64, b_field: &Field, rhs: &Field, tol: f64) -> Result<Field> {
    let spectral = NeumannSpectral::new(*rhs.grid());
    spectral.solve_helmholtz(a, b_field, rhs, tol)
}

impl NeumannSpectral {
    /// [`solve_helmholtz`] with cached transforms.
    pub fn solve_helmholtz(&self, a: f64, b_field: &Field, rhs: &Field, tol: f64) -> Result<Field> {
        let grid = *self.grid();
        if b_field.grid() != &grid || rhs.grid() != &grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        if !(a >= 0.0) {
            return Err(Error::InvalidArgument(format!("shift a = {a} must be nonnegative")));
        }
        let (bmin, bmax) = (b_field.min(), b_field.max());
        if !(bmin >= 0.0) {
            return Err(Error::InvalidArgument(format!("b_field has negative value {bmin}")));
        }
        let r = rhs.values();
        if bmax - bmin <= 1e-14 * (1.0 + bmax) {
            let shift = a + bmax;
            if shift == 0.0 {
                let mean = rhs.average();
                let scale = (euclid(r) / (r.len() as f64).sqrt()).max(1.0);
                if mean.abs() > tol * scale {
                    return Err(Error::Solvability { mean });
                }
            }
            return Ok(Field::from_vec_unchecked(grid, self.solve_shifted(shift, r)));
        }
        let b = b_field.values();
        let bbar = b_field.average();
        let apply = |u: &[f64]| -> Vec<f64> {
            let lap = super::laplacian(&Field::from_vec_unchecked(grid, u.to_vec()));
            u.iter()
                .zip(b)
                .zip(lap.values())
                .map(|((&u, &b), &l)| (a + b) * u - l)
                .collect()
        };
        let x0 = self.solve_shifted(a + bbar, r);
        let sol = pcg(apply, |res| self.solve_shifted(a + bbar, res), r, x0, tol, MAX_CG_ITER)?;
        Ok(Field::from_vec_unchecked(grid, sol.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn residual(a: f64, b: &Field, u: &Field, rhs: &Field) -> f64 {
        let lap = laplacian(u);
        let r: Vec<f64> = (0..u.values().len())
            .map(|k| a * u.values()[k] + b.values()[k] * u.values()[k] - lap.values()[k] - rhs.values()[k])
            .collect();
        euclid(&r)
    }

    #[test]
    fn laplacian_kills_constants() {
        let g = Grid::new_2d(9, 6, 1.0, 2.0).unwrap();
        let lap = laplacian(&Field::constant(g, 3.3));
        assert!(lap.values().iter().all(|&v| v == 0.0));
    }

    /// Dense matrix of the 1D stencil, assembled independently.
    fn stencil_matrix(n: usize, h: f64) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            if i > 0 {
                m[i][i - 1] += 1.0;
                m[i][i] -= 1.0;
            }
            if i + 1 < n {
                m[i][i + 1] += 1.0;
                m[i][i] -= 1.0;
            }
        }
        m.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v /= h * h));
        m
    }

    #[test]
    fn cosine_is_an_eigenfunction() {
        let n = 8;
        let g = Grid::new_1d(n, 1.0).unwrap();
        let h = 1.0 / n as f64;
        let f = Field::from_fn(g, |x, _| (PI * x).cos());
        let lam1 = 2.0 / (h * h) * (1.0 - (PI * h).cos());
        let m = stencil_matrix(n, h);
        let lap = laplacian(&f);
        for i in 0..n {
            let direct: f64 = (0..n).map(|k| m[i][k] * f.values()[k]).sum();
            assert!((direct - lap.values()[i]).abs() < 1e-10);
            assert!((lap.values()[i] + lam1 * f.values()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_sq_of_ramp_and_constant() {
        let g = Grid::new_1d(10, 1.0).unwrap();
        let ramp = Field::from_fn(g, |x, _| x);
        let gs = gradient_sq(&ramp);
        for i in 1..9 {
            assert!((gs.values()[i] - 1.0).abs() < 1e-12);
        }
        let zero = gradient_sq(&Field::constant(g, 2.0));
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_sq_second_order_on_cosine() {
        let err = |n: usize| {
            let g = Grid::new_1d(n, 1.0).unwrap();
            let f = Field::from_fn(g, |x, _| (PI * x).cos());
            let gs = gradient_sq(&f);
            (1..n - 1)
                .map(|i| (gs.values()[i] - (PI * (PI * g.x(i)).sin()).powi(2)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 0.05);
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn centred_gradient_is_exact_for_affine_interior() {
        let g = Grid::new_2d(8, 8, 1.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x, y| 2.0 * x - 3.0 * y);
        let (gx, gy) = gradient(&f);
        for j in 1..7 {
            for i in 1..7 {
                assert!((gx.at(i, j) - 2.0).abs() < 1e-12);
                assert!((gy.at(i, j) + 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn helmholtz_constant_rhs() {
        let g = Grid::new_2d(8, 8, 1.0, 1.0).unwrap();
        let u = solve_helmholtz(1.0, &Field::zeros(g), &Field::constant(g, 2.5), DEFAULT_TOL).unwrap();
        assert!(u.values().iter().all(|&v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn helmholtz_cosine_eigenfunction() {
        let n = 8;
        let g = Grid::new_1d(n, 1.0).unwrap();
        let h = 1.0 / n as f64;
        let lam1 = 2.0 / (h * h) * (1.0 - (PI * h).cos());
        let rhs = Field::from_fn(g, |x, _| (1.0 + lam1) * (PI * x).cos());
        let u = solve_helmholtz(1.0, &Field::zeros(g), &rhs, DEFAULT_TOL).unwrap();
        for i in 0..n {
            assert!((u.values()[i] - (PI * g.x(i)).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_neumann_needs_zero_mean() {
        let g = Grid::new_2d(8, 8, 1.0, 1.0).unwrap();
        let rhs = Field::from_fn(g, |x, _| 1.0 + x);
        assert!(matches!(
            solve_helmholtz(0.0, &Field::zeros(g), &rhs, DEFAULT_TOL),
            Err(Error::Solvability { .. })
        ));
        let rhs = Field::from_fn(g, |x, y| (PI * x).cos() + (2.0 * PI * y).cos());
        let u = solve_helmholtz(0.0, &Field::zeros(g), &rhs, DEFAULT_TOL).unwrap();
        assert!(u.average().abs() < 1e-14);
        assert!(residual(0.0, &Field::zeros(g), &u, &rhs) <= 1e-10 * euclid(rhs.values()));
    }

    #[test]
    fn variable_coefficient_solve() {
        let g = Grid::new_2d(24, 20, 1.0, 0.8).unwrap();
        let b = Field::from_fn(g, |x, y| 5.0 * (1.0 - (x - 0.5).powi(2) - y * y).max(0.0));
        let rhs = Field::from_fn(g, |x, y| (3.0 * x).sin() * y + 1.0);
        for a in [0.0, 1.0, 1e4] {
            let u = solve_helmholtz(a, &b, &rhs, 1e-11).unwrap();
            assert!(residual(a, &b, &u, &rhs) <= 1e-11 * euclid(rhs.values()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn laplacian_self_adjoint_and_conservative(
            fv in prop::collection::vec(-1.0f64..1.0, 48),
            gv in prop::collection::vec(-1.0f64..1.0, 48),
        ) {
            let grid = Grid::new_2d(8, 6, 1.0, 0.75).unwrap();
            let f = Field::new(grid, fv).unwrap();
            let g = Field::new(grid, gv).unwrap();
            let lf = laplacian(&f);
            let lg = laplacian(&g);
            let lhs = lf.dot(&g);
            let rhs = f.dot(&lg);
            let scale = lf.norm_l2() * g.norm_l2() + f.norm_l2() * lg.norm_l2();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
            prop_assert!(lf.integrate().abs() <= 1e-12 * lf.norm_l2().max(1.0) * 64.0 );
            prop_assert!(-lf.dot(&f) >= -1e-12 * lf.norm_l2() * f.norm_l2());
            let gs = gradient_sq(&f).integrate();
            prop_assert!((gs + lf.dot(&f)).abs() <= 1e-10 * gs.max(1e-12));
        }

        #[test]
        fn helmholtz_inverts_its_operator(
            rv in prop::collection::vec(-1.0f64..1.0, 100),
            bv in prop::collection::vec(0.0f64..3.0, 100),
            a in 0.1f64..10.0,
        ) {
            let grid = Grid::new_2d(10, 10, 1.0, 1.0).unwrap();
            let rhs = Field::new(grid, rv).unwrap();
            let b = Field::new(grid, bv).unwrap();
            let u = solve_helmholtz(a, &b, &rhs, 1e-10).unwrap();
            prop_assert!(residual(a, &b, &u, &rhs) <= 1e-10 * euclid(rhs.values()));
        }
    }
}
