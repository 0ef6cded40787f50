use super::energy::energy;
use crate::grid::gradient;
use crate::model::ModelSpec;
use crate::solver::{chemical_potential, State};
use std::f64::consts::PI;

/// `sin⁴` bump on `[a, a + w]` and its derivative.
fn bump(x: f64, a: f64, w: f64) -> (f64, f64) {
    let s = (x - a) / w;
    if !(0.0..=1.0).contains(&s) {
        return (0.0, 0.0);
    }
    let (sn, cs) = (PI * s).sin_cos();
    (sn.powi(4), 4.0 * sn.powi(3) * cs * PI / w)
}

/// Test field `Y = d · B(x, y)` number `k` of the family.
struct TestField {
    dir: (f64, f64),
    ax: f64,
    wx: f64,
    ay: f64,
    wy: f64,
}

fn family(k: usize, lx: f64, ly: f64, dim: usize) -> TestField {
    let golden = 0.618_033_988_749_895;
    let fx = (k as f64 * golden).fract();
    let fy = ((k as f64 + 0.5) * golden * golden).fract();
    let (wx, wy) = (0.5 * lx, 0.5 * ly);
    let cx = lx * (0.3 + 0.4 * fx);
    let cy = ly * (0.3 + 0.4 * fy);
    let dir = if dim == 1 {
        (1.0, 0.0)
    } else {
        match k % 3 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            _ => (0.5f64.sqrt(), 0.5f64.sqrt()),
        }
    };
    TestField {
        dir,
        ax: cx - 0.5 * wx,
        wx,
        ay: cy - 0.5 * wy,
        wy,
    }
}

/// Largest defect, relative to the energy, of the stress-tensor identity
/// `∫ ∇Y : (e I − ε ∇φ ⊗ ∇φ) = ∫ φ (μ div Y + Y · ∇μ)` over a family of
/// compactly supported bump fields `Y`; `μ` is recomputed from `φ`.
pub fn stress_tensor_residual(state: &State, spec: &ModelSpec, test_field_count: usize) -> f64 {
    let phi = &state.phi;
    let grid = *phi.grid();
    let eps = spec.epsilon;
    let mu = chemical_potential(phi, spec);
    let (px, py) = gradient(phi);
    let (mx, my) = gradient(&mu);
    let e_density: Vec<f64> = phi
        .values()
        .iter()
        .zip(px.values().iter().zip(py.values()))
        .map(|(&p, (gx, gy))| 0.5 * eps * (gx * gx + gy * gy) + spec.potential.eval(p) / eps)
        .collect();
    let area = grid.cell_area();
    let mut worst: f64 = 0.0;
    for k in 0..test_field_count {
        let tf = family(k, grid.lx(), grid.ly(), grid.dim());
        let (dx, dy) = tf.dir;
        let mut defect = 0.0;
        for j in 0..grid.ny() {
            let (by, dby) = if grid.dim() == 2 { bump(grid.y(j), tf.ay, tf.wy) } else { (1.0, 0.0) };
            for i in 0..grid.nx() {
                let (bx, dbx) = bump(grid.x(i), tf.ax, tf.wx);
                let b = bx * by;
                if b == 0.0 && dbx == 0.0 && dby == 0.0 {
                    continue;
                }
                let (gbx, gby) = (dbx * by, bx * dby);
                let n = grid.index(i, j);
                let (p, gx, gy) = (phi.values()[n], px.values()[n], py.values()[n]);
                let div = dx * gbx + dy * gby;
                let lhs = e_density[n] * div - eps * (dx * gx + dy * gy) * (gbx * gx + gby * gy);
                let rhs = p * (mu.values()[n] * div + b * (dx * mx.values()[n] + dy * my.values()[n]));
                defect += lhs - rhs;
            }
        }
        worst = worst.max((defect * area).abs());
    }
    let e = energy(phi, spec);
    if e > 0.0 {
        worst / e
    } else {
        worst
    }
}
