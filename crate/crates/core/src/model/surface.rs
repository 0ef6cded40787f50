//! Surface tension `θ = ∫₋₁¹ √(F/2)` and the primitive
//! `W(u) = ∫₋₁ᵘ √(2F̃(r)) dr`.

use super::quadrature::{integrate, integrate_with_breaks};
use super::Potential;
use crate::{Error, Result};

const THETA_TOL: f64 = 1e-12;

/// Surface tension constant of `potential`.
pub fn theta(potential: &Potential) -> Result<f64> {
    let value = integrate(
        |u| {
            let f = potential.eval(u);
            if f < 0.0 {
                f64::NAN
            } else {
                (0.5 * f).sqrt()
            }
        },
        -1.0,
        1.0,
        THETA_TOL,
    )
    .map_err(|_| {
        Error::DegeneratePotential(format!(
            "{}: sqrt(F/2) is not finite on [-1, 1] (F must be nonnegative)",
            potential.name()
        ))
    })?;
    if value <= 0.0 {
        return Err(Error::DegeneratePotential(format!(
            "{}: surface tension is not positive",
            potential.name()
        )));
    }
    Ok(value)
}

/// Points where `√(2F̃)` may fail to be smooth: the wells and the switch
/// between `F` and `max F + u²` inside `[lo, hi]`.
fn kinks(potential: &Potential, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![-1.0, 1.0];
    let gap = |u: f64| potential.eval(u) - potential.max_on_unit_interval() - u * u;
    let n = 4000;
    let step = (hi - lo) / n as f64;
    let mut prev = gap(lo);
    for k in 1..=n {
        let mut b = lo + step * k as f64;
        let gb = gap(b);
        if prev.signum() != gb.signum() && prev != 0.0 {
            let mut a = b - step;
            let ga = prev;
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if gap(m).signum() == ga.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = gb;
    }
    out.retain(|&x| x >= lo && x <= hi);
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

fn w_integrand(potential: &Potential) -> impl Fn(f64) -> f64 + '_ {
    move |r| (2.0 * potential.truncated(r).max(0.0)).sqrt()
}

/// `W(u)`: nondecreasing, `W(-1) = 0`, `W(1) = 2θ`; negative below `-1`.
pub fn eval_w(potential: &Potential, u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite("W argument"));
    }
    let breaks = kinks(potential, u.min(-1.0), u.max(1.0));
    integrate_with_breaks(w_integrand(potential), -1.0, u, &breaks, 1e-13)
}

/// Tabulated `W` on a range, for evaluating `w = W(φ)` over whole fields.
///
/// Nodes are spaced at most `1e-3` apart and include every kink of the
/// integrand, so piecewise cubic Hermite interpolation (with exact nodal
/// slopes) is accurate well below `1e-8`.
#[derive(Clone, Debug)]
pub struct WTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl WTable {
    pub fn new(potential: &Potential, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("W table range"));
        }
        let spacing = 1e-3;
        let lo = (lo.min(-1.0) - spacing).min(-1.0 - spacing);
        let hi = (hi.max(1.0) + spacing).max(1.0 + spacing);
        // Uniform lattice anchored at -1 so both wells are nodes.
        let k_lo = ((lo + 1.0) / spacing).floor() as i64;
        let k_hi = ((hi + 1.0) / spacing).ceil() as i64;
        let mut nodes: Vec<f64> = (k_lo..=k_hi).map(|k| -1.0 + k as f64 * spacing).collect();
        nodes.extend(kinks(potential, lo, hi));
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let g = w_integrand(potential);
        let origin = nodes
            .iter()
            .position(|&x| (x + 1.0).abs() < 1e-12)
            .expect("-1 is a lattice node");
        let mut values = vec![0.0; nodes.len()];
        for i in origin + 1..nodes.len() {
            values[i] = values[i - 1] + integrate(&g, nodes[i - 1], nodes[i], 1e-14)?;
        }
        for i in (0..origin).rev() {
            values[i] = values[i + 1] - integrate(&g, nodes[i], nodes[i + 1], 1e-14)?;
        }
        let slopes = nodes.iter().map(|&x| g(x)).collect();
        Ok(Self { nodes, values, slopes })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Interpolated `W(u)`; `u` must lie inside [`WTable::range`].
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.nodes.len();
        let i = match self.nodes.binary_search_by(|x| x.total_cmp(&u)) {
            Ok(i) => return self.values[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let s = (u - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }
}
