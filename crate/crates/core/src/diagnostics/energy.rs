use crate::grid::{gradient_sq, Field};
use crate::model::ModelSpec;
use crate::solver::State;
use crate::{Error, Result};

/// Ginzburg–Landau energy `∫ ε/2 |∇φ|² + F(φ)/ε`.
pub fn energy(phi: &Field, spec: &ModelSpec) -> f64 {
    let eps = spec.epsilon;
    let g = gradient_sq(phi);
    let density = phi.zip_map(&g, |p, g| 0.5 * eps * g + spec.potential.eval(p) / eps);
    density.integrate().max(0.0)
}

/// `∫ (ε/2 |∇φ|² − F(φ)/ε)⁺`.
pub fn discrepancy_positive(phi: &Field, spec: &ModelSpec) -> f64 {
    let eps = spec.epsilon;
    let g = gradient_sq(phi);
    phi.zip_map(&g, |p, g| (0.5 * eps * g - spec.potential.eval(p) / eps).max(0.0))
        .integrate()
}

/// `‖ |φ| − 1 ‖₂`.
pub fn well_distance(phi: &Field) -> f64 {
    phi.map(|p| p.abs() - 1.0).norm_l2()
}

/// `(|[μ]|, E + ‖∇μ‖₂)`; the ratio is the empirical constant of the
/// chemical-potential average bound.
pub fn mu_average_check(state: &State, spec: &ModelSpec) -> Result<(f64, f64)> {
    let m = state.phi.average();
    if m.abs() >= 1.0 {
        return Err(Error::PurePhase { average: m });
    }
    let grad = gradient_sq(&state.mu).integrate().sqrt();
    Ok((state.mu.average().abs(), energy(&state.phi, spec) + grad))
}
