//! Linearly implicit, stabilized time stepping for Problems P and H.
//!
//! One step of size `dt` from `(φⁿ, σⁿ)` solves
//!
//! ```text
//! (φ' − φⁿ)/dt = Δμ' + R,     μ' = −εΔφ' + (F'(φⁿ) + s(φ' − φⁿ))/ε,
//! (σ' − σⁿ)/dt = Δσ' + S,
//! ```
//!
//! with `R = −S = P(φⁿ)(σ' − μ')` for Problem P and `R = (σ' − 1)H(φⁿ)`,
//! `S = −σ'H(φⁿ)` for Problem H. All diffusion is implicit; the sources are
//! frozen at `φⁿ` and implicit in `σ'`, `μ'`.

mod run;
mod step;

pub use run::{run, DiagnosticsHooks, Observer, Trajectory};
pub use step::{step_h, step_p, Stepper};

use crate::grid::{laplacian, Field};
use crate::model::ModelSpec;
use crate::{Error, Result};

/// Allowed excursion of the nutrient outside `[0, 1]` for Problem H.
pub const TOL_BOX: f64 = 1e-9;

/// `(t, φ, σ, μ)` at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub phi: Field,
    pub sigma: Field,
    pub mu: Field,
}

impl State {
    /// Initial state at `t = 0`; `μ` from `−εΔφ + F'(φ)/ε`.
    pub fn initial(phi: Field, sigma: Field, spec: &ModelSpec) -> Result<Self> {
        if phi.grid() != sigma.grid() {
            return Err(Error::InvalidArgument("phi and sigma live on different grids".into()));
        }
        if !phi.is_finite() || !sigma.is_finite() {
            return Err(Error::NonFinite("initial data"));
        }
        let mu = chemical_potential(&phi, spec);
        Ok(Self {
            t: 0.0,
            phi,
            sigma,
            mu,
        })
    }
}

/// `μ = −εΔ_h φ + F'(φ)/ε`.
pub fn chemical_potential(phi: &Field, spec: &ModelSpec) -> Field {
    let eps = spec.epsilon;
    let lap = laplacian(phi);
    phi.zip_map(&lap, |p, l| -eps * l + spec.potential.deriv(p) / eps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Stabilization `s` multiplying `(φ' − φⁿ)/ε`.
    pub stabilization: f64,
    /// Relative residual for the coupled P-system iteration.
    pub fixed_point_tol: f64,
    pub max_inner_iterations: usize,
    /// Relative residual for the nutrient solve of Problem H.
    pub helmholtz_tol: f64,
    /// Test mode: keep `φ` and `μ` fixed and evolve only the nutrient.
    pub freeze_phi: bool,
}

impl StepConfig {
    pub const DEFAULT_STABILIZATION: f64 = 2.0;

    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            stabilization: Self::DEFAULT_STABILIZATION,
            fixed_point_tol: 1e-10,
            max_inner_iterations: 200,
            helmholtz_tol: 1e-12,
            freeze_phi: false,
        }
    }

    pub fn with_stabilization(mut self, s: f64) -> Self {
        self.stabilization = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return bad(format!("stabilization must be nonnegative, got {}", self.stabilization));
        }
        if !(self.fixed_point_tol > 0.0 && self.helmholtz_tol > 0.0) {
            return bad("solver tolerances must be positive".into());
        }
        if self.max_inner_iterations == 0 {
            return bad("max_inner_iterations must be positive".into());
        }
        Ok(())
    }

    /// Whether `s` dominates half the curvature of `F` on `[-1.2, 1.2]`,
    /// the condition under which the scheme dissipates the Ginzburg–Landau
    /// energy for pure Cahn–Hilliard dynamics.
    pub fn is_energy_stable(&self, spec: &ModelSpec) -> bool {
        self.stabilization >= 0.5 * spec.potential.sup_deriv2(-1.2, 1.2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Potential, Proliferation};

    #[test]
    fn config_validation() {
        assert!(StepConfig::new(1e-3).validate().is_ok());
        assert!(StepConfig::new(0.0).validate().is_err());
        assert!(StepConfig::new(1e-3).with_stabilization(-1.0).validate().is_err());
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.1).unwrap();
        assert!(StepConfig::new(1e-3).is_energy_stable(&spec));
        assert!(!StepConfig::new(1e-3).with_stabilization(1.0).is_energy_stable(&spec));
    }
}
