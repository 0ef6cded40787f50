//! Continuum model: nonlinearities, the surface tension `θ`, the primitive
//! `W` and sampling-based hypothesis checks.

mod nonlinear;
pub mod quadrature;
mod surface;
mod validate;

pub use nonlinear::{Interpolation, Potential, PotentialConstants, PotentialFns, Proliferation, ScalarFn};
pub use surface::{eval_w, theta, WTable};
pub use validate::{
    check_assumptions, mass_bound_ass1, mass_bound_ass2, precheck_global_time, GlobalTimeCheck,
    GrowthConstants, HypothesisCheck, ValidationReport,
};

use crate::{Error, Result};

/// Which coupling the system carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Sources `±P(φ)(σ − μ)`.
    P,
    /// Sources `(σ − 1)H(φ)` and `−σH(φ)`.
    H,
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::P => f.write_str("P"),
            Problem::H => f.write_str("H"),
        }
    }
}

/// Source-term nonlinearity; exactly one per problem.
#[derive(Clone, Debug)]
pub enum Coupling {
    Proliferation(Proliferation),
    Interpolation(Interpolation),
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub potential: Potential,
    pub coupling: Coupling,
    pub epsilon: f64,
    theta: f64,
    pub lx: f64,
    pub ly: f64,
    pub horizon: f64,
}

impl ModelSpec {
    /// Problem P on the unit square with horizon 1.
    pub fn problem_p(potential: Potential, proliferation: Proliferation, epsilon: f64) -> Result<Self> {
        Self::new(potential, Coupling::Proliferation(proliferation), epsilon)
    }

    /// Problem H on the unit square with horizon 1.
    pub fn problem_h(potential: Potential, interpolation: Interpolation, epsilon: f64) -> Result<Self> {
        Self::new(potential, Coupling::Interpolation(interpolation), epsilon)
    }

    pub fn new(potential: Potential, coupling: Coupling, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!("epsilon must be positive, got {epsilon}")));
        }
        let theta = theta(&potential)?;
        Ok(Self {
            potential,
            coupling,
            epsilon,
            theta,
            lx: 1.0,
            ly: 1.0,
            horizon: 1.0,
        })
    }

    pub fn with_domain(mut self, lx: f64, ly: f64) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidSpec(format!("domain lengths must be positive, got {lx} x {ly}")));
        }
        self.lx = lx;
        self.ly = ly;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidSpec(format!("time horizon must be positive, got {horizon}")));
        }
        self.horizon = horizon;
        Ok(self)
    }

    /// Same model at another interface width; `θ` does not depend on ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!("epsilon must be positive, got {epsilon}")));
        }
        let mut spec = self.clone();
        spec.epsilon = epsilon;
        Ok(spec)
    }

    pub fn problem(&self) -> Problem {
        match self.coupling {
            Coupling::Proliferation(_) => Problem::P,
            Coupling::Interpolation(_) => Problem::H,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn proliferation(&self) -> Option<&Proliferation> {
        match &self.coupling {
            Coupling::Proliferation(p) => Some(p),
            Coupling::Interpolation(_) => None,
        }
    }

    pub fn interpolation(&self) -> Option<&Interpolation> {
        match &self.coupling {
            Coupling::Interpolation(h) => Some(h),
            Coupling::Proliferation(_) => None,
        }
    }

    /// Evaluates the source nonlinearity (`P` or `H`) at `u`.
    #[inline]
    pub fn source_coefficient(&self, u: f64) -> f64 {
        match &self.coupling {
            Coupling::Proliferation(p) => p.eval(u),
            Coupling::Interpolation(h) => h.eval(u),
        }
    }
}
