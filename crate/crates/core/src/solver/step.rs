use super::{State, StepConfig, TOL_BOX};
use crate::grid::krylov::gmres;
use crate::grid::{Field, Grid, NeumannSpectral};
use crate::model::{ModelSpec, Problem};
use crate::{Error, Result};

const GMRES_RESTART: usize = 30;

/// Stepper bound to one model, configuration and grid; caches the cosine
/// transforms.
#[derive(Clone, Debug)]
pub struct Stepper {
    spec: ModelSpec,
    cfg: StepConfig,
    spectral: NeumannSpectral,
}

/// Per-mode coefficients of the constant-coefficient block system.
struct Modes {
    lambda: Vec<f64>,
    /// `ελ + s/ε`, the factor tying `μ'` to `φ'`.
    stiff: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: ModelSpec, cfg: StepConfig, grid: Grid) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            spec,
            cfg,
            spectral: NeumannSpectral::new(grid),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn step(&self, state: &State) -> Result<State> {
        match self.spec.problem() {
            Problem::P => self.step_p(state),
            Problem::H => self.step_h(state),
        }
    }

    fn modes(&self) -> Modes {
        let eps = self.spec.epsilon;
        let s = self.cfg.stabilization;
        let lambda = self.spectral.eigenvalues();
        let stiff = lambda.iter().map(|l| eps * l + s / eps).collect();
        Modes { lambda, stiff }
    }

    fn check_input(&self, state: &State) -> Result<()> {
        if state.phi.grid() != self.grid() || state.sigma.grid() != self.grid() {
            return Err(Error::InvalidArgument("state does not live on the stepper grid".into()));
        }
        if !state.phi.is_finite() || !state.sigma.is_finite() || !state.mu.is_finite() {
            return Err(Error::BlowUp {
                t: state.t,
                detail: "non-finite values in the incoming state".into(),
            });
        }
        Ok(())
    }

    fn finish(&self, t: f64, phi: Vec<f64>, sigma: Vec<f64>, mu: Vec<f64>) -> Result<State> {
        let grid = *self.grid();
        let out = State {
            t,
            phi: Field::from_vec_unchecked(grid, phi),
            sigma: Field::from_vec_unchecked(grid, sigma),
            mu: Field::from_vec_unchecked(grid, mu),
        };
        if !out.phi.is_finite() || !out.sigma.is_finite() || !out.mu.is_finite() {
            return Err(Error::BlowUp {
                t,
                detail: "non-finite values after step".into(),
            });
        }
        Ok(out)
    }

    /// Spectral coefficients of `(F'(φⁿ) − sφⁿ)/ε`.
    fn explicit_potential(&self, phi: &Field) -> Vec<f64> {
        let eps = self.spec.epsilon;
        let s = self.cfg.stabilization;
        let f = &self.spec.potential;
        let v: Vec<f64> = phi.values().iter().map(|&p| (f.deriv(p) - s * p) / eps).collect();
        self.spectral.forward(&v)
    }

    /// One step of Problem P.
    ///
    /// The coupling `P(φⁿ)(σ' − μ')` is split as `P̄(σ' − μ') + (P − P̄)v`
    /// with `P̄` the midrange of `P(φⁿ)`: the first part is diagonal in the
    /// cosine basis, and the fixed point `v = σ' − μ'` is found by GMRES.
    /// Both equations receive the same `(P − P̄)v`, so the mass of `φ + σ`
    /// is conserved whatever the inner residual.
    pub fn step_p(&self, state: &State) -> Result<State> {
        self.check_input(state)?;
        let prolif = self
            .spec
            .proliferation()
            .ok_or_else(|| Error::InvalidSpec("Problem P step needs a proliferation function".into()))?;
        let dt = self.cfg.dt;
        let t = state.t + dt;
        let p_old: Vec<f64> = state.phi.values().iter().map(|&u| prolif.eval(u)).collect();

        if self.cfg.freeze_phi {
            // (1/dt + P − Δ)σ' = σ/dt + Pμ with φ, μ held fixed.
            let grid = *self.grid();
            let b = Field::from_vec_unchecked(grid, p_old.clone());
            let rhs: Vec<f64> = state
                .sigma
                .values()
                .iter()
                .zip(state.mu.values())
                .zip(&p_old)
                .map(|((s, m), p)| s / dt + p * m)
                .collect();
            let rhs = Field::from_vec_unchecked(grid, rhs);
            let sigma = self.spectral.solve_helmholtz(1.0 / dt, &b, &rhs, self.cfg.helmholtz_tol)?;
            return self.finish(t, state.phi.values().to_vec(), sigma.into_values(), state.mu.values().to_vec());
        }

        let pmax = p_old.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pmin = p_old.iter().copied().fold(f64::INFINITY, f64::min);
        let pbar = 0.5 * (pmax + pmin);
        let dp: Vec<f64> = p_old.iter().map(|p| p - pbar).collect();
        let modes = self.modes();
        let n = p_old.len();

        let r1 = self.spectral.forward(&state.phi.values().iter().map(|p| p / dt).collect::<Vec<_>>());
        let r2 = self.explicit_potential(&state.phi);
        let r3 = self.spectral.forward(&state.sigma.values().iter().map(|s| s / dt).collect::<Vec<_>>());

        // Solve the block system for given coefficients of the lagged source.
        let solve_block = |g: Option<&[f64]>, r1: &[f64], r2: &[f64], r3: &[f64]| {
            let mut phi = vec![0.0; n];
            let mut sigma = vec![0.0; n];
            let mut mu = vec![0.0; n];
            for k in 0..n {
                let (lam, a) = (modes.lambda[k], modes.stiff[k]);
                let gk = g.map_or(0.0, |g| g[k]);
                let big_r1 = r1[k] + gk - (lam + pbar) * r2[k];
                let big_r3 = r3[k] - gk + pbar * r2[k];
                let a11 = 1.0 / dt + (lam + pbar) * a;
                let a22 = 1.0 / dt + lam + pbar;
                let det = a11 * a22 - pbar * pbar * a;
                phi[k] = (a22 * big_r1 + pbar * big_r3) / det;
                sigma[k] = (a11 * big_r3 + pbar * a * big_r1) / det;
                mu[k] = a * phi[k] + r2[k];
            }
            (phi, sigma, mu)
        };

        let lagged = if pmax - pmin > 0.0 {
            // Affine map v ↦ c + L v with L v = σ'(v) − μ'(v) at zero data.
            let (_, s0, m0) = solve_block(None, &r1, &r2, &r3);
            let c: Vec<f64> = self
                .spectral
                .inverse(&s0.iter().zip(&m0).map(|(s, m)| s - m).collect::<Vec<_>>());
            let response: Vec<f64> = (0..n)
                .map(|k| {
                    let (lam, a) = (modes.lambda[k], modes.stiff[k]);
                    let a11 = 1.0 / dt + (lam + pbar) * a;
                    let a22 = 1.0 / dt + lam + pbar;
                    let det = a11 * a22 - pbar * pbar * a;
                    (2.0 * pbar * a - a11 - a * a22) / det
                })
                .collect();
            let apply = |v: &[f64]| -> Vec<f64> {
                let g: Vec<f64> = v.iter().zip(&dp).map(|(v, d)| v * d).collect();
                let mut gh = self.spectral.forward(&g);
                gh.iter_mut().zip(&response).for_each(|(x, m)| *x *= m);
                let lv = self.spectral.inverse(&gh);
                v.iter().zip(&lv).map(|(v, l)| v - l).collect()
            };
            let guess: Vec<f64> = state
                .sigma
                .values()
                .iter()
                .zip(state.mu.values())
                .map(|(s, m)| s - m)
                .collect();
            let sol = gmres(
                apply,
                &c,
                guess,
                self.cfg.fixed_point_tol,
                GMRES_RESTART,
                self.cfg.max_inner_iterations,
            )
            .map_err(|e| match e {
                Error::NotConverged { residual, .. } => Error::StepFailed { residual },
                other => other,
            })?;
            let g: Vec<f64> = sol.x.iter().zip(&dp).map(|(v, d)| v * d).collect();
            Some(self.spectral.forward(&g))
        } else {
            None
        };

        let (phi, sigma, mu) = solve_block(lagged.as_deref(), &r1, &r2, &r3);
        self.finish(
            t,
            self.spectral.inverse(&phi),
            self.spectral.inverse(&sigma),
            self.spectral.inverse(&mu),
        )
    }

    /// One step of Problem H: the nutrient solve
    /// `(1/dt + H(φⁿ) − Δ)σ' = σⁿ/dt` comes first, then the
    /// Cahn–Hilliard block with the known source `(σ' − 1)H(φⁿ)`.
    pub fn step_h(&self, state: &State) -> Result<State> {
        self.check_input(state)?;
        let interp = self
            .spec
            .interpolation()
            .ok_or_else(|| Error::InvalidSpec("Problem H step needs an interpolation function".into()))?;
        let dt = self.cfg.dt;
        let t = state.t + dt;
        let grid = *self.grid();
        let h_old = state.phi.map(|u| interp.eval(u));
        let rhs = state.sigma.map(|s| s / dt);
        let sigma = self.spectral.solve_helmholtz(1.0 / dt, &h_old, &rhs, self.cfg.helmholtz_tol)?;
        let (smin, smax) = (sigma.min(), sigma.max());
        if smin < -TOL_BOX || smax > 1.0 + TOL_BOX {
            return Err(Error::MaximumPrinciple { min: smin, max: smax });
        }
        if self.cfg.freeze_phi {
            return self.finish(t, state.phi.values().to_vec(), sigma.into_values(), state.mu.values().to_vec());
        }

        let source: Vec<f64> = sigma
            .values()
            .iter()
            .zip(h_old.values())
            .map(|(s, h)| (s - 1.0) * h)
            .collect();
        let modes = self.modes();
        let r1: Vec<f64> = state
            .phi
            .values()
            .iter()
            .zip(&source)
            .map(|(p, g)| p / dt + g)
            .collect();
        let r1 = self.spectral.forward(&r1);
        let r2 = self.explicit_potential(&state.phi);
        let mut phi = vec![0.0; grid.len()];
        let mut mu = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let (lam, a) = (modes.lambda[k], modes.stiff[k]);
            phi[k] = (r1[k] - lam * r2[k]) / (1.0 / dt + lam * a);
            mu[k] = a * phi[k] + r2[k];
        }
        self.finish(
            t,
            self.spectral.inverse(&phi),
            sigma.into_values(),
            self.spectral.inverse(&mu),
        )
    }
}

/// One Problem P step without a cached [`Stepper`].
pub fn step_p(state: &State, spec: &ModelSpec, cfg: &StepConfig) -> Result<State> {
    Stepper::new(spec.clone(), *cfg, *state.phi.grid())?.step_p(state)
}

/// One Problem H step without a cached [`Stepper`].
pub fn step_h(state: &State, spec: &ModelSpec, cfg: &StepConfig) -> Result<State> {
    Stepper::new(spec.clone(), *cfg, *state.phi.grid())?.step_h(state)
}
