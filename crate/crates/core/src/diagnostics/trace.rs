use super::energy::{discrepancy_positive, energy, well_distance};
use super::limit::qc_measure;
use crate::grid::gradient_sq;
use crate::model::{ModelSpec, Problem};
use crate::solver::State;

/// Time series of the monitored scalars, one entry per recorded state.
///
/// Dissipation and source-work columns are cumulative time integrals
/// (trapezoid rule over the recorded times).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub sigma_l2_half: Vec<f64>,
    pub mass_phi: Vec<f64>,
    pub mass_sigma: Vec<f64>,
    pub mass_sum: Vec<f64>,
    pub diss_mu: Vec<f64>,
    pub diss_sigma: Vec<f64>,
    /// `∫ P(σ − μ)²` or `∫ Hσ²`.
    pub diss_source: Vec<f64>,
    /// `∫ (μ, (σ − 1)H)`; identically zero for Problem P.
    pub source_work: Vec<f64>,
    pub balance_residual: Vec<f64>,
    pub discrepancy_pos: Vec<f64>,
    pub mu_avg: Vec<f64>,
    /// `E + ‖∇μ‖₂`.
    pub mu_avg_bound_rhs: Vec<f64>,
    pub qc_measure: Vec<f64>,
    pub phi_well_distance: Vec<f64>,
    pub sigma_min: Vec<f64>,
    pub sigma_max: Vec<f64>,
}

impl DiagnosticsTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|balance_residual|`.
    pub fn max_balance_residual(&self) -> f64 {
        self.balance_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest deviation of `mass_sum` from its initial value.
    pub fn mass_drift(&self) -> f64 {
        match self.mass_sum.first() {
            Some(&m0) => self.mass_sum.iter().fold(0.0, |m, x| m.max((x - m0).abs())),
            None => 0.0,
        }
    }
}

/// Balance residual recomputed from the stored columns:
/// `E + ½‖σ‖² + dissipation − source work − (E + ½‖σ‖²)(0)`.
pub fn energy_balance_residual(trace: &DiagnosticsTrace, problem: Problem) -> Vec<f64> {
    if trace.is_empty() {
        return Vec::new();
    }
    let total = |i: usize| trace.energy[i] + trace.sigma_l2_half[i];
    let start = total(0);
    (0..trace.len())
        .map(|i| {
            let mut r = total(i) + trace.diss_mu[i] + trace.diss_sigma[i] + trace.diss_source[i] - start;
            if problem == Problem::H {
                r -= trace.source_work[i];
            }
            r
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Rates {
    t: f64,
    mu: f64,
    sigma: f64,
    source: f64,
    work: f64,
}

/// Builds a [`DiagnosticsTrace`] from successive states.
#[derive(Debug)]
pub struct TraceRecorder {
    spec: ModelSpec,
    trace: DiagnosticsTrace,
    last: Option<Rates>,
}

impl TraceRecorder {
    pub fn new(spec: &ModelSpec) -> Self {
        Self {
            spec: spec.clone(),
            trace: DiagnosticsTrace::default(),
            last: None,
        }
    }

    pub fn trace(&self) -> &DiagnosticsTrace {
        &self.trace
    }

    pub fn into_trace(self) -> DiagnosticsTrace {
        self.trace
    }

    fn rates(&self, state: &State) -> Rates {
        let spec = &self.spec;
        let mu = gradient_sq(&state.mu).integrate();
        let sigma = gradient_sq(&state.sigma).integrate();
        let phi = state.phi.values();
        let sg = state.sigma.values();
        let m = state.mu.values();
        let area = state.phi.grid().cell_area();
        let (mut source, mut work) = (0.0, 0.0);
        for i in 0..phi.len() {
            let c = spec.source_coefficient(phi[i]);
            match spec.problem() {
                Problem::P => source += c * (sg[i] - m[i]).powi(2),
                Problem::H => {
                    source += c * sg[i] * sg[i];
                    work += m[i] * (sg[i] - 1.0) * c;
                }
            }
        }
        Rates {
            t: state.t,
            mu,
            sigma,
            source: source * area,
            work: work * area,
        }
    }

    /// Appends one row; returns the energy of `state`.
    pub fn record(&mut self, state: &State) -> f64 {
        let spec = &self.spec;
        let e = energy(&state.phi, spec);
        let rates = self.rates(state);
        let tr = &mut self.trace;
        let (dm, ds, dq, dw) = match (self.last, tr.diss_mu.last()) {
            (Some(prev), Some(&dm)) => {
                let dt = rates.t - prev.t;
                let trap = |a: f64, b: f64| 0.5 * dt * (a + b);
                (
                    dm + trap(prev.mu, rates.mu),
                    tr.diss_sigma.last().unwrap() + trap(prev.sigma, rates.sigma),
                    tr.diss_source.last().unwrap() + trap(prev.source, rates.source),
                    tr.source_work.last().unwrap() + trap(prev.work, rates.work),
                )
            }
            _ => (0.0, 0.0, 0.0, 0.0),
        };
        self.last = Some(rates);

        let half_sigma = 0.5 * state.sigma.dot(&state.sigma);
        let mp = state.phi.average();
        let ms = state.sigma.average();
        tr.times.push(state.t);
        tr.energy.push(e);
        tr.sigma_l2_half.push(half_sigma);
        tr.mass_phi.push(mp);
        tr.mass_sigma.push(ms);
        tr.mass_sum.push((state.phi.values().iter().zip(state.sigma.values()))
            .map(|(p, s)| p + s)
            .sum::<f64>()
            / state.phi.values().len() as f64);
        tr.diss_mu.push(dm);
        tr.diss_sigma.push(ds);
        tr.diss_source.push(dq);
        tr.source_work.push(dw);
        let total = e + half_sigma;
        let start = tr.energy[0] + tr.sigma_l2_half[0];
        let mut r = total + dm + ds + dq - start;
        if spec.problem() == Problem::H {
            r -= dw;
        }
        tr.balance_residual.push(r);
        tr.discrepancy_pos.push(discrepancy_positive(&state.phi, spec));
        tr.mu_avg.push(state.mu.average());
        tr.mu_avg_bound_rhs.push(e + rates.mu.sqrt());
        tr.qc_measure.push(qc_measure(&state.phi));
        tr.phi_well_distance.push(well_distance(&state.phi));
        tr.sigma_min.push(state.sigma.min());
        tr.sigma_max.push(state.sigma.max());
        e
    }
}
