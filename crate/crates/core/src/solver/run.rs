use super::{State, StepConfig, Stepper};
use crate::diagnostics::{DiagnosticsTrace, TraceRecorder};
use crate::model::ModelSpec;
use crate::{Error, Result};

/// Callback invoked with the step index and the state after that step
/// (index 0 is the initial state).
pub type Observer<'a> = Box<dyn FnMut(usize, &State) -> Result<()> + 'a>;

/// Recording strides and observers for [`run`].
pub struct DiagnosticsHooks<'a> {
    /// Trace row every `trace_stride` steps; the final step is always recorded.
    pub trace_stride: usize,
    pub observer_stride: usize,
    pub observers: Vec<Observer<'a>>,
    /// Called with the trace after every recorded row.
    pub trace_sink: Option<Box<dyn FnMut(&DiagnosticsTrace) -> Result<()> + 'a>>,
}

impl Default for DiagnosticsHooks<'_> {
    fn default() -> Self {
        Self {
            trace_stride: 1,
            observer_stride: 1,
            observers: Vec::new(),
            trace_sink: None,
        }
    }
}

impl<'a> DiagnosticsHooks<'a> {
    pub fn with_trace_stride(mut self, stride: usize) -> Self {
        self.trace_stride = stride;
        self
    }

    pub fn observe(mut self, stride: usize, f: impl FnMut(usize, &State) -> Result<()> + 'a) -> Self {
        self.observer_stride = stride;
        self.observers.push(Box::new(f));
        self
    }

    pub fn on_trace_row(mut self, f: impl FnMut(&DiagnosticsTrace) -> Result<()> + 'a) -> Self {
        self.trace_sink = Some(Box::new(f));
        self
    }
}

impl std::fmt::Debug for DiagnosticsHooks<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiagnosticsHooks")
            .field("trace_stride", &self.trace_stride)
            .field("observer_stride", &self.observer_stride)
            .field("observers", &self.observers.len())
            .field("trace_sink", &self.trace_sink.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub final_state: State,
    pub trace: DiagnosticsTrace,
    pub steps: usize,
}

/// Advances `n_steps` steps, recording the trace and calling observers.
/// Step errors come back wrapped in [`Error::Run`] with the 1-based index
/// of the failing step.
pub fn run(
    initial: State,
    spec: &ModelSpec,
    cfg: &StepConfig,
    n_steps: usize,
    mut hooks: DiagnosticsHooks<'_>,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if hooks.trace_stride == 0 || hooks.observer_stride == 0 {
        return Err(Error::InvalidArgument("strides must be positive".into()));
    }
    let stepper = Stepper::new(spec.clone(), *cfg, *initial.phi.grid())?;
    let mut recorder = TraceRecorder::new(spec);
    let mut energy = recorder.record(&initial);
    if let Some(sink) = hooks.trace_sink.as_mut() {
        sink(recorder.trace())?;
    }
    for obs in hooks.observers.iter_mut() {
        obs(0, &initial)?;
    }
    let mut state = initial;
    for k in 1..=n_steps {
        let next = stepper
            .step(&state)
            .map_err(|e| Error::Run { step: k, source: Box::new(e) })?;
        let e_next = crate::diagnostics::energy(&next.phi, spec);
        if !e_next.is_finite() || e_next > 10.0 * energy + 1e-8 {
            return Err(Error::Run {
                step: k,
                source: Box::new(Error::BlowUp {
                    t: next.t,
                    detail: format!("energy jumped from {energy:.6e} to {e_next:.6e}"),
                }),
            });
        }
        energy = e_next;
        state = next;
        if k % hooks.trace_stride == 0 || k == n_steps {
            recorder.record(&state);
            if let Some(sink) = hooks.trace_sink.as_mut() {
                sink(recorder.trace()).map_err(|e| Error::Run { step: k, source: Box::new(e) })?;
            }
        }
        if k % hooks.observer_stride == 0 || k == n_steps {
            for obs in hooks.observers.iter_mut() {
                obs(k, &state).map_err(|e| Error::Run { step: k, source: Box::new(e) })?;
            }
        }
    }
    Ok(Trajectory {
        final_state: state,
        trace: recorder.into_trace(),
        steps: n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use crate::model::{Interpolation, Potential, Proliferation};

    #[test]
    fn zero_steps_rejected() {
        let g = Grid::new_1d(8, 1.0).unwrap();
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.1).unwrap();
        let st = State::initial(Field::constant(g, -1.0), Field::zeros(g), &spec).unwrap();
        let r = run(st, &spec, &StepConfig::new(1e-3), 0, DiagnosticsHooks::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn stationary_trajectories() {
        let g = Grid::new_2d(8, 8, 1.0, 1.0).unwrap();
        let specs = [
            ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.1).unwrap(),
            ModelSpec::problem_h(Potential::quartic(), Interpolation::smooth(), 0.1).unwrap(),
        ];
        for spec in specs {
            let st = State::initial(Field::constant(g, -1.0), Field::constant(g, 0.5), &spec).unwrap();
            let traj = run(st.clone(), &spec, &StepConfig::new(1e-2), 10, DiagnosticsHooks::default()).unwrap();
            assert_eq!(traj.trace.len(), 11);
            for (a, b) in traj.final_state.sigma.values().iter().zip(st.sigma.values()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(traj.trace.max_balance_residual() < 1e-10);
        }
    }

    #[test]
    fn strides_and_observers() {
        let g = Grid::new_1d(16, 1.0).unwrap();
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.1).unwrap();
        let st = State::initial(Field::from_fn(g, |x, _| (x - 0.5) * 2.0), Field::zeros(g), &spec).unwrap();
        let mut seen = Vec::new();
        let hooks = DiagnosticsHooks::default().with_trace_stride(3).observe(4, |k, _| {
            seen.push(k);
            Ok(())
        });
        let mut rows = Vec::new();
        let hooks = hooks.on_trace_row(|tr| {
            rows.push(tr.len());
            Ok(())
        });
        let traj = run(st, &spec, &StepConfig::new(1e-4), 10, hooks).unwrap();
        assert_eq!(traj.trace.len(), 5); // 0, 3, 6, 9, 10
        assert_eq!(seen, vec![0, 4, 8, 10]);
        assert_eq!(rows, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn step_errors_carry_index() {
        let g = Grid::new_1d(8, 1.0).unwrap();
        let spec = ModelSpec::problem_h(Potential::quartic(), Interpolation::smooth(), 0.1).unwrap();
        let st = State::initial(Field::zeros(g), Field::constant(g, 1.5), &spec).unwrap();
        match run(st, &spec, &StepConfig::new(1e-3), 5, DiagnosticsHooks::default()) {
            Err(Error::Run { step: 1, source }) => assert!(matches!(*source, Error::MaximumPrinciple { .. })),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn balance_residual_is_first_order_in_dt() {
        let eps = 0.1;
        let g = Grid::new_1d(64, 1.0).unwrap();
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), eps).unwrap();
        let phi = Field::from_fn(g, |x, _| 0.8 * (std::f64::consts::PI * x).cos() + 0.1 * (5.0 * x).sin());
        let horizon = 2e-3;
        let residual = |n: usize| {
            let st = State::initial(phi.clone(), Field::zeros(g), &spec).unwrap();
            let traj = run(st, &spec, &StepConfig::new(horizon / n as f64), n, DiagnosticsHooks::default()).unwrap();
            traj.trace.max_balance_residual()
        };
        let (r1, r2) = (residual(20), residual(40));
        let order = (r1 / r2).log2();
        assert!((0.8..1.3).contains(&order), "order {order}: {r1} {r2}");
    }
}
