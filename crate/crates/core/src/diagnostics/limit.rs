use super::trace::DiagnosticsTrace;
use crate::grid::Field;
use crate::model::{ModelSpec, Problem, WTable};
use crate::Result;

/// `W(φ)` pointwise, through a table spanning the field range.
pub fn w_field(phi: &Field, spec: &ModelSpec) -> Result<Field> {
    let table = WTable::new(&spec.potential, phi.min(), phi.max())?;
    Ok(phi.map(|u| table.eval(u)))
}

/// `‖W(φ) − 2θ χ_{φ>0}‖_{L¹}`.
pub fn w_distance_to_limit(phi: &Field, spec: &ModelSpec) -> Result<f64> {
    let w = w_field(phi, spec)?;
    let two_theta = 2.0 * spec.theta();
    Ok(w.zip_map(phi, |w, p| (w - if p > 0.0 { two_theta } else { 0.0 }).abs())
        .integrate())
}

/// Measure of `{φ > 0}` by cell counting.
pub fn qc_measure(phi: &Field) -> f64 {
    phi.values().iter().filter(|&&p| p > 0.0).count() as f64 * phi.grid().cell_area()
}

/// First recorded time at which `0 < |Q^C| < |Ω|` (Problem P) or
/// `0 < |Q^C|` (Problem H) fails; the last recorded time otherwise.
pub fn critical_time(trace: &DiagnosticsTrace, problem: Problem, omega_measure: f64) -> f64 {
    let slack = 1e-12 * omega_measure;
    for (t, &q) in trace.times.iter().zip(&trace.qc_measure) {
        let ok = match problem {
            Problem::P => q > slack && q < omega_measure - slack,
            Problem::H => q > slack,
        };
        if !ok {
            return *t;
        }
    }
    trace.times.last().copied().unwrap_or(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolderNorm {
    L1,
    L2,
}

/// `max_{s<t} ‖u(t) − u(s)‖ / (t − s)^α` over the recorded snapshots.
pub fn holder_quotient(snapshots: &[(f64, Field)], exponent: f64, norm: HolderNorm) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(crate::Error::InvalidArgument("Hölder quotient needs at least two snapshots".into()));
    }
    let mut q: f64 = 0.0;
    for (i, (s, a)) in snapshots.iter().enumerate() {
        for (t, b) in &snapshots[i + 1..] {
            let gap = (t - s).abs();
            if gap == 0.0 {
                continue;
            }
            let diff = b.zip_map(a, |x, y| x - y);
            let d = match norm {
                HolderNorm::L1 => diff.norm_l1(),
                HolderNorm::L2 => diff.norm_l2(),
            };
            q = q.max(d / gap.powf(exponent));
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::{Potential, Proliferation};

    fn spec() -> ModelSpec {
        ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.05).unwrap()
    }

    #[test]
    fn w_on_pure_phases() {
        let g = Grid::new_2d(8, 8, 1.0, 1.0).unwrap();
        let s = spec();
        assert_eq!(w_distance_to_limit(&Field::constant(g, -1.0), &s).unwrap(), 0.0);
        let w = w_field(&Field::constant(g, 1.0), &s).unwrap();
        assert!((w.values()[0] - 2.0 * s.theta()).abs() < 1e-12);
        assert!(w_distance_to_limit(&Field::constant(g, 1.0), &s).unwrap() < 1e-12);
    }

    #[test]
    fn w_distance_scales_with_epsilon() {
        let g = Grid::new_1d(4000, 1.0).unwrap();
        let d = |eps: f64| {
            let s = spec().with_epsilon(eps).unwrap();
            let phi = Field::from_fn(g, |x, _| ((x - 0.5) / (2f64.sqrt() * eps)).tanh());
            w_distance_to_limit(&phi, &s).unwrap()
        };
        let ratio = d(0.04) / d(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn critical_times() {
        let mut tr = DiagnosticsTrace::default();
        tr.times = vec![0.0, 0.1, 0.2, 0.3];
        tr.qc_measure = vec![0.0; 4];
        assert_eq!(critical_time(&tr, Problem::P, 1.0), 0.0);
        assert_eq!(critical_time(&tr, Problem::H, 1.0), 0.0);
        tr.qc_measure = vec![1.0; 4];
        assert_eq!(critical_time(&tr, Problem::H, 1.0), 0.3);
        assert_eq!(critical_time(&tr, Problem::P, 1.0), 0.0);
        tr.qc_measure = vec![0.3, 0.2, 0.0, 0.0];
        assert_eq!(critical_time(&tr, Problem::P, 1.0), 0.2);
        assert_eq!(critical_time(&tr, Problem::H, 1.0), 0.2);
    }

    #[test]
    fn holder_two_point_and_constant() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        let a = Field::constant(g, 0.0);
        let b = Field::new(g, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let q = holder_quotient(&[(0.0, a.clone()), (0.25, b.clone())], 0.125, HolderNorm::L1).unwrap();
        assert!((q - 0.5 / 0.25f64.powf(0.125)).abs() < 1e-14);
        let q2 = holder_quotient(&[(0.0, a.clone()), (0.25, b)], 1.0 / 16.0, HolderNorm::L2).unwrap();
        assert!((q2 - 0.5f64.sqrt() / 0.25f64.powf(1.0 / 16.0)).abs() < 1e-14);
        let flat = holder_quotient(&[(0.0, a.clone()), (1.0, a.clone()), (2.0, a.clone())], 0.5, HolderNorm::L2).unwrap();
        assert_eq!(flat, 0.0);
        assert!(holder_quotient(&[(0.0, a)], 0.5, HolderNorm::L1).is_err());
    }
}
