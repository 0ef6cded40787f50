//! Sampling-based checks of the structural hypotheses on `F`, `P` and `H`,
//! plus the smallness conditions that rule out pure phases for Problem P.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Interpolation, ModelSpec, Potential, Proliferation};
use crate::{Error, Result};

const PAIR_SEED: u64 = 0x5eed_cafe;
const REL_TOL: f64 = 1e-10;

/// Outcome of a single hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisCheck {
    /// Stable identifier, e.g. `"H-technical"`.
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    /// Sample (or first sample of a pair) where the check failed.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    /// Empirical `min F/(|u| − 1)²` over the samples.
    pub fitted_c_bar_f: f64,
    /// Empirical `sup H|F'|/F` over `{F' < 0}`, when `H` is present.
    pub empirical_c_h: Option<f64>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    fn push(&mut self, id: &'static str, statement: &'static str, failure: Option<(f64, String)>, ok: String) {
        let (passed, witness, detail) = match failure {
            None => (true, None, ok),
            Some((u, why)) => (false, Some(u), why),
        };
        self.checks.push(HypothesisCheck {
            id,
            statement,
            passed,
            witness,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "[{mark}] {:<18} {}", c.id, c.statement)?;
            if let Some(u) = c.witness {
                write!(f, "  (witness u = {u:.9})")?;
            }
            writeln!(f, "\n         {}", c.detail)?;
        }
        writeln!(f, "fitted c_bar_F = {:.6}", self.fitted_c_bar_f)?;
        if let Some(c) = self.empirical_c_h {
            writeln!(f, "empirical C_H  = {c:.6e}")?;
        }
        Ok(())
    }
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * (1.0 + rhs.abs())
}

/// Checks every hypothesis the configured problem relies on, on `n_samples`
/// uniform points of `sample_range` and as many random pairs.
pub fn check_assumptions(spec: &ModelSpec, sample_range: (f64, f64), n_samples: usize) -> Result<ValidationReport> {
    let (lo, hi) = sample_range;
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {n_samples}")));
    }
    if !(lo < hi) || !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad sample range [{lo}, {hi}]")));
    }
    let samples: Vec<f64> = (0..n_samples)
        .map(|k| lo + (hi - lo) * k as f64 / (n_samples - 1) as f64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    let mut pairs: Vec<(f64, f64)> = samples.windows(2).map(|w| (w[0], w[1])).collect();
    pairs.extend((0..n_samples).map(|_| (rng.gen_range(lo..hi), rng.gen_range(lo..hi))));

    let mut report = ValidationReport::default();
    let f = &spec.potential;
    check_potential(f, &samples, &mut report);
    if let Some(p) = spec.proliferation() {
        check_proliferation(p, f, &samples, &pairs, &mut report);
    }
    if let Some(h) = spec.interpolation() {
        check_interpolation(h, f, &samples, &pairs, &mut report);
    }
    Ok(report)
}

fn check_potential(f: &Potential, samples: &[f64], report: &mut ValidationReport) {
    let k = f.constants();

    let mut fail = None;
    for &u in [-1.0, 1.0].iter() {
        if f.eval(u).abs() > 1e-14 {
            fail = Some((u, format!("F({u}) = {:e} is not zero", f.eval(u))));
        }
    }
    if fail.is_none() {
        fail = samples.iter().find_map(|&u| {
            let v = f.eval(u);
            if !v.is_finite() || v < 0.0 || ((u.abs() - 1.0).abs() > 1e-3 && v <= 0.0) {
                Some((u, format!("F({u}) = {v:e}")))
            } else {
                None
            }
        });
    }
    report.push(
        "F-double-well",
        "F >= 0, vanishing only at -1 and 1",
        fail,
        "F(±1) = 0 and F > 0 elsewhere on samples".into(),
    );

    let p = k.growth_exponent;
    let fail = if !(3.0..6.0).contains(&p) {
        Some((f64::NAN, format!("growth exponent p = {p} outside [3, 6)")))
    } else if !(k.delta0 > 0.0 && k.delta0 < 1.0) {
        Some((f64::NAN, format!("delta0 = {} outside (0, 1)", k.delta0)))
    } else {
        samples
            .iter()
            .filter(|u| u.abs() >= 1.0 - k.delta0)
            .find(|&&u| !within(k.convexity * u.abs().powf(p - 2.0), f.deriv2(u)))
            .map(|&u| (u, format!("F''({u}) = {:e} < c|u|^(p-2)", f.deriv2(u))))
    };
    report.push(
        "F-convexity",
        "F''(u) >= c|u|^(p-2) for |u| >= 1 - delta0, p in [3, 6)",
        fail,
        format!("p = {p}, delta0 = {}, c = {}", k.delta0, k.convexity),
    );

    // Convex/bounded-curvature split, second derivatives by central differences.
    let d = 1e-4;
    let mut min_convex = f64::INFINITY;
    let mut max_nc: f64 = 0.0;
    let mut fail = None;
    for &u in samples {
        let split = f.convex_part_deriv(u) + f.nonconvex_part_deriv(u);
        if (split - f.deriv(u)).abs() > 1e-9 * (1.0 + f.deriv(u).abs()) {
            fail.get_or_insert((u, format!("F_c' + F_nc' = {split:e} differs from F' = {:e}", f.deriv(u))));
        }
        let fc2 = (f.convex_part_deriv(u + d) - f.convex_part_deriv(u - d)) / (2.0 * d);
        let fnc2 = (f.nonconvex_part_deriv(u + d) - f.nonconvex_part_deriv(u - d)) / (2.0 * d);
        let ratio = fc2 / (1.0 + u.abs().powf(p - 2.0));
        min_convex = min_convex.min(ratio);
        max_nc = max_nc.max(fnc2.abs());
        if ratio <= 0.0 {
            fail.get_or_insert((u, format!("F_c''({u}) = {fc2:e} is not positive")));
        }
        if !fnc2.is_finite() {
            fail.get_or_insert((u, "F_nc'' is not finite".into()));
        }
    }
    report.push(
        "F-split",
        "F = F_c + F_nc with F_c'' ~ 1 + |u|^(p-2) and |F_nc''| bounded",
        fail,
        format!("min F_c''/(1+|u|^(p-2)) = {min_convex:.4}, max |F_nc''| = {max_nc:.4}"),
    );

    let mut fitted: f64 = f64::INFINITY;
    let mut fail = None;
    for &u in samples {
        let v = f.eval(u);
        if !within(k.c_f * u.abs().powf(p) - k.big_c_f, v) {
            fail.get_or_insert((u, format!("F({u}) = {v:e} < c_F|u|^p - C_F")));
        }
        let gap = (u.abs() - 1.0).powi(2);
        if !within(k.c_bar_f * gap, v) {
            fail.get_or_insert((u, format!("F({u}) = {v:e} < c_bar_F(|u|-1)^2")));
        }
        if gap > 1e-12 {
            fitted = fitted.min(v / gap);
        }
    }
    report.fitted_c_bar_f = fitted;
    report.push(
        "F-lower-bounds",
        "F(u) >= c_F|u|^p - C_F and F(u) >= c_bar_F(|u|-1)^2",
        fail,
        format!("c_F = {}, C_F = {}, c_bar_F = {}", k.c_f, k.big_c_f, k.c_bar_f),
    );
}

fn check_proliferation(
    pr: &Proliferation,
    f: &Potential,
    samples: &[f64],
    pairs: &[(f64, f64)],
    report: &mut ValidationReport,
) {
    let fail = samples
        .iter()
        .find(|&&u| !(pr.eval(u) >= 0.0))
        .map(|&u| (u, format!("P({u}) = {:e}", pr.eval(u))));
    report.push("P-nonnegative", "P >= 0", fail, "P >= 0 on samples".into());

    let r = pr.growth_exponent;
    let p = f.constants().growth_exponent;
    let fail = if !(r >= 1.0 && r <= p - 2.0) {
        Some((f64::NAN, format!("r = {r} outside [1, p-2] = [1, {}]", p - 2.0)))
    } else {
        samples
            .iter()
            .find(|&&u| !within(pr.eval(u), pr.c_p * (1.0 + u.abs().powf(r))))
            .map(|&u| (u, format!("P({u}) = {:e} > C_P(1+|u|^r)", pr.eval(u))))
    };
    report.push(
        "P-growth",
        "r in [1, p-2] and P(u) <= C_P(1+|u|^r)",
        fail,
        format!("r = {r}, C_P = {}", pr.c_p),
    );

    let fail = pairs
        .iter()
        .find(|&&(u, v)| {
            let bound = pr.c_bar_p * (u - v).abs() * (1.0 + u.abs().powf(r - 1.0) + v.abs().powf(r - 1.0));
            !within((pr.eval(u) - pr.eval(v)).abs(), bound)
        })
        .map(|&(u, v)| (u, format!("pair ({u}, {v}) violates the local Lipschitz bound")));
    report.push(
        "P-lipschitz",
        "|P(u)-P(v)| <= C_bar_P|u-v|(1+|u|^(r-1)+|v|^(r-1))",
        fail,
        format!("C_bar_P = {}", pr.c_bar_p),
    );
}

fn technical_ratio(h: &Interpolation, f: &Potential, u: f64) -> Option<f64> {
    let df = f.deriv(u);
    let fu = f.eval(u);
    if df < 0.0 && fu > 0.0 {
        Some(h.eval(u) * df.abs() / fu)
    } else {
        None
    }
}

fn check_interpolation(
    h: &Interpolation,
    f: &Potential,
    samples: &[f64],
    pairs: &[(f64, f64)],
    report: &mut ValidationReport,
) {
    let fail = samples
        .iter()
        .find(|&&u| !(0.0..=1.0).contains(&h.eval(u)))
        .map(|&u| (u, format!("H({u}) = {:e}", h.eval(u))));
    report.push("H-range", "0 <= H <= 1", fail, "H in [0, 1] on samples".into());

    let l = h.lipschitz_constant;
    let fail = pairs
        .iter()
        .find(|&&(u, v)| !within((h.eval(u) - h.eval(v)).abs(), l * (u - v).abs()))
        .map(|&(u, v)| (u, format!("pair ({u}, {v}) violates Lipschitz constant {l}")));
    report.push("H-lipschitz", "|H(u)-H(v)| <= L|u-v|", fail, format!("L = {l}"));

    // Dense samples plus geometric probes towards each well from the side
    // where F' < 0; the ratio must stay bounded there.
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for &z in &[-1.0f64, 1.0] {
        for &side in &[-1.0f64, 1.0] {
            let seq: Vec<f64> = (1..=8).map(|k| z + side * 10f64.powi(-k)).collect();
            if seq.iter().all(|&u| f.deriv(u) < 0.0) {
                probes.push(seq);
            }
        }
    }
    let mut sup = 0.0f64;
    let mut argsup = f64::NAN;
    for &u in samples.iter().chain(probes.iter().flatten()) {
        if let Some(r) = technical_ratio(h, f, u) {
            if r > sup {
                sup = r;
                argsup = u;
            }
        }
    }
    report.empirical_c_h = Some(sup);

    let fail = match h.technical_constant {
        Some(c) => samples
            .iter()
            .chain(probes.iter().flatten())
            .find(|&&u| technical_ratio(h, f, u).is_some_and(|r| !within(r, c)))
            .map(|&u| {
                let r = technical_ratio(h, f, u).unwrap();
                (u, format!("H|F'|/F = {r:.3e} exceeds declared C_H = {c}"))
            }),
        None => probes.iter().find_map(|seq| {
            let coarse = technical_ratio(h, f, seq[3]).unwrap_or(0.0);
            let fine = technical_ratio(h, f, seq[7]).unwrap_or(0.0);
            (fine > 10.0 * coarse && fine > 1.0).then(|| {
                (
                    seq[7],
                    format!("H|F'|/F unbounded near a well: {coarse:.3e} at distance 1e-4, {fine:.3e} at 1e-8"),
                )
            })
        }),
    };
    report.push(
        "H-technical",
        "H(u) <= C_H F(u)/|F'(u)| wherever F'(u) < 0",
        fail,
        format!("sup H|F'|/F = {sup:.6e} at u = {argsup:.6}"),
    );
}

/// Constants entering the smallness conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConstants {
    pub c_f: f64,
    pub big_c_f: f64,
    pub c_p: f64,
}

impl GrowthConstants {
    pub fn from_spec(spec: &ModelSpec) -> Option<Self> {
        let k = spec.potential.constants();
        spec.proliferation().map(|p| Self {
            c_f: k.c_f,
            big_c_f: k.big_c_f,
            c_p: p.c_p,
        })
    }
}

/// Which smallness condition, if any, keeps Problem P away from pure phases
/// on the whole horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalTimeCheck {
    Ass1Holds,
    Ass2Holds,
    NeitherHolds,
}

/// Evaluates the two smallness conditions:
///
/// * `T·E₀ < |Ω| c_F (1 − c₀)² / (2 C_P (c_F + C_F))`, or
/// * `|[φ₀ + σ₀]| <= d₀ < 1` and `E₀ < |Ω| (1 − d₀)² / 2`.
pub fn precheck_global_time(
    horizon: f64,
    e0: f64,
    c0: f64,
    d0: Option<f64>,
    omega_measure: f64,
    constants: GrowthConstants,
) -> Result<GlobalTimeCheck> {
    if !(omega_measure > 0.0) {
        return Err(Error::InvalidArgument(format!("|Omega| must be positive, got {omega_measure}")));
    }
    if !(0.0..1.0).contains(&c0) {
        return Err(Error::InvalidArgument(format!("c0 = {c0} outside [0, 1)")));
    }
    if !(e0 > 0.0) {
        return Err(Error::InvalidArgument(format!("E0 = {e0} must be positive")));
    }
    let GrowthConstants { c_f, big_c_f, c_p } = constants;
    let rhs = omega_measure * c_f / (2.0 * c_p * (c_f + big_c_f)) * (1.0 - c0).powi(2);
    if horizon * e0 < rhs {
        return Ok(GlobalTimeCheck::Ass1Holds);
    }
    if let Some(d0) = d0 {
        if (0.0..1.0).contains(&d0) && e0 < 0.5 * omega_measure * (1.0 - d0).powi(2) {
            return Ok(GlobalTimeCheck::Ass2Holds);
        }
    }
    Ok(GlobalTimeCheck::NeitherHolds)
}

/// `m₀ = c₀ + √(2 T E₀ C_P (c_F + C_F) / (|Ω| c_F))`.
pub fn mass_bound_ass1(horizon: f64, e0: f64, c0: f64, omega_measure: f64, constants: GrowthConstants) -> f64 {
    let GrowthConstants { c_f, big_c_f, c_p } = constants;
    c0 + (2.0 * horizon * e0 * c_p * (c_f + big_c_f) / (omega_measure * c_f)).sqrt()
}

/// `m₀ = d₀ + √(2 E₀ / |Ω|)`.
pub fn mass_bound_ass2(d0: f64, e0: f64, omega_measure: f64) -> f64 {
    d0 + (2.0 * e0 / omega_measure).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Interpolation, Potential, Proliferation};

    fn default_range() -> (f64, f64) {
        (-3.0, 3.0)
    }

    #[test]
    fn linear_proliferation_passes() {
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::linear(1.0), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 10_000).unwrap();
        assert!(report.all_passed(), "{report}");
        assert!(report.get("P-lipschitz").is_some());
    }

    #[test]
    fn quadratic_proliferation_passes() {
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::quadratic(0.5), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 10_000).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn prototype_interpolation_fails_technical_check() {
        let spec = ModelSpec::problem_h(Potential::quartic(), Interpolation::prototype(), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 10_000).unwrap();
        let failures: Vec<_> = report.failures().map(|c| c.id).collect();
        assert_eq!(failures, vec!["H-technical"]);
        let w = report.get("H-technical").unwrap().witness.unwrap();
        assert!((w - 1.0).abs() < 1e-3, "witness {w}");
    }

    #[test]
    fn prototype_with_declared_constant_still_fails() {
        let mut h = Interpolation::prototype();
        h.technical_constant = Some(10.0);
        let spec = ModelSpec::problem_h(Potential::quartic(), h, 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 1000).unwrap();
        assert!(!report.get("H-technical").unwrap().passed);
    }

    #[test]
    fn smooth_interpolation_passes() {
        let spec = ModelSpec::problem_h(Potential::quartic(), Interpolation::smooth(), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 10_000).unwrap();
        assert!(report.all_passed(), "{report}");
        // sup of 4u(1-u²)² on (0, 1) is 64/(25√5).
        let exact = 64.0 / (25.0 * 5f64.sqrt());
        assert!((report.empirical_c_h.unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn c_bar_f_quarter_is_tight() {
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::linear(1.0), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 10_001).unwrap();
        assert!((report.fitted_c_bar_f - 0.25).abs() < 1e-6);
    }

    #[test]
    fn too_few_samples() {
        let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::linear(1.0), 0.04).unwrap();
        assert!(check_assumptions(&spec, default_range(), 99).is_err());
    }

    #[test]
    fn wrong_lower_bound_constant_is_caught() {
        let f = Potential::quartic();
        let mut k = *f.constants();
        k.c_bar_f = 0.3;
        let bad = Potential::new(
            "quartic-bad-cbar",
            crate::model::PotentialFns {
                eval: std::sync::Arc::new(|u: f64| 0.25 * (1.0 - u * u).powi(2)),
                deriv: std::sync::Arc::new(|u: f64| u * u * u - u),
                deriv2: std::sync::Arc::new(|u: f64| 3.0 * u * u - 1.0),
                convex_part_deriv: std::sync::Arc::new(|u: f64| u * u * u + u),
                nonconvex_part_deriv: std::sync::Arc::new(|u: f64| -2.0 * u),
            },
            k,
        );
        let spec = ModelSpec::problem_p(bad, Proliferation::linear(1.0), 0.04).unwrap();
        let report = check_assumptions(&spec, default_range(), 1000).unwrap();
        assert!(!report.get("F-lower-bounds").unwrap().passed);
    }

    fn quartic_constants(lambda0: f64) -> GrowthConstants {
        GrowthConstants {
            c_f: 0.125,
            big_c_f: 0.25,
            c_p: 2.0 * lambda0,
        }
    }

    #[test]
    fn zero_horizon_always_satisfies_first_condition() {
        let r = precheck_global_time(0.0, 5.0, 0.9, None, 1.0, quartic_constants(1.0)).unwrap();
        assert_eq!(r, GlobalTimeCheck::Ass1Holds);
    }

    #[test]
    fn neither_condition() {
        // d0 = 0.5: second condition needs E0 < 0.125.
        let r = precheck_global_time(10.0, 0.125, 0.0, Some(0.5), 1.0, quartic_constants(1.0)).unwrap();
        assert_eq!(r, GlobalTimeCheck::NeitherHolds);
        let r = precheck_global_time(10.0, 0.1, 0.0, Some(0.5), 1.0, quartic_constants(1.0)).unwrap();
        assert_eq!(r, GlobalTimeCheck::Ass2Holds);
    }

    #[test]
    fn quartic_threshold_arithmetic() {
        // |Ω| c_F / (2 C_P (c_F + C_F)) = (1/8) / (2·2·(3/8)) = 1/12.
        let k = quartic_constants(1.0);
        let below = precheck_global_time(1.0 / 12.0 - 1e-9, 1.0, 0.0, None, 1.0, k).unwrap();
        let above = precheck_global_time(1.0 / 12.0 + 1e-9, 1.0, 0.0, None, 1.0, k).unwrap();
        assert_eq!(below, GlobalTimeCheck::Ass1Holds);
        assert_eq!(above, GlobalTimeCheck::NeitherHolds);
    }

    #[test]
    fn nonpositive_measure_rejected() {
        assert!(precheck_global_time(1.0, 1.0, 0.0, None, 0.0, quartic_constants(1.0)).is_err());
    }

    #[test]
    fn mass_bound_below_one_exactly_when_first_condition_holds() {
        let k = quartic_constants(0.5);
        for &t in &[0.01, 0.05, 0.2] {
            let m0 = mass_bound_ass1(t, 1.0, 0.3, 1.0, k);
            let holds = precheck_global_time(t, 1.0, 0.3, None, 1.0, k).unwrap() == GlobalTimeCheck::Ass1Holds;
            assert_eq!(holds, m0 < 1.0, "t = {t}, m0 = {m0}");
        }
    }
}
