//! ε-sweeps on a fixed physical geometry.

use crate::diagnostics::{
    critical_time, energy, extract_interface, gibbs_thomson_residual, holder_quotient,
    w_distance_to_limit, DiagnosticsTrace, HolderNorm,
};
use crate::grid::{Field, Grid};
use crate::model::{
    check_assumptions, mass_bound_ass1, mass_bound_ass2, precheck_global_time, GlobalTimeCheck, GrowthConstants,
    ModelSpec, Potential, Problem,
};
use crate::solver::{run, DiagnosticsHooks, State, StepConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use std::sync::{Arc, Mutex};

/// Initial tumour region `Ω₀`.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Circle { center: (f64, f64), radius: f64 },
    /// The region `{x < position}`.
    Stripe { position: f64 },
    Circles(Vec<((f64, f64), f64)>),
}

impl Geometry {
    /// Signed distance to `∂Ω₀`, positive inside. In 1D circles are
    /// intervals and `y` is ignored.
    pub fn signed_distance(&self, x: f64, y: f64, dim: usize) -> f64 {
        let disc = |c: (f64, f64), r: f64| {
            if dim == 1 {
                r - (x - c.0).abs()
            } else {
                r - (x - c.0).hypot(y - c.1)
            }
        };
        match self {
            Geometry::Circle { center, radius } => disc(*center, *radius),
            Geometry::Stripe { position } => position - x,
            Geometry::Circles(list) => list.iter().map(|&(c, r)| disc(c, r)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Smallest distance from `∂Ω₀` to `∂Ω`; infinite for an empty region.
    pub fn clearance(&self, lx: f64, ly: f64, dim: usize) -> f64 {
        let disc = |c: (f64, f64), r: f64| {
            let mut m = (c.0 - r).min(lx - c.0 - r);
            if dim == 2 {
                m = m.min(c.1 - r).min(ly - c.1 - r);
            }
            m
        };
        match self {
            Geometry::Circle { center, radius } => disc(*center, *radius),
            Geometry::Stripe { position } => position.min(lx - position),
            Geometry::Circles(list) => list.iter().map(|&(c, r)| disc(c, r)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Length of `∂Ω₀` (point count in 1D); overlaps between circles are
    /// not discounted.
    pub fn perimeter(&self, ly: f64, dim: usize) -> f64 {
        let circle = |r: f64| if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI * r };
        match self {
            Geometry::Circle { radius, .. } => circle(*radius),
            Geometry::Stripe { .. } => {
                if dim == 1 {
                    1.0
                } else {
                    ly
                }
            }
            Geometry::Circles(list) => list.iter().map(|&(_, r)| circle(r)).sum(),
        }
    }
}

/// Tabulated solution of `q' = √(2F(q))`, `q(0) = 0`.
#[derive(Clone, Debug)]
pub struct OptimalProfile {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl OptimalProfile {
    const HALF_WIDTH: f64 = 20.0;

    pub fn new(potential: &Potential) -> Self {
        let step = 1e-3;
        let n = (Self::HALF_WIDTH / step).round() as usize;
        let rhs = |q: f64| (2.0 * potential.eval(q).max(0.0)).sqrt();
        let integrate = |sign: f64| {
            let mut q = 0.0;
            let mut out = vec![0.0];
            let h = sign * step;
            for _ in 0..n {
                let k1 = rhs(q);
                let k2 = rhs(q + 0.5 * h * k1);
                let k3 = rhs(q + 0.5 * h * k2);
                let k4 = rhs(q + h * k3);
                q += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
                q = q.clamp(-1.0, 1.0);
                out.push(q);
            }
            out
        };
        let fwd = integrate(1.0);
        let bwd = integrate(-1.0);
        let mut values: Vec<f64> = bwd.iter().rev().copied().collect();
        values.extend_from_slice(&fwd[1..]);
        let slopes = values.iter().map(|&q| rhs(q)).collect();
        Self { step, values, slopes }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.values.len();
        let pos = (s + Self::HALF_WIDTH) / self.step;
        // Beyond the table the profile equals the wells to within 1e-12.
        if pos <= 0.0 {
            return -1.0;
        }
        if pos >= (n - 1) as f64 {
            return 1.0;
        }
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h = self.step;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }
}

/// Default clearance between the interface and `∂Ω`, in units of ε.
pub const DEFAULT_CLEARANCE: f64 = 5.0;

/// `φ₀ = q(d/ε)` with `d` the signed distance to the geometry.
pub fn well_prepared_initial(geometry: &Geometry, spec: &ModelSpec, grid: Grid) -> Result<Field> {
    well_prepared_initial_with_clearance(geometry, spec, grid, DEFAULT_CLEARANCE)
}

/// As [`well_prepared_initial`] with clearance `factor·ε`.
pub fn well_prepared_initial_with_clearance(
    geometry: &Geometry,
    spec: &ModelSpec,
    grid: Grid,
    factor: f64,
) -> Result<Field> {
    let eps = spec.epsilon;
    let clearance = geometry.clearance(grid.lx(), grid.ly(), grid.dim());
    if clearance < factor * eps {
        return Err(Error::Geometry(format!(
            "interface is {clearance:.4} from the boundary, need at least {factor}*epsilon = {:.4}",
            factor * eps
        )));
    }
    let profile = OptimalProfile::new(&spec.potential);
    let dim = grid.dim();
    Ok(Field::from_fn(grid, |x, y| profile.eval(geometry.signed_distance(x, y, dim) / eps)))
}

/// Adds seeded uniform noise in `[-amplitude, amplitude]`.
pub fn perturb(field: &Field, amplitude: f64, seed: u64) -> Field {
    use rand::{Rng, SeedableRng};
    if amplitude == 0.0 {
        return field.clone();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = field.values().iter().map(|v| v + amplitude * rng.gen_range(-1.0..=1.0)).collect();
    Field::new(*field.grid(), values).expect("finite perturbation of a finite field")
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Model, domain and horizon shared by every run.
    pub base: ModelSpec,
    pub dim: usize,
    pub geometry: Geometry,
    /// Constant initial nutrient.
    pub sigma0: f64,
    /// Cells per ε, `ρ`.
    pub cells_per_eps: f64,
    /// `dt = c_dt·ε³`, rounded down so the steps hit the horizon.
    pub c_dt: f64,
    pub stabilization: f64,
    pub trace_stride: usize,
    /// Number of evenly spaced snapshots kept for the Hölder quotients.
    pub holder_snapshots: usize,
    /// Required interface clearance in units of ε.
    pub clearance: f64,
}

impl SweepPlan {
    pub const MIN_CELLS_PER_EPS: f64 = 6.0;

    pub fn new(base: ModelSpec, epsilons: Vec<f64>, geometry: Geometry) -> Self {
        let sigma0 = match base.problem() {
            Problem::P => 0.8,
            Problem::H => 1.0,
        };
        Self {
            epsilons,
            base,
            dim: 2,
            geometry,
            sigma0,
            cells_per_eps: Self::MIN_CELLS_PER_EPS,
            c_dt: 0.5,
            stabilization: StepConfig::DEFAULT_STABILIZATION,
            trace_stride: 1,
            holder_snapshots: 11,
            clearance: DEFAULT_CLEARANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.epsilons.is_empty() {
            return bad("sweep needs at least one epsilon".into());
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilons must be positive".into());
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing".into());
        }
        if !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dimension must be 1 or 2, got {}", self.dim));
        }
        if !(self.cells_per_eps >= Self::MIN_CELLS_PER_EPS) {
            return bad(format!("cells per epsilon must be at least 6, got {}", self.cells_per_eps));
        }
        if !(self.c_dt > 0.0 && self.c_dt.is_finite()) {
            return bad(format!("c_dt must be positive, got {}", self.c_dt));
        }
        if !(0.0..=1.0).contains(&self.sigma0) {
            return bad(format!("sigma0 must lie in [0, 1], got {}", self.sigma0));
        }
        if self.trace_stride == 0 {
            return bad("trace stride must be positive".into());
        }
        if !(self.clearance > 0.0 && self.clearance.is_finite()) {
            return bad(format!("clearance factor must be positive, got {}", self.clearance));
        }
        Ok(())
    }

    /// Cells along each axis for `ε`: `ceil(L·ρ/ε)`.
    pub fn cells(&self, eps: f64) -> (usize, usize) {
        let n = |l: f64| ((l * self.cells_per_eps / eps) * (1.0 - 1e-12)).ceil() as usize;
        let ny = if self.dim == 2 { n(self.base.ly) } else { 1 };
        (n(self.base.lx), ny)
    }

    pub fn grid(&self, eps: f64) -> Result<Grid> {
        let (nx, ny) = self.cells(eps);
        match self.dim {
            1 => Grid::new_1d(nx, self.base.lx),
            _ => Grid::new_2d(nx, ny, self.base.lx, self.base.ly),
        }
    }

    /// `(dt, steps)` for `ε`.
    pub fn time_steps(&self, eps: f64) -> (f64, usize) {
        let target = self.c_dt * eps.powi(3);
        let steps = ((self.base.horizon / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (self.base.horizon / steps as f64, steps)
    }
}

/// One row of a [`SweepReport`].
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub steps: usize,
    /// `E(0) + ½‖σ₀‖²`.
    pub initial_energy: f64,
    pub final_energy: f64,
    pub w_distance: f64,
    /// `None` when there is no interface (or in 1D).
    pub gibbs_thomson: Option<f64>,
    pub interface_length: Option<f64>,
    /// `E / (2θ·length)` at the final time.
    pub energy_perimeter_ratio: Option<f64>,
    /// `max_t discrepancy⁺ / E`.
    pub max_discrepancy_ratio: f64,
    pub max_balance_residual: f64,
    pub mass_drift: f64,
    pub max_abs_phi_average: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `max_t ‖|φ|−1‖₂ / √(εE/c̄_F)`.
    pub well_bound_ratio: f64,
    pub critical_time: f64,
    pub holder_chi: f64,
    pub holder_phi: f64,
    pub global_time: Option<GlobalTimeCheck>,
    /// Mass bound from whichever smallness condition holds.
    pub mass_bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepRun {
    pub row: SweepRow,
    pub trace: DiagnosticsTrace,
    pub final_state: State,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    /// Sorted by ε, largest first.
    pub runs: Vec<SweepRun>,
}

impl SweepReport {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.runs.iter().map(|r| &r.row)
    }

    fn fit(&self, f: impl Fn(&SweepRow) -> f64) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self.rows().map(|r| (r.epsilon, f(r))).unzip();
        convergence_order(&xs, &ys).ok()
    }

    /// Fitted order in ε of the w-distance.
    pub fn w_distance_order(&self) -> Option<f64> {
        self.fit(|r| r.w_distance)
    }

    pub fn discrepancy_order(&self) -> Option<f64> {
        self.fit(|r| r.max_discrepancy_ratio)
    }
}

/// Failure of one ε-run, with the runs that completed.
#[derive(Debug)]
pub struct SweepFailure {
    pub epsilon: f64,
    pub error: Error,
    pub partial: SweepReport,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run at epsilon = {} failed: {}", self.epsilon, self.error)
    }
}

impl std::error::Error for SweepFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

fn run_one(plan: &SweepPlan, eps: f64) -> Result<SweepRun> {
    let spec = plan.base.with_epsilon(eps)?;
    let grid = plan.grid(eps)?;
    let (dt, steps) = plan.time_steps(eps);
    let phi0 = well_prepared_initial_with_clearance(&plan.geometry, &spec, grid, plan.clearance)?;
    let sigma0 = Field::constant(grid, plan.sigma0);
    let initial = State::initial(phi0, sigma0, &spec)?;
    let omega = grid.measure();

    let (global_time, mass_bound) = match (spec.problem(), GrowthConstants::from_spec(&spec)) {
        (Problem::P, Some(k)) => {
            let e0 = energy(&initial.phi, &spec) + 0.5 * initial.sigma.dot(&initial.sigma);
            let c0 = initial.phi.average().abs();
            let d0 = (initial.phi.average() + initial.sigma.average()).abs();
            match precheck_global_time(spec.horizon, e0, c0, Some(d0), omega, k) {
                Ok(GlobalTimeCheck::Ass1Holds) => (
                    Some(GlobalTimeCheck::Ass1Holds),
                    Some(mass_bound_ass1(spec.horizon, e0, c0, omega, k)),
                ),
                Ok(GlobalTimeCheck::Ass2Holds) => {
                    (Some(GlobalTimeCheck::Ass2Holds), Some(mass_bound_ass2(d0, e0, omega)))
                }
                Ok(GlobalTimeCheck::NeitherHolds) => (Some(GlobalTimeCheck::NeitherHolds), None),
                // pure-phase initial data: no bound applies
                Err(_) => (None, None),
            }
        }
        _ => (None, None),
    };

    let snap_every = (steps / plan.holder_snapshots.saturating_sub(1).max(1)).max(1);
    let snapshots: Arc<Mutex<Vec<(f64, Field)>>> = Arc::default();
    let sink = Arc::clone(&snapshots);
    let hooks = DiagnosticsHooks::default()
        .with_trace_stride(plan.trace_stride)
        .observe(snap_every, move |_, st| {
            sink.lock().expect("snapshot sink").push((st.t, st.phi.clone()));
            Ok(())
        });
    let cfg = StepConfig::new(dt).with_stabilization(plan.stabilization);
    let traj = run(initial, &spec, &cfg, steps, hooks)?;
    let snaps = std::mem::take(&mut *snapshots.lock().expect("snapshot sink"));
    let tr = &traj.trace;
    let fin = &traj.final_state;

    let chi: Vec<(f64, Field)> = snaps
        .iter()
        .map(|(t, p)| (*t, p.map(|v| if v > 0.0 { 1.0 } else { 0.0 })))
        .collect();
    let holder_chi = holder_quotient(&chi, 1.0 / 8.0, HolderNorm::L1)?;
    let holder_phi = holder_quotient(&snaps, 1.0 / 16.0, HolderNorm::L2)?;

    let (gibbs_thomson, interface_length) = if grid.dim() == 2 {
        match extract_interface(&fin.phi) {
            Ok(curve) => {
                let gt = gibbs_thomson_residual(&curve, &fin.mu, spec.theta()).ok();
                (gt, Some(curve.length()))
            }
            Err(Error::EmptyInterface) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let final_energy = *tr.energy.last().expect("trace has rows");
    let energy_perimeter_ratio = match (grid.dim(), interface_length) {
        (2, Some(l)) if l > 0.0 => Some(final_energy / (2.0 * spec.theta() * l)),
        (1, _) if final_energy > 0.0 => {
            let crossings = fin.phi.values().windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
            (crossings > 0).then(|| final_energy / (2.0 * spec.theta() * crossings as f64))
        }
        _ => None,
    };
    let c_bar = spec.potential.constants().c_bar_f;
    let max_ratio = |num: &[f64], den: &dyn Fn(usize) -> f64| {
        num.iter()
            .enumerate()
            .map(|(i, n)| {
                let d = den(i);
                if d > 0.0 {
                    n / d
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    };
    let max_discrepancy_ratio = max_ratio(&tr.discrepancy_pos, &|i| tr.energy[i]);
    let well_bound_ratio = max_ratio(&tr.phi_well_distance, &|i| (eps * tr.energy[i] / c_bar).sqrt());

    let row = SweepRow {
        epsilon: eps,
        nx: grid.nx(),
        ny: grid.ny(),
        dt,
        steps,
        initial_energy: tr.energy[0] + tr.sigma_l2_half[0],
        final_energy,
        w_distance: w_distance_to_limit(&fin.phi, &spec)?,
        gibbs_thomson,
        interface_length,
        energy_perimeter_ratio,
        max_discrepancy_ratio,
        max_balance_residual: tr.max_balance_residual(),
        mass_drift: tr.mass_drift(),
        max_abs_phi_average: tr.mass_phi.iter().fold(0.0, |m, x| m.max(x.abs())),
        sigma_min: tr.sigma_min.iter().copied().fold(f64::INFINITY, f64::min),
        sigma_max: tr.sigma_max.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        well_bound_ratio,
        critical_time: critical_time(tr, spec.problem(), omega),
        holder_chi,
        holder_phi,
        global_time,
        mass_bound,
    };
    Ok(SweepRun {
        row,
        trace: traj.trace,
        final_state: traj.final_state,
    })
}

/// Runs every ε of the plan (concurrently) and assembles the report in ε
/// order.
pub fn run_sweep(plan: &SweepPlan) -> std::result::Result<SweepReport, SweepFailure> {
    let fail = |epsilon: f64, error: Error| SweepFailure {
        epsilon,
        error,
        partial: SweepReport::default(),
    };
    let first = plan.epsilons.first().copied().unwrap_or(f64::NAN);
    plan.validate().map_err(|e| fail(first, e))?;
    let report = check_assumptions(&plan.base, (-3.0, 3.0), 2001).map_err(|e| fail(first, e))?;
    if !report.all_passed() {
        let ids: Vec<&str> = report.failures().map(|c| c.id).collect();
        return Err(fail(first, Error::InvalidSpec(format!("hypotheses fail: {}", ids.join(", ")))));
    }
    let results: Vec<Result<SweepRun>> = plan.epsilons.par_iter().map(|&eps| run_one(plan, eps)).collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut failure = None;
    for (eps, res) in plan.epsilons.iter().zip(results) {
        match res {
            Ok(r) => runs.push(r),
            Err(e) if failure.is_none() => failure = Some((*eps, e)),
            Err(_) => {}
        }
    }
    let report = SweepReport { runs };
    match failure {
        None => Ok(report),
        Some((epsilon, error)) => Err(SweepFailure {
            epsilon,
            error,
            partial: report,
        }),
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn convergence_order(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("xs and ys differ in length".into()));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("entries must be positive and finite".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("xs must not all coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Proliferation, WTable};
    use rand::{Rng, SeedableRng};

    fn ch_spec(eps: f64) -> ModelSpec {
        ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), eps).unwrap()
    }

    #[test]
    fn quartic_profile_is_tanh() {
        let q = OptimalProfile::new(&Potential::quartic());
        for s in [-30.0, -5.0, -1.3, -1e-3, 0.0, 0.37, 2.0, 7.5, 25.0] {
            let exact = (s / 2f64.sqrt()).tanh();
            assert!((q.eval(s) - exact).abs() < 1e-10, "{s}");
        }
    }

    #[test]
    fn circle_initial_data() {
        let eps = 0.02;
        let geom = Geometry::Circle { center: (0.5, 0.5), radius: 0.25 };
        let grid = Grid::new_2d(200, 200, 1.0, 1.0).unwrap();
        let spec = ch_spec(eps);
        let phi = well_prepared_initial(&geom, &spec, grid).unwrap();
        let q = OptimalProfile::new(&spec.potential);
        assert!((q.eval(0.25 / eps) - 1.0).abs() < 1e-6);
        assert!(phi.max() > 1.0 - 1e-6);
        let e = energy(&phi, &spec);
        let target = 2.0 * spec.theta() * 2.0 * std::f64::consts::PI * 0.25;
        assert!((e / target - 1.0).abs() < 0.03, "{}", e / target);
    }

    #[test]
    fn stripe_average() {
        let eps = 0.01;
        let grid = Grid::new_2d(100, 20, 1.0, 0.2).unwrap();
        let phi = well_prepared_initial(&Geometry::Stripe { position: 0.3 }, &ch_spec(eps), grid).unwrap();
        assert!((phi.average() - (2.0 * 0.3 - 1.0)).abs() < 2.0 * eps);
    }

    #[test]
    fn clearance_violation() {
        let grid = Grid::new_2d(64, 64, 1.0, 1.0).unwrap();
        let geom = Geometry::Circle { center: (0.5, 0.5), radius: 0.45 };
        assert!(matches!(
            well_prepared_initial(&geom, &ch_spec(0.02), grid),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn plan_rules() {
        let plan = SweepPlan::new(ch_spec(0.1).with_horizon(2e-3).unwrap(), vec![0.08, 0.04], Geometry::Stripe {
            position: 0.5,
        });
        assert_eq!(plan.cells(0.08), (75, 75));
        assert_eq!(plan.cells(0.04), (150, 150));
        let (dt, n) = plan.time_steps(0.04);
        assert_eq!(n, 63);
        assert!((dt * n as f64 - 2e-3).abs() < 1e-15);
        assert!(dt <= 0.5 * 0.04f64.powi(3));
        let mut bad = plan.clone();
        bad.epsilons = vec![0.04, 0.08];
        assert!(bad.validate().is_err());
        bad.epsilons = vec![0.08];
        bad.cells_per_eps = 4.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pure_phase_sweep() {
        let mut plan = SweepPlan::new(ch_spec(0.1).with_horizon(1e-3).unwrap(), vec![0.1], Geometry::Circles(vec![]));
        plan.sigma0 = 0.0;
        let report = run_sweep(&plan).unwrap();
        let row = &report.runs[0].row;
        assert!(row.w_distance < 1e-20);
        assert!(row.interface_length.is_none());
        assert!(row.gibbs_thomson.is_none());
        assert_eq!(row.critical_time, 0.0);
    }

    #[test]
    fn failing_run_reports_epsilon() {
        // Clearance 0.21 suffices for ε = 0.04 but not for ε = 0.05.
        let geom = Geometry::Circle { center: (0.5, 0.5), radius: 0.29 };
        let plan = SweepPlan::new(ch_spec(0.1).with_horizon(1e-4).unwrap(), vec![0.05, 0.04], geom);
        let err = run_sweep(&plan).unwrap_err();
        assert_eq!(err.epsilon, 0.05);
        assert!(matches!(err.error, Error::Geometry(_)));
        assert_eq!(err.partial.runs.len(), 1);
        assert_eq!(err.partial.runs[0].row.epsilon, 0.04);
    }

    #[test]
    fn perturbation_is_seeded() {
        let g = Grid::new_1d(16, 1.0).unwrap();
        let f = Field::zeros(g);
        assert_eq!(perturb(&f, 0.0, 1), f);
        let a = perturb(&f, 0.1, 42);
        assert_eq!(a, perturb(&f, 0.1, 42));
        assert_ne!(a, perturb(&f, 0.1, 43));
        assert!(a.max() <= 0.1 && a.min() >= -0.1);
    }

    #[test]
    fn orders() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        assert!((convergence_order(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((convergence_order(&xs, &sq).unwrap() - 2.0).abs() < 1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let noisy: Vec<f64> = xs.iter().map(|x| x * (1.0 + rng.gen_range(-0.05..0.05))).collect();
            assert!((convergence_order(&xs, &noisy).unwrap() - 1.0).abs() < 0.2);
        }
        assert!(convergence_order(&xs[..2], &xs[..2]).is_err());
        assert!(convergence_order(&[1.0, -1.0, 2.0], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn w_table_reaches_two_theta() {
        let t = WTable::new(&Potential::quartic(), -1.0, 1.0).unwrap();
        assert!((t.eval(1.0) - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-9);
    }
}
