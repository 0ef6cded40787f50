//! The `run`, `sweep`, `check` and `diag` subcommands.

use crate::config::{ConfigError, RunConfig};
use pftg::diagnostics::{
    discrepancy_positive, energy, extract_interface, gibbs_thomson_residual, holder_quotient, mu_average_check,
    qc_measure, stress_tensor_residual, w_distance_to_limit, well_distance, HolderNorm,
};
use pftg::io::{fmt_f64, load_snapshot, save_snapshot, write_sweep_csv, write_trace_csv, TraceCsvWriter};
use pftg::model::{check_assumptions, mass_bound_ass1, mass_bound_ass2, precheck_global_time, GlobalTimeCheck};
use pftg::model::GrowthConstants;
use pftg::solver::{run, DiagnosticsHooks};
use pftg::sweep::{perturb, run_sweep, well_prepared_initial_with_clearance};
use pftg::{Error, Field, Grid, Problem, State};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Sampling used by `check`.
pub const CHECK_RANGE: (f64, f64) = (-3.0, 3.0);
pub const CHECK_SAMPLES: usize = 10_001;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Hypothesis or input validation failure.
    #[error("{0}")]
    Validation(String),
    /// The solver aborted.
    #[error("{0}")]
    Solver(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        classify(e, "")
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

fn classify(e: Error, context: &str) -> CliError {
    let msg = if context.is_empty() { e.to_string() } else { format!("{context}: {e}") };
    match e {
        Error::Run { .. }
        | Error::BlowUp { .. }
        | Error::StepFailed { .. }
        | Error::NotConverged { .. }
        | Error::MaximumPrinciple { .. } => CliError::Solver(msg),
        Error::Io(_) | Error::Format(_) => CliError::Other(anyhow::anyhow!(msg)),
        _ => CliError::Validation(msg),
    }
}

pub type CliResult = Result<(), CliError>;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Other(anyhow::anyhow!("cannot create {}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Other(anyhow::anyhow!("cannot create {}: {e}", path.display())))
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:08}.pftg")
}

fn initial_state(cfg: &RunConfig, eps: f64, grid: Grid) -> Result<State, CliError> {
    let spec = cfg.spec(eps)?;
    let phi = well_prepared_initial_with_clearance(&cfg.geometry(), &spec, grid, cfg.sweep.clearance)?;
    let phi = perturb(&phi, cfg.sweep.noise, cfg.output.seed);
    Ok(State::initial(phi, Field::constant(grid, cfg.sigma0()), &spec)?)
}

/// Single run at `model.epsilon`: `trace.csv`, snapshots and the resolved
/// configuration go to the output directory.
pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let eps = cfg.model.epsilon;
    let spec = cfg.spec(eps)?;
    let grid = cfg.grid(eps)?;
    let (dt, steps) = cfg.time_steps(eps);
    let step_cfg = cfg.step_config(dt);
    step_cfg.validate()?;
    let initial = initial_state(cfg, eps, grid)?;

    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    fs::write(dir.join("config.resolved"), cfg.to_string())?;
    let mut csv = TraceCsvWriter::new(create(&dir.join("trace.csv"))?)?;
    let stride = if cfg.output.stride == 0 { steps } else { cfg.output.stride };
    let snap_dir = dir.clone();
    let hooks = DiagnosticsHooks::default()
        .with_trace_stride(cfg.output.trace_stride)
        .observe(stride, move |k, st| save_snapshot(snap_dir.join(snapshot_name(k)), st, eps))
        .on_trace_row(|tr| csv.sync(tr));
    let traj = run(initial, &spec, &step_cfg, steps, hooks).map_err(|e| classify(e, "run aborted"))?;
    let tr = &traj.trace;
    writeln!(
        out,
        "run: problem {} epsilon {eps} grid {}x{} dt {dt:e} steps {steps}",
        spec.problem(),
        grid.nx(),
        grid.ny()
    )?;
    writeln!(
        out,
        "final t = {:e}  E = {:.10e}  max |balance residual| = {:.3e}  mass drift = {:.3e}",
        traj.final_state.t,
        tr.energy.last().copied().unwrap_or(f64::NAN),
        tr.max_balance_residual(),
        tr.mass_drift()
    )?;
    writeln!(out, "output written to {}", dir.display())?;
    Ok(())
}

fn eps_dir(root: &Path, eps: f64) -> PathBuf {
    root.join(format!("eps_{eps}"))
}

/// ε-sweep: one directory per ε plus `sweep_report.csv`.
pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let plan = cfg.sweep_plan()?;
    let dir = cfg.output.dir.clone();
    create_dir(&dir)?;
    fs::write(dir.join("config.resolved"), cfg.to_string())?;
    let (report, failure) = match run_sweep(&plan) {
        Ok(r) => (r, None),
        Err(f) => {
            let msg = format!("sweep aborted at epsilon = {}: {}", f.epsilon, f.error);
            let err = match classify(f.error, "") {
                CliError::Solver(_) => CliError::Solver(msg),
                CliError::Other(_) => CliError::Other(anyhow::anyhow!(msg)),
                _ => CliError::Validation(msg),
            };
            (f.partial, Some(err))
        }
    };
    for r in &report.runs {
        let d = eps_dir(&dir, r.row.epsilon);
        create_dir(&d)?;
        write_trace_csv(create(&d.join("trace.csv"))?, &r.trace)?;
        save_snapshot(d.join("final.pftg"), &r.final_state, r.row.epsilon)?;
    }
    write_sweep_csv(create(&dir.join("sweep_report.csv"))?, &report)?;
    writeln!(out, "{:>10} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "epsilon", "n", "w_dist", "gibbs_th", "E/2thetaL", "disc/E", "T_cr")?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:12.5e}")).unwrap_or_else(|| format!("{:>12}", "-"));
    for r in report.rows() {
        writeln!(
            out,
            "{:>10} {:>6} {:12.5e} {} {} {:12.5e} {:12.5e}",
            r.epsilon,
            r.nx,
            r.w_distance,
            opt(r.gibbs_thomson),
            opt(r.energy_perimeter_ratio),
            r.max_discrepancy_ratio,
            r.critical_time
        )?;
    }
    if let Some(o) = report.w_distance_order() {
        writeln!(out, "fitted order of w-distance in epsilon: {o:.3}")?;
    }
    if let Some(o) = report.discrepancy_order() {
        writeln!(out, "fitted order of max discrepancy ratio in epsilon: {o:.3}")?;
    }
    writeln!(out, "report written to {}", dir.join("sweep_report.csv").display())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Prints the hypothesis report and, for Problem P, the smallness
/// conditions on the configured initial data. Fails on any hypothesis
/// failure.
pub fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let eps = cfg.model.epsilon;
    let spec = cfg.spec(eps)?;
    let report = check_assumptions(&spec, CHECK_RANGE, CHECK_SAMPLES)?;
    writeln!(out, "hypotheses for Problem {} at epsilon = {eps}:", spec.problem())?;
    write!(out, "{report}")?;
    if spec.problem() == Problem::P {
        let global = cfg.grid(eps).map_err(CliError::from).and_then(|g| initial_state(cfg, eps, g));
        match (global, GrowthConstants::from_spec(&spec)) {
            (Ok(st), Some(k)) => {
                let omega = st.phi.grid().measure();
                let e0 = energy(&st.phi, &spec) + 0.5 * st.sigma.dot(&st.sigma);
                let c0 = st.phi.average().abs();
                let d0 = (st.phi.average() + st.sigma.average()).abs();
                match precheck_global_time(spec.horizon, e0, c0, Some(d0), omega, k) {
                    Ok(GlobalTimeCheck::Ass1Holds) => writeln!(
                        out,
                        "global time: first smallness condition holds, |[phi]| <= {:.6} up to T = {}",
                        mass_bound_ass1(spec.horizon, e0, c0, omega, k),
                        spec.horizon
                    )?,
                    Ok(GlobalTimeCheck::Ass2Holds) => writeln!(
                        out,
                        "global time: second smallness condition holds, |[phi]| <= {:.6}",
                        mass_bound_ass2(d0, e0, omega)
                    )?,
                    Ok(GlobalTimeCheck::NeitherHolds) => {
                        writeln!(out, "global time: neither smallness condition holds (E0 = {e0:.6}, c0 = {c0:.6})")?
                    }
                    Err(e) => writeln!(out, "global time: not applicable ({e})")?,
                }
            }
            (Err(e), _) => writeln!(out, "global time: initial data unavailable ({e})")?,
            (_, None) => {}
        }
    }
    if report.all_passed() {
        writeln!(out, "all hypotheses hold")?;
        Ok(())
    } else {
        let ids: Vec<&str> = report.failures().map(|c| c.id).collect();
        Err(CliError::Validation(format!("hypotheses fail: {}", ids.join(", "))))
    }
}

pub const DIAG_COLUMNS: [&str; 17] = [
    "file",
    "t",
    "epsilon",
    "E",
    "half_sigma_l2",
    "mass_phi",
    "mass_sigma",
    "mass_sum",
    "disc_pos",
    "mu_avg",
    "mu_bound_rhs",
    "qc_measure",
    "w_distance",
    "well_distance",
    "stress_residual",
    "interface_length",
    "gibbs_thomson",
];

/// Recomputes diagnostics from snapshot files; the model comes from `cfg`
/// and ε and the grid from each snapshot.
pub fn cmd_diag(cfg: &RunConfig, paths: &[PathBuf], out: &mut dyn Write) -> CliResult {
    if paths.is_empty() {
        return Err(CliError::Validation("diag needs at least one snapshot path".into()));
    }
    writeln!(out, "{}", DIAG_COLUMNS.join(","))?;
    let mut series = Vec::new();
    for path in paths {
        let snap = load_snapshot(path).map_err(|e| classify(e, &path.display().to_string()))?;
        let st = &snap.state;
        let g = st.phi.grid();
        let spec = cfg.spec(snap.epsilon)?.with_domain(g.lx(), g.ly())?;
        let e = energy(&st.phi, &spec);
        let mu_rhs = match mu_average_check(st, &spec) {
            Ok((_, rhs)) => fmt_f64(rhs),
            Err(_) => String::new(),
        };
        let (length, gt) = if g.dim() == 2 {
            match extract_interface(&st.phi) {
                Ok(c) => (
                    fmt_f64(c.length()),
                    gibbs_thomson_residual(&c, &st.mu, spec.theta()).map(fmt_f64).unwrap_or_default(),
                ),
                Err(_) => (String::new(), String::new()),
            }
        } else {
            (String::new(), String::new())
        };
        let fields = [
            path.display().to_string(),
            fmt_f64(st.t),
            fmt_f64(snap.epsilon),
            fmt_f64(e),
            fmt_f64(0.5 * st.sigma.dot(&st.sigma)),
            fmt_f64(st.phi.average()),
            fmt_f64(st.sigma.average()),
            fmt_f64(
                st.phi.values().iter().zip(st.sigma.values()).map(|(p, s)| p + s).sum::<f64>()
                    / st.phi.values().len() as f64,
            ),
            fmt_f64(discrepancy_positive(&st.phi, &spec)),
            fmt_f64(st.mu.average()),
            mu_rhs,
            fmt_f64(qc_measure(&st.phi)),
            fmt_f64(w_distance_to_limit(&st.phi, &spec)?),
            fmt_f64(well_distance(&st.phi)),
            fmt_f64(stress_tensor_residual(st, &spec, 9)),
            length,
            gt,
        ];
        writeln!(out, "{}", fields.join(","))?;
        series.push((st.t, st.phi.clone()));
    }
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    let same_grid = series.windows(2).all(|w| w[0].1.grid() == w[1].1.grid());
    if series.len() >= 2 && same_grid {
        let chi: Vec<(f64, Field)> = series
            .iter()
            .map(|(t, p)| (*t, p.map(|v| if v > 0.0 { 1.0 } else { 0.0 })))
            .collect();
        writeln!(out, "# holder_chi_l1_1/8 = {}", fmt_f64(holder_quotient(&chi, 0.125, HolderNorm::L1)?))?;
        writeln!(out, "# holder_phi_l2_1/16 = {}", fmt_f64(holder_quotient(&series, 0.0625, HolderNorm::L2)?))?;
    }
    Ok(())
}
