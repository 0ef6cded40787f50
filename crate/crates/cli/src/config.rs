//! `key = value` configuration files with `[section]` headers and `#`
//! comments.
//!
//! Every key has a default; see [`RunConfig::default`] and the README.

use pftg::model::Coupling;
use pftg::sweep::{Geometry, SweepPlan, DEFAULT_CLEARANCE};
use pftg::{Grid, Interpolation, ModelSpec, Potential, Problem, Proliferation, StepConfig};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProliferationKind {
    Linear,
    Quadratic,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterpolationKind {
    Smooth,
    Prototype,
    /// `H ≡ 1`, for testing only.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    Circle,
    Stripe,
    Circles,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub problem: Problem,
    pub epsilon: f64,
    pub potential_scale: f64,
    pub proliferation: ProliferationKind,
    pub lambda0: f64,
    pub interpolation: InterpolationKind,
    pub technical_constant: Option<f64>,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub lx: f64,
    pub ly: f64,
    pub h_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub c_dt: f64,
    pub stabilization: f64,
    pub fixed_point_tol: f64,
    pub max_inner_iterations: usize,
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    pub epsilons: Option<Vec<f64>>,
    pub geometry: GeometryKind,
    pub center: (f64, f64),
    pub radius: f64,
    pub position: f64,
    pub circles: Vec<((f64, f64), f64)>,
    pub sigma0: Option<f64>,
    /// Amplitude of seeded uniform noise added to the initial `φ`.
    pub noise: f64,
    /// Minimum interface distance from the boundary, in units of ε.
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Snapshot every `stride` steps; 0 keeps only the first and last.
    pub stride: usize,
    pub trace_stride: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSection {
                problem: Problem::P,
                epsilon: 0.04,
                potential_scale: 1.0,
                proliferation: ProliferationKind::Linear,
                lambda0: 1.0,
                interpolation: InterpolationKind::Smooth,
                technical_constant: None,
                horizon: 2e-3,
            },
            grid: GridSection {
                dim: 2,
                nx: None,
                ny: None,
                lx: 1.0,
                ly: 1.0,
                h_ratio: SweepPlan::MIN_CELLS_PER_EPS,
            },
            time: TimeSection {
                dt: None,
                c_dt: 0.5,
                stabilization: StepConfig::DEFAULT_STABILIZATION,
                fixed_point_tol: 1e-10,
                max_inner_iterations: 200,
                steps: None,
            },
            sweep: SweepSection {
                epsilons: None,
                geometry: GeometryKind::Circle,
                center: (0.5, 0.5),
                radius: 0.25,
                position: 0.5,
                circles: Vec::new(),
                sigma0: None,
                noise: 0.0,
                clearance: DEFAULT_CLEARANCE,
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
                stride: 0,
                trace_stride: 1,
                seed: 0,
            },
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{v}`"))
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("expected a nonnegative integer, got `{v}`"))
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| parse_f64(s.trim())).collect()
}

fn parse_pair(v: &str) -> Result<(f64, f64), String> {
    match parse_list(v)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected `x, y`, got `{v}`")),
    }
}

fn positive(key: &str, x: f64) -> Result<f64, String> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{key} must be positive, got {x}"))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |message: String| ConfigError::Line { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                    .trim();
                if !["model", "grid", "time", "sweep", "output"].contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name.to_owned();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if section.is_empty() {
                return Err(err(format!("key `{key}` appears before any section")));
            }
            cfg.set(&section, key, value).map_err(|m| err(format!("{section}.{key}: {m}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), String> {
        let m = &mut self.model;
        let g = &mut self.grid;
        let t = &mut self.time;
        let s = &mut self.sweep;
        let o = &mut self.output;
        match (section, key) {
            ("model", "problem") => {
                m.problem = match v {
                    "P" | "p" => Problem::P,
                    "H" | "h" => Problem::H,
                    _ => return Err(format!("expected P or H, got `{v}`")),
                }
            }
            ("model", "epsilon") => m.epsilon = positive("epsilon", parse_f64(v)?)?,
            ("model", "potential") => {
                if v != "quartic" {
                    return Err(format!("only `quartic` is available, got `{v}`"));
                }
            }
            ("model", "potential_scale") => m.potential_scale = positive("potential_scale", parse_f64(v)?)?,
            ("model", "proliferation") => {
                m.proliferation = match v {
                    "linear" => ProliferationKind::Linear,
                    "quadratic" => ProliferationKind::Quadratic,
                    "zero" | "off" => ProliferationKind::Zero,
                    _ => return Err(format!("expected linear, quadratic or zero, got `{v}`")),
                }
            }
            ("model", "lambda0") => {
                let x = parse_f64(v)?;
                if x < 0.0 {
                    return Err(format!("lambda0 must be nonnegative, got {x}"));
                }
                m.lambda0 = x;
            }
            ("model", "interpolation") => {
                m.interpolation = match v {
                    "smooth" => InterpolationKind::Smooth,
                    "prototype" => InterpolationKind::Prototype,
                    "constant" => InterpolationKind::Constant,
                    _ => return Err(format!("expected smooth, prototype or constant, got `{v}`")),
                }
            }
            ("model", "technical_constant") => {
                m.technical_constant = Some(positive("technical_constant", parse_f64(v)?)?)
            }
            ("model", "horizon") => m.horizon = positive("horizon", parse_f64(v)?)?,
            ("grid", "dim") => {
                g.dim = match parse_usize(v)? {
                    d @ (1 | 2) => d,
                    d => return Err(format!("dim must be 1 or 2, got {d}")),
                }
            }
            ("grid", "nx") => g.nx = Some(parse_usize(v)?),
            ("grid", "ny") => g.ny = Some(parse_usize(v)?),
            ("grid", "lx") => g.lx = positive("lx", parse_f64(v)?)?,
            ("grid", "ly") => g.ly = positive("ly", parse_f64(v)?)?,
            ("grid", "h_ratio") => {
                let x = parse_f64(v)?;
                if x < SweepPlan::MIN_CELLS_PER_EPS {
                    return Err(format!("h_ratio must be at least 6, got {x}"));
                }
                g.h_ratio = x;
            }
            ("time", "dt") => t.dt = Some(positive("dt", parse_f64(v)?)?),
            ("time", "c_dt") => t.c_dt = positive("c_dt", parse_f64(v)?)?,
            ("time", "stabilization") => {
                let x = parse_f64(v)?;
                if x < 0.0 {
                    return Err(format!("stabilization must be nonnegative, got {x}"));
                }
                t.stabilization = x;
            }
            ("time", "fixed_point_tol") => t.fixed_point_tol = positive("fixed_point_tol", parse_f64(v)?)?,
            ("time", "max_inner_iterations") => {
                t.max_inner_iterations = match parse_usize(v)? {
                    0 => return Err("max_inner_iterations must be positive".into()),
                    n => n,
                }
            }
            ("time", "steps") => {
                t.steps = match parse_usize(v)? {
                    0 => return Err("steps must be positive".into()),
                    n => Some(n),
                }
            }
            ("sweep", "epsilons") => {
                let list = parse_list(v)?;
                if list.iter().any(|e| *e <= 0.0) {
                    return Err("epsilons must be positive".into());
                }
                if list.windows(2).any(|w| w[1] >= w[0]) {
                    return Err("epsilons must be strictly decreasing".into());
                }
                s.epsilons = Some(list);
            }
            ("sweep", "geometry") => {
                s.geometry = match v {
                    "circle" => GeometryKind::Circle,
                    "stripe" => GeometryKind::Stripe,
                    "circles" => GeometryKind::Circles,
                    _ => return Err(format!("expected circle, stripe or circles, got `{v}`")),
                }
            }
            ("sweep", "center") => s.center = parse_pair(v)?,
            ("sweep", "radius") => s.radius = positive("radius", parse_f64(v)?)?,
            ("sweep", "position") => s.position = parse_f64(v)?,
            ("sweep", "circles") => {
                s.circles = v
                    .split(';')
                    .filter(|c| !c.trim().is_empty())
                    .map(|c| match parse_list(c)?.as_slice() {
                        [x, y, r] if *r > 0.0 => Ok(((*x, *y), *r)),
                        _ => Err(format!("expected `x, y, r` with r > 0, got `{}`", c.trim())),
                    })
                    .collect::<Result<_, _>>()?;
            }
            ("sweep", "sigma0") => {
                let x = parse_f64(v)?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(format!("sigma0 must lie in [0, 1], got {x}"));
                }
                s.sigma0 = Some(x);
            }
            ("sweep", "noise") => {
                let x = parse_f64(v)?;
                if x < 0.0 {
                    return Err(format!("noise must be nonnegative, got {x}"));
                }
                s.noise = x;
            }
            ("sweep", "clearance") => {
                let x = parse_f64(v)?;
                if !(x > 0.0) {
                    return Err(format!("clearance must be positive, got {x}"));
                }
                s.clearance = x;
            }
            ("output", "dir") => o.dir = PathBuf::from(v),
            ("output", "stride") => o.stride = parse_usize(v)?,
            ("output", "trace_stride") => {
                o.trace_stride = match parse_usize(v)? {
                    0 => return Err("trace_stride must be positive".into()),
                    n => n,
                }
            }
            ("output", "seed") => o.seed = v.parse().map_err(|_| format!("expected an unsigned integer, got `{v}`"))?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Cross-key constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.grid.dim == 1 && self.grid.ny.is_some_and(|n| n != 1) {
            return bad("grid.ny must be 1 (or unset) in 1D".into());
        }
        if self.model.problem == Problem::H && self.sweep.sigma0.is_some_and(|s| s > 1.0) {
            return bad("sweep.sigma0 must not exceed 1 for Problem H".into());
        }
        if self.sweep.geometry == GeometryKind::Circles && self.sweep.circles.is_empty() {
            return bad("sweep.circles must list at least one `x, y, r` when geometry = circles".into());
        }
        for eps in self.epsilons() {
            let (nx, ny) = self.cells(eps);
            if nx < 4 || (self.grid.dim == 2 && ny < 4) {
                return bad(format!("grid for epsilon = {eps} has fewer than 4 cells per direction"));
            }
        }
        Ok(())
    }

    /// The interface widths to run: the sweep list, or the single model ε.
    pub fn epsilons(&self) -> Vec<f64> {
        self.sweep.epsilons.clone().unwrap_or_else(|| vec![self.model.epsilon])
    }

    /// Cells per axis for `eps`: explicit `nx`/`ny`, else `ceil(L·ρ/ε)`.
    pub fn cells(&self, eps: f64) -> (usize, usize) {
        let rule = |l: f64| ((l * self.grid.h_ratio / eps) * (1.0 - 1e-12)).ceil() as usize;
        let nx = self.grid.nx.unwrap_or_else(|| rule(self.grid.lx));
        let ny = if self.grid.dim == 1 { 1 } else { self.grid.ny.unwrap_or_else(|| rule(self.grid.ly)) };
        (nx, ny)
    }

    pub fn grid(&self, eps: f64) -> pftg::Result<Grid> {
        let (nx, ny) = self.cells(eps);
        match self.grid.dim {
            1 => Grid::new_1d(nx, self.grid.lx),
            _ => Grid::new_2d(nx, ny, self.grid.lx, self.grid.ly),
        }
    }

    /// `(dt, steps)` for `eps`.
    pub fn time_steps(&self, eps: f64) -> (f64, usize) {
        let horizon = self.model.horizon;
        match (self.time.dt, self.time.steps) {
            (Some(dt), Some(n)) => (dt, n),
            (Some(dt), None) => (dt, ((horizon / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize),
            (None, Some(n)) => (horizon / n as f64, n),
            (None, None) => {
                let target = self.time.c_dt * eps.powi(3);
                let n = ((horizon / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                (horizon / n as f64, n)
            }
        }
    }

    pub fn sigma0(&self) -> f64 {
        self.sweep.sigma0.unwrap_or(match self.model.problem {
            Problem::P => 0.8,
            Problem::H => 1.0,
        })
    }

    pub fn potential(&self) -> Potential {
        if self.model.potential_scale == 1.0 {
            Potential::quartic()
        } else {
            Potential::scaled_quartic(self.model.potential_scale)
        }
    }

    pub fn coupling(&self) -> Coupling {
        let m = &self.model;
        match m.problem {
            Problem::P => Coupling::Proliferation(match m.proliferation {
                ProliferationKind::Linear => Proliferation::linear(m.lambda0),
                ProliferationKind::Quadratic => Proliferation::quadratic(m.lambda0),
                ProliferationKind::Zero => Proliferation::zero(),
            }),
            Problem::H => {
                let mut h = match m.interpolation {
                    InterpolationKind::Smooth => Interpolation::smooth(),
                    InterpolationKind::Prototype => Interpolation::prototype(),
                    InterpolationKind::Constant => Interpolation::constant_one(),
                };
                if m.technical_constant.is_some() {
                    h.technical_constant = m.technical_constant;
                }
                Coupling::Interpolation(h)
            }
        }
    }

    pub fn spec(&self, eps: f64) -> pftg::Result<ModelSpec> {
        ModelSpec::new(self.potential(), self.coupling(), eps)?
            .with_domain(self.grid.lx, self.grid.ly)?
            .with_horizon(self.model.horizon)
    }

    pub fn geometry(&self) -> Geometry {
        let s = &self.sweep;
        match s.geometry {
            GeometryKind::Circle => Geometry::Circle {
                center: s.center,
                radius: s.radius,
            },
            GeometryKind::Stripe => Geometry::Stripe { position: s.position },
            GeometryKind::Circles => Geometry::Circles(s.circles.clone()),
        }
    }

    pub fn step_config(&self, dt: f64) -> StepConfig {
        let mut c = StepConfig::new(dt).with_stabilization(self.time.stabilization);
        c.fixed_point_tol = self.time.fixed_point_tol;
        c.max_inner_iterations = self.time.max_inner_iterations;
        c
    }

    pub fn sweep_plan(&self) -> pftg::Result<SweepPlan> {
        let eps = self.epsilons();
        let mut plan = SweepPlan::new(self.spec(eps[0])?, eps, self.geometry());
        plan.dim = self.grid.dim;
        plan.sigma0 = self.sigma0();
        plan.cells_per_eps = self.grid.h_ratio;
        plan.c_dt = self.time.c_dt;
        plan.stabilization = self.time.stabilization;
        plan.trace_stride = self.output.trace_stride;
        plan.clearance = self.sweep.clearance;
        Ok(plan)
    }
}

fn fmt_opt<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "auto".into())
}

impl fmt::Display for RunConfig {
    /// Fully resolved configuration, followed by the per-ε grid and time
    /// step as comments.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.model;
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "[model]\nproblem = {}\nepsilon = {}\npotential = quartic", m.problem, m.epsilon);
        let _ = writeln!(w, "potential_scale = {}", m.potential_scale);
        let prolif = match m.proliferation {
            ProliferationKind::Linear => "linear",
            ProliferationKind::Quadratic => "quadratic",
            ProliferationKind::Zero => "zero",
        };
        let interp = match m.interpolation {
            InterpolationKind::Smooth => "smooth",
            InterpolationKind::Prototype => "prototype",
            InterpolationKind::Constant => "constant",
        };
        let _ = writeln!(w, "proliferation = {prolif}\nlambda0 = {}\ninterpolation = {interp}", m.lambda0);
        if let Some(c) = m.technical_constant {
            let _ = writeln!(w, "technical_constant = {c}");
        }
        let _ = writeln!(w, "horizon = {}", m.horizon);
        let g = &self.grid;
        let _ = writeln!(
            w,
            "\n[grid]\ndim = {}\nnx = {}\nny = {}\nlx = {}\nly = {}\nh_ratio = {}",
            g.dim,
            fmt_opt(&g.nx),
            fmt_opt(&g.ny),
            g.lx,
            g.ly,
            g.h_ratio
        );
        let t = &self.time;
        let _ = writeln!(
            w,
            "\n[time]\ndt = {}\nc_dt = {}\nstabilization = {}\nfixed_point_tol = {}\nmax_inner_iterations = {}\nsteps = {}",
            fmt_opt(&t.dt),
            t.c_dt,
            t.stabilization,
            t.fixed_point_tol,
            t.max_inner_iterations,
            fmt_opt(&t.steps)
        );
        let s = &self.sweep;
        let eps: Vec<String> = self.epsilons().iter().map(|e| e.to_string()).collect();
        let geom = match s.geometry {
            GeometryKind::Circle => "circle",
            GeometryKind::Stripe => "stripe",
            GeometryKind::Circles => "circles",
        };
        let circles: Vec<String> = s.circles.iter().map(|((x, y), r)| format!("{x}, {y}, {r}")).collect();
        let _ = writeln!(
            w,
            "\n[sweep]\nepsilons = {}\ngeometry = {geom}\ncenter = {}, {}\nradius = {}\nposition = {}",
            eps.join(", "),
            s.center.0,
            s.center.1,
            s.radius,
            s.position
        );
        if !circles.is_empty() {
            let _ = writeln!(w, "circles = {}", circles.join("; "));
        }
        let _ = writeln!(w, "sigma0 = {}\nnoise = {}\nclearance = {}", fmt_opt(&s.sigma0), s.noise, s.clearance);
        let o = &self.output;
        let _ = writeln!(
            w,
            "\n[output]\ndir = {}\nstride = {}\ntrace_stride = {}\nseed = {}",
            o.dir.display(),
            o.stride,
            o.trace_stride,
            o.seed
        );
        let _ = writeln!(w);
        for e in self.epsilons() {
            let (nx, ny) = self.cells(e);
            let (dt, n) = self.time_steps(e);
            let _ = writeln!(w, "# resolved: epsilon = {e} nx = {nx} ny = {ny} dt = {dt:e} steps = {n}");
        }
        f.write_str(&out)
    }
}
