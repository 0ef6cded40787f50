//! The nonlinearities of the two systems: double-well potential `F`,
//! proliferation `P` and interpolation `H`.

use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

/// Points on `[-1, 1]` used to locate `max F` there.
const MAX_SAMPLES: usize = 10_001;

/// Pointwise definition of a double-well potential.
#[derive(Clone)]
pub struct PotentialFns {
    pub eval: ScalarFn,
    pub deriv: ScalarFn,
    pub deriv2: ScalarFn,
    /// Derivative of the convex part `F_c`.
    pub convex_part_deriv: ScalarFn,
    /// Derivative of the bounded-curvature part `F_nc`.
    pub nonconvex_part_deriv: ScalarFn,
}

/// Growth constants attached to a potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialConstants {
    /// `p` in `F''(u) >= c |u|^(p-2)` for `|u| >= 1 - delta0`.
    pub growth_exponent: f64,
    pub delta0: f64,
    /// `c` in `F''(u) >= c |u|^(p-2)`.
    pub convexity: f64,
    /// `F(u) >= c_F |u|^p - C_F`.
    pub c_f: f64,
    pub big_c_f: f64,
    /// `F(u) >= c̄_F (|u| - 1)^2`.
    pub c_bar_f: f64,
}

/// Double-well potential vanishing at `±1`.
#[derive(Clone)]
pub struct Potential {
    name: String,
    fns: PotentialFns,
    constants: PotentialConstants,
    max_on_unit: f64,
}

impl Potential {
    pub fn new(name: impl Into<String>, fns: PotentialFns, constants: PotentialConstants) -> Self {
        let max_on_unit = (0..MAX_SAMPLES)
            .map(|k| -1.0 + 2.0 * k as f64 / (MAX_SAMPLES - 1) as f64)
            .map(|u| (fns.eval)(u))
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            name: name.into(),
            fns,
            constants,
            max_on_unit,
        }
    }

    /// `F(u) = ¼(1 − u²)²`.
    pub fn quartic() -> Self {
        Self::scaled_quartic(1.0)
    }

    /// `F(u) = k·¼(1 − u²)²`, split as `F_c = k(u⁴/4 + u²/2)`,
    /// `F_nc = k(¼ − u²)`.
    pub fn scaled_quartic(k: f64) -> Self {
        let fns = PotentialFns {
            eval: scalar(move |u| 0.25 * k * (1.0 - u * u).powi(2)),
            deriv: scalar(move |u| k * (u * u * u - u)),
            deriv2: scalar(move |u| k * (3.0 * u * u - 1.0)),
            convex_part_deriv: scalar(move |u| k * (u * u * u + u)),
            nonconvex_part_deriv: scalar(move |u| -2.0 * k * u),
        };
        // F'' = k(3u² − 1) >= 1.5k u² once |u| >= 0.9.
        // min_u (u⁴/8 − u²/2 + ¼) = −¼ at u² = 2.
        let constants = PotentialConstants {
            growth_exponent: 4.0,
            delta0: 0.1,
            convexity: 1.5 * k,
            c_f: k / 8.0,
            big_c_f: k / 4.0,
            c_bar_f: k / 4.0,
        };
        let name = if k == 1.0 {
            "quartic".to_string()
        } else {
            format!("quartic*{k}")
        };
        Self::new(name, fns, constants)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> &PotentialConstants {
        &self.constants
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.fns.eval)(u)
    }

    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        (self.fns.deriv)(u)
    }

    #[inline]
    pub fn deriv2(&self, u: f64) -> f64 {
        (self.fns.deriv2)(u)
    }

    #[inline]
    pub fn convex_part_deriv(&self, u: f64) -> f64 {
        (self.fns.convex_part_deriv)(u)
    }

    #[inline]
    pub fn nonconvex_part_deriv(&self, u: f64) -> f64 {
        (self.fns.nonconvex_part_deriv)(u)
    }

    /// `max F` over `[-1, 1]`, from dense sampling.
    pub fn max_on_unit_interval(&self) -> f64 {
        self.max_on_unit
    }

    /// Truncated potential `F̃(u) = F(u) ∧ (max_{[-1,1]} F + u²)`.
    #[inline]
    pub fn truncated(&self, u: f64) -> f64 {
        self.eval(u).min(self.max_on_unit + u * u)
    }

    /// Supremum of `F''` over `[lo, hi]` by sampling.
    pub fn sup_deriv2(&self, lo: f64, hi: f64) -> f64 {
        let n = 2001;
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .map(|u| self.deriv2(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("constants", &self.constants)
            .finish()
    }
}

/// Nonnegative proliferation function `P`.
#[derive(Clone)]
pub struct Proliferation {
    name: String,
    eval: ScalarFn,
    /// `r` in `|P'(u)| <= C(1 + |u|^(r-1))`.
    pub growth_exponent: f64,
    /// `P(u) <= C_P(1 + |u|^r)`.
    pub c_p: f64,
    /// `|P(u) − P(v)| <= C̄_P |u − v| (1 + |u|^(r-1) + |v|^(r-1))`.
    pub c_bar_p: f64,
}

impl Proliferation {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth_exponent: f64,
        c_p: f64,
        c_bar_p: f64,
    ) -> Self {
        Self {
            name: name.into(),
            eval: scalar(eval),
            growth_exponent,
            c_p,
            c_bar_p,
        }
    }

    /// `P(u) = λ₀(1 + u)⁺`.
    pub fn linear(lambda0: f64) -> Self {
        Self::new(
            format!("linear({lambda0})"),
            move |u| lambda0 * (1.0 + u).max(0.0),
            1.0,
            lambda0,
            lambda0,
        )
    }

    /// `P(u) = (1 − u²) ∨ λ₀(|u| − 1)`.
    pub fn quadratic(lambda0: f64) -> Self {
        let c = lambda0.max(2.0);
        Self::new(
            format!("quadratic({lambda0})"),
            move |u| (1.0 - u * u).max(lambda0 * (u.abs() - 1.0)),
            2.0,
            lambda0.max(1.0),
            c,
        )
    }

    /// `P ≡ 0`: the Cahn–Hilliard equation decouples from the nutrient.
    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, 1.0, 0.0, 0.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }
}

impl fmt::Debug for Proliferation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Proliferation")
            .field("name", &self.name)
            .field("r", &self.growth_exponent)
            .field("c_p", &self.c_p)
            .field("c_bar_p", &self.c_bar_p)
            .finish()
    }
}

/// Interpolation function `H: ℝ → [0, 1]`.
#[derive(Clone)]
pub struct Interpolation {
    name: String,
    eval: ScalarFn,
    pub lipschitz_constant: f64,
    /// Declared `C_H` in `H(u) <= C_H F(u)/|F'(u)|` wherever `F'(u) < 0`.
    pub technical_constant: Option<f64>,
}

impl Interpolation {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lipschitz_constant: f64,
        technical_constant: Option<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            eval: scalar(eval),
            lipschitz_constant,
            technical_constant,
        }
    }

    /// `H(u) = ((1 − u²)⁺)³`. Against the quartic well (of any scale)
    /// `H|F'|/F = 4u(1 − u²)²` on `(0, 1)`, whose maximum is `0.2862·4`.
    pub fn smooth() -> Self {
        Self::new(
            "smooth",
            |u| (1.0 - u * u).max(0.0).powi(3),
            1.72,
            Some(1.2),
        )
    }

    /// `H(u) = 1 ∧ ((1 + u)/2)⁺`. Has `H(1) = 1`, so no `C_H` exists.
    pub fn prototype() -> Self {
        Self::new("prototype", |u| ((1.0 + u) / 2.0).clamp(0.0, 1.0), 0.5, None)
    }

    /// `H ≡ 1`. Test-only: decouples the nutrient into `σ' = Δσ − σ`.
    pub fn constant_one() -> Self {
        Self::new("constant", |_| 1.0, 0.0, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }
}

impl fmt::Debug for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interpolation")
            .field("name", &self.name)
            .field("lipschitz_constant", &self.lipschitz_constant)
            .field("technical_constant", &self.technical_constant)
            .finish()
    }
}
