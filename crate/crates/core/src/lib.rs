//! Diffuse-interface tumor growth models and their sharp-interface limit.
//!
//! Two Cahn–Hilliard / nutrient systems are simulated on a rectangle with
//! homogeneous Neumann conditions:
//!
//! * Problem P: sources `P(φ)(σ − μ)` and `−P(φ)(σ − μ)`,
//! * Problem H: sources `(σ − 1)H(φ)` and `−σH(φ)`.
//!
//! The crate is organised as
//!
//! * [`model`]: nonlinearities `F`, `P`, `H`, the surface tension `θ`, the
//!   primitive `W` and sampling-based hypothesis checks,
//! * [`grid`]: cell-centred Neumann grid calculus and fast/iterative solves,
//! * [`solver`]: the linearly implicit stabilized time stepper,
//! * [`diagnostics`]: energies, balances, discrepancy, interface geometry,
//! * [`sweep`]: ε-sweep orchestration and convergence reports,
//! * [`io`]: the binary snapshot format and CSV writers.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use model::{Interpolation, ModelSpec, Potential, Problem, Proliferation};
pub use solver::{State, StepConfig};
