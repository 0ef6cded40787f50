//! Scalar and geometric diagnostics of diffuse-interface states.

mod energy;
mod interface;
mod limit;
mod stress;
mod trace;

pub use energy::{discrepancy_positive, energy, mu_average_check, well_distance};
pub use interface::{extract_interface, gibbs_thomson_residual, InterfaceCurve, Polyline};
pub use limit::{critical_time, holder_quotient, qc_measure, w_distance_to_limit, w_field, HolderNorm};
pub use stress::stress_tensor_residual;
pub use trace::{energy_balance_residual, DiagnosticsTrace, TraceRecorder};
