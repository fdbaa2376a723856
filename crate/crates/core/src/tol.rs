//! Numerical tolerances shared by validators and tests.

/// Propagation residual for spinors obtained by exact enumeration.
pub const PROPAGATION_EXACT: f64 = 1e-12;
/// Propagation residual accepted before integrating a spinor into an embedding
/// (relative to the sup-norm of the spinor).
pub const PROPAGATION_BUILD: f64 = 1e-9;
/// Relative alternating edge-length sum of a tangential quad.
pub const ALTERNATING_SUM: f64 = 1e-10;
/// Support-line residual of an incircle, relative to the quad diameter.
pub const SUPPORT_LINE: f64 = 1e-9;
/// Recovered Ising angle versus the input angle.
pub const THETA_ROUNDTRIP: f64 = 1e-10;
/// A quad is degenerate when its incircle radius is below this fraction of the
/// domain diameter.
pub const DEGENERATE_RADIUS: f64 = 1e-12;
/// Closure of integrated increments around a face, relative to local scale.
pub const CLOSURE: f64 = 1e-9;
/// s-holomorphicity and conversion round trips, relative to the sup-norm.
pub const SHOL: f64 = 1e-10;
/// Default cap on the cycle rank |E| - |V| + 1 for exact enumeration.
pub const ENUMERATION_CAP: usize = 24;
/// Circle packing angle-sum residual.
pub const PACKING: f64 = 1e-8;
