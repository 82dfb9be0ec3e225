//! Scalar matrix kernels: the complex matrix type, eigenvalues and singular
//! values, induced norms (including ellipsoidal ones), Cholesky, and the
//! Gelfand/trace estimators.

mod eigen;
mod estimate;
mod matrix;
mod norm;

pub use eigen::{
    dominant_eigenpair, eigenvalues, eigenvector_for, normalize_phase, sigma1, singular_values_of,
    spectral_radius,
};
pub use estimate::{
    gelfand_estimate, is_row_stochastic, power_bounded_probe, trace_estimate, PowerBound,
    DEFAULT_PROBE_CAP, DEFAULT_PROBE_HORIZON,
};
pub use matrix::ComplexMatrix;
pub use norm::{cholesky, ellipsoidal_norm_via_spectrum, operator_norm, EllipsoidalShape, NormKind};

#[cfg(test)]
pub(crate) use matrix::c;
pub(crate) use matrix::ZERO;
pub(crate) use norm::row_sum_norm;

/// Default relative tolerance for comparisons.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor paired with [`REL_TOL`].
pub const ABS_FLOOR: f64 = 1e-12;

/// `a ≤ b` up to the default relative tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()) + ABS_FLOOR
}

/// `|a - b|` within the default relative tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) + ABS_FLOOR
}
