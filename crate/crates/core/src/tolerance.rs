use serde::{Deserialize, Serialize};

/// Numerical thresholds for the floating-point path. Exact rational
/// computations ignore them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Smallest admissible eigenvalue is `-psd`.
    pub psd: f64,
    /// Eigenvalues and Schur pivots above this count towards the rank.
    pub rank: f64,
    /// Slack allowed above the 1/2 cosine cap.
    pub cosine_cap: f64,
    /// Distance within which a lifted cosine is snapped onto a discrete set value.
    pub snap: f64,
    /// Slack in the unit-norm condition on candidate heads.
    pub unit_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            rank: 1e-7,
            cosine_cap: 1e-9,
            snap: 1e-7,
            unit_norm: 1e-7,
        }
    }
}
