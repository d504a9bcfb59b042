//! Numerical parameters shared by every computation. A copy travels with
//! each report so results carry their tolerance provenance.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Hermitian eigensolver tolerance, also the PSD slack.
    pub eig_tol: f64,
    /// Kernel threshold relative to `max(1, ‖A‖)`.
    pub kernel_tol: f64,
    /// Convergence tolerance; window agreement uses `10 · tol`.
    pub tol: f64,
    /// Rounding allowance when checking `‖T‖ ≤ 1`.
    pub op_norm_slack: f64,
    /// Allowed leakage across an invariant split.
    pub split_tol: f64,
    /// Smallest admissible `γ(A)/‖A‖` for building an intertwiner.
    pub gamma_floor: f64,
    /// Power budget N for profiles and sliding windows.
    pub power_budget: u64,
    /// Number of window offsets `0, N/8, 2N/8, ...`.
    pub window_count: usize,
    /// log₂ of the pre-smoothing average length.
    pub smoothing_log2: u32,
    /// Largest log₂ smoothing length tried when windows disagree.
    pub smoothing_log2_max: u32,
    /// How many times the pre-smoothing average is applied.
    pub smoothing_order: u32,
    pub max_iter: usize,
    /// log₂ of the horizon used to confirm that kernel vectors decay.
    pub orbit_log2: u32,
    pub orbit_decay_tol: f64,
    /// Random vectors per sampled check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            eig_tol: 1e-12,
            kernel_tol: 1e-10,
            tol: 1e-10,
            op_norm_slack: 1e-10,
            split_tol: 1e-8,
            gamma_floor: 1e-8,
            power_budget: 4096,
            window_count: 4,
            smoothing_log2: 14,
            smoothing_log2_max: 20,
            smoothing_order: 8,
            max_iter: 100_000,
            orbit_log2: 16,
            orbit_decay_tol: 1e-4,
            samples: 32,
            seed: 0x5eed,
        }
    }
}
