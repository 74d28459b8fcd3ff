use serde::{Deserialize, Serialize};

/// Comparison thresholds threaded through every check in the crate.
///
/// `eq_tol` decides approximate equality of operators, `pos_tol` decides
/// entrywise positivity, `norm_iters` caps the power iteration. Exact
/// arithmetic ignores the thresholds where it can (equal means equal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub pos_tol: f64,
    pub norm_iters: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eq_tol: 1e-10,
            pos_tol: 1e-12,
            norm_iters: 200,
        }
    }
}
