use super::curve::{CurveRow, CurveSeries};
use crate::empirical::GenMeasureK;
use crate::model::OffspringKernel;
use crate::rates::kgen_rate_jk;
use crate::Result;

/// `(k, J_k(mu o pi_k^{-1}))` for `k = 1..=mu.k()`; rows where the projection
/// is not shift-invariant are flagged.
pub fn jk_monotonicity(mu: &GenMeasureK, kernel: &OffspringKernel, tol: f64) -> Result<CurveSeries> {
    let mut rows = Vec::new();
    for k in 1..=mu.k() {
        let r = kgen_rate_jk(&mu.project(k)?, kernel, tol)?;
        let mut row = CurveRow::new(k as f64, r.value);
        if !r.is_finite() {
            row = row.with_note(r.reason.code());
        }
        rows.push(row);
    }
    Ok(CurveSeries::new("jk_ladder", rows))
}

/// Whether the values never drop by more than `slack`.
pub fn is_nondecreasing(series: &CurveSeries, slack: f64) -> bool {
    series.values().windows(2).all(|w| w[0] <= w[1] + slack)
}
