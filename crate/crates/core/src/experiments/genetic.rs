use super::curve::{CurveRow, CurveSeries};
use crate::model::OffspringLaw;
use crate::rates::{genetic_rate, genetic_residual};
use crate::{Error, Result};

/// Outcome of [`genetic_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneticScan {
    /// Rows of the initial grid.
    pub series: CurveSeries,
    pub argmin: f64,
    pub min_value: f64,
    /// Fixed-point residual at the argmin.
    pub residual: f64,
    /// Width of the bracket around the argmin after each refinement round.
    pub brackets: Vec<f64>,
}

const REFINE_POINTS: usize = 11;
const REFINE_WIDTH: f64 = 1e-10;
const REFINE_ROUNDS: usize = 60;

/// Rate of the type ratio on `x_grid`, then repeated regridding around the
/// argmin until the bracket is narrower than `1e-10`.
pub fn genetic_scan(
    p_a: &OffspringLaw,
    p_b: &OffspringLaw,
    p: f64,
    eta: f64,
    n_max: usize,
    x_grid: &[f64],
) -> Result<GeneticScan> {
    if x_grid.len() < 3 {
        return Err(Error::InvalidArgument("the scan grid needs at least three points".into()));
    }
    let rate = |x: f64| -> (f64, String) {
        match genetic_rate(x, p_a, p_b, p, n_max) {
            Ok((r, _)) if r.is_finite() => (r.value, String::new()),
            Ok((r, _)) => (r.value, r.reason.code().to_string()),
            Err(e) => (f64::NAN, e.reason_code().to_string()),
        }
    };
    let mut grid: Vec<f64> = x_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &x in &grid {
        let (v, note) = rate(x);
        rows.push(CurveRow::new(x, v).with_note(note));
        values.push(v);
    }
    let series = CurveSeries::new("genetic_rate", rows);
    let mut brackets = Vec::new();
    let (mut argmin, mut min_value) = (f64::NAN, f64::INFINITY);
    for _ in 0..REFINE_ROUNDS {
        let i = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::InvalidArgument("no grid point has a finite rate".into()))?;
        argmin = grid[i];
        min_value = values[i];
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        brackets.push(hi - lo);
        if hi - lo < REFINE_WIDTH {
            break;
        }
        grid = (0..REFINE_POINTS).map(|j| lo + (hi - lo) * j as f64 / (REFINE_POINTS - 1) as f64).collect();
        values = grid.iter().map(|&x| rate(x).0).collect();
    }
    Ok(GeneticScan { series, argmin, min_value, residual: genetic_residual(argmin, eta, p), brackets })
}
