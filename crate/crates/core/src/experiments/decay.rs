use super::curve::{CurveRow, CurveSeries};
use crate::exact::{admissible_set, size_law};
use crate::model::GWSpec;
use crate::{Error, Result};

/// `-(1/n) log P{|T| = n}` over the admissible sizes up to `n_max`, from the
/// exact size law. For a critical model this tends to zero.
pub fn decay_curve(spec: &GWSpec, n_max: usize) -> Result<CurveSeries> {
    if !spec.is_critical() {
        return Err(Error::Precondition { reason: "domain", detail: "decay curve needs a critical model".into() });
    }
    let table = size_law(spec, n_max)?;
    let adm = admissible_set(&table, spec.root_dist());
    let rows = (1..=n_max)
        .filter(|&n| adm.contains(n) == Some(true))
        .map(|n| CurveRow::new(n as f64, -table.log_total(spec.root_dist(), n) / n as f64))
        .collect();
    Ok(CurveSeries::new("size_decay", rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OffspringLaw;
    use crate::numeric::ln_binomial;

    #[test]
    fn binary_matches_catalan() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        let c = decay_curve(&spec, 201).unwrap();
        for r in c.rows() {
            // P{|T| = 2m + 1} = Catalan(m) / 2^(2m+1).
            let n = r.x as usize;
            let m = (n - 1) / 2;
            let log_p = ln_binomial(2 * m, m) - ((m + 1) as f64).ln() - n as f64 * 2f64.ln();
            assert!((r.value + log_p / n as f64).abs() < 1e-12);
            assert!(r.value > 0.0);
        }
    }
}
