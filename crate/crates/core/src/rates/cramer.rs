use super::value::{RateValue, Reason};
use crate::model::{solve_tilted_mean, OffspringLaw};

/// Cramér rate `I_p(x) = sup_l { l x - log sum_n p(n) e^{l n} }`.
///
/// Inside `(0, max support)` the supremum is attained where the tilted mean
/// equals `x`; at the two ends it is `-log p(end)`, and outside the support's
/// hull it is `+inf`.
pub fn cramer_rate(law: &OffspringLaw, x: f64) -> RateValue {
    let max = law.max_arity() as f64;
    if !x.is_finite() || x < 0.0 || x > max {
        return RateValue::infinite(Reason::Domain);
    }
    if x == 0.0 {
        return RateValue::finite(-law.prob(0).ln());
    }
    if x == max {
        return RateValue::finite(-law.prob(law.max_arity()).ln());
    }
    match solve_tilted_mean(law, x) {
        Ok(theta) => RateValue::finite(theta * x - law.log_mgf(theta)),
        // Only reachable for x numerically indistinguishable from an end point.
        Err(_) => RateValue::finite(-law.prob(if x < max / 2.0 { 0 } else { law.max_arity() }).ln()),
    }
}

/// Closed form for the law `p(k) = 1 / k = 1 - p(0)`.
pub fn cramer_kary_closed(k: usize, x: f64) -> f64 {
    let k = k as f64;
    if x < 0.0 || x > k {
        return f64::INFINITY;
    }
    let t = x / k;
    let first = if x == 0.0 { 0.0 } else { t * x.ln() };
    let second = if t == 1.0 { 0.0 } else { (1.0 - t) * ((1.0 - t) / (1.0 - 1.0 / k)).ln() };
    first + second
}

/// Closed form for the standard Poisson law: `1 - x + x log x`.
pub fn cramer_poisson_closed(x: f64) -> f64 {
    if x < 0.0 {
        return f64::INFINITY;
    }
    if x == 0.0 {
        1.0
    } else {
        1.0 - x + x * x.ln()
    }
}

/// Brute-force `sup` over a uniform grid of `points` slopes in `[lo, hi]`.
pub fn cramer_rate_grid(law: &OffspringLaw, x: f64, lo: f64, hi: f64, points: usize) -> f64 {
    (0..points)
        .map(|i| {
            let l = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            l * x - law.log_mgf(l)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_critical_mean_and_endpoints() {
        let law = OffspringLaw::new(vec![0.25, 0.5, 0.25]).unwrap();
        assert!(cramer_rate(&law, 1.0).value < 1e-15);
        assert!((cramer_rate(&law, 0.0).value - 4f64.ln()).abs() < 1e-15);
        assert!((cramer_rate(&law, 2.0).value - 4f64.ln()).abs() < 1e-15);
        assert_eq!(cramer_rate(&law, 2.5).reason, Reason::Domain);
        assert_eq!(cramer_rate(&law, -0.1).reason, Reason::Domain);
    }

    #[test]
    fn poisson_at_two() {
        let law = OffspringLaw::poisson(1.0, 60).unwrap();
        let exact = 1.0 - 2.0 + 2.0 * 2f64.ln();
        assert!((cramer_rate(&law, 2.0).value - exact).abs() < 1e-6);
    }

    #[test]
    fn convex_on_grid() {
        for law in [OffspringLaw::uniform(3).unwrap(), OffspringLaw::poisson(1.0, 30).unwrap(), OffspringLaw::kary(3).unwrap()] {
            let max = law.max_arity() as f64;
            let xs: Vec<f64> = (1..200).map(|i| max * i as f64 / 200.0).collect();
            for w in xs.windows(3) {
                let (a, b, c) = (cramer_rate(&law, w[0]).value, cramer_rate(&law, w[1]).value, cramer_rate(&law, w[2]).value);
                assert!(b <= 0.5 * (a + c) + 1e-10);
            }
        }
    }

    #[test]
    fn matches_dense_grid_sup() {
        for law in [OffspringLaw::kary(2).unwrap(), OffspringLaw::kary(3).unwrap(), OffspringLaw::uniform(3).unwrap(), OffspringLaw::poisson(1.0, 60).unwrap()] {
            for &x in &[0.3, 0.7, 1.0, 1.4] {
                let generic = cramer_rate(&law, x).value;
                let grid = cramer_rate_grid(&law, x, -30.0, 30.0, 100_001);
                assert!((generic - grid).abs() < 1e-6, "x={x}: {generic} vs {grid}");
            }
        }
    }
}
