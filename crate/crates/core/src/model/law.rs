use crate::numeric::{ln_factorial, log_sum_exp};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// Offspring-number law on `{0, ..., N_max}`.
///
/// `probs` is the working law: it always sums to one. When an analytic law
/// with unbounded support is truncated at `N_max`, the dropped tail mass is
/// kept in `truncation_remainder` and the retained probabilities are
/// renormalised proportionally, so the truncated law is the model.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    probs: Vec<f64>,
    truncation_remainder: f64,
}

impl OffspringLaw {
    /// Finite law given by `probs[n] = p(n)`. Must sum to one within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::truncated(probs, 0.0)
    }

    /// Law whose retained probabilities plus `remainder` sum to one.
    pub fn truncated(mut probs: Vec<f64>, remainder: f64) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || !(0.0..1.0).contains(&remainder) {
            return Err(Error::InvalidModel(
                "offspring probabilities must be finite and nonnegative".into(),
            ));
        }
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        let sum: f64 = probs.iter().sum();
        if (sum + remainder - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidModel(format!(
                "offspring law sums to {sum} with remainder {remainder}, expected 1"
            )));
        }
        if probs.first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::InvalidModel("offspring law needs p(0) > 0".into()));
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(Self { probs, truncation_remainder: remainder })
    }

    /// Poisson(`lambda`) truncated at `n_max`.
    pub fn poisson(lambda: f64, n_max: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidModel(format!("poisson rate {lambda} must be positive")));
        }
        let probs: Vec<f64> = (0..=n_max)
            .map(|n| (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp())
            .collect();
        let kept: f64 = probs.iter().sum();
        let remainder = (1.0 - kept).max(0.0);
        // Renormalise the retained mass before validation so round-off in
        // `kept` cannot trip the tolerance check.
        let scaled: Vec<f64> = probs.iter().map(|p| p * (1.0 - remainder) / kept).collect();
        Self::truncated(scaled, remainder)
    }

    /// Uniform law on `{0, ..., k}`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / (k as f64 + 1.0); k + 1])
    }

    /// `p(k) = 1/k = 1 - p(0)`: conditioned on size this is a uniform k-ary tree.
    pub fn kary(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidModel("k-ary law needs k >= 2".into()));
        }
        let mut probs = vec![0.0; k + 1];
        probs[0] = 1.0 - 1.0 / k as f64;
        probs[k] = 1.0 / k as f64;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn truncation_remainder(&self) -> f64 {
        self.truncation_remainder
    }

    /// Largest arity carrying positive mass.
    pub fn max_arity(&self) -> usize {
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `log sum_n p(n) e^{lambda n}`.
    pub fn log_mgf(&self, lambda: f64) -> f64 {
        log_sum_exp(self.log_terms(lambda))
    }

    fn log_terms(&self, lambda: f64) -> impl Iterator<Item = f64> + Clone + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(n, &p)| p.ln() + lambda * n as f64)
    }

    /// Mean and variance of the tilted law `p_lambda`.
    pub fn tilted_moments(&self, lambda: f64) -> (f64, f64) {
        let norm = self.log_mgf(lambda);
        let mut mean = 0.0;
        let mut second = 0.0;
        for (n, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                let w = (p.ln() + lambda * n as f64 - norm).exp();
                mean += w * n as f64;
                second += w * (n * n) as f64;
            }
        }
        (mean, (second - mean * mean).max(0.0))
    }

    /// Exponential tilt `p_theta(n) = p(n) e^{theta n} / sum_j p(j) e^{theta j}`.
    pub fn tilt(&self, theta: f64) -> OffspringLaw {
        let norm = self.log_mgf(theta);
        let probs = self
            .probs
            .iter()
            .enumerate()
            .map(|(n, &p)| if p > 0.0 { (p.ln() + theta * n as f64 - norm).exp() } else { 0.0 })
            .collect();
        OffspringLaw { probs, truncation_remainder: self.truncation_remainder }
    }

    pub fn is_critical(&self, tol: f64) -> bool {
        (self.mean() - 1.0).abs() <= tol
    }
}

/// Tilt parameter `theta` with `mean(p_theta) = target`, by bracketing and
/// safeguarded Newton on the increasing map `theta -> mean(p_theta)`.
///
/// `target` must lie strictly inside the convex hull of the support.
pub fn solve_tilted_mean(law: &OffspringLaw, target: f64) -> Result<f64> {
    let max = law.max_arity() as f64;
    if !(target > 0.0 && target < max) {
        return Err(Error::MeanUnreachable(format!(
            "mean {target} outside the open support hull (0, {max})"
        )));
    }
    let mean_at = |t: f64| law.tilted_moments(t).0;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while mean_at(lo) > target {
        lo *= 2.0;
        if lo < -1e7 {
            return Err(Error::MeanUnreachable(format!("cannot bracket mean {target} from below")));
        }
    }
    while mean_at(hi) < target {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::MeanUnreachable(format!("cannot bracket mean {target} from above")));
        }
    }
    let tol = 1e-14 * target.max(1.0);
    let mut theta = 0.0f64.clamp(lo, hi);
    for _ in 0..500 {
        let (m, v) = law.tilted_moments(theta);
        let f = m - target;
        if f.abs() <= tol {
            return Ok(theta);
        }
        if f > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let newton = if v > 0.0 { theta - f / v } else { f64::NAN };
        theta = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * theta.abs().max(1.0) {
            return Ok(theta);
        }
    }
    Ok(theta)
}

/// Result of [`find_critical_tilt`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalTilt {
    pub theta: f64,
    pub law: OffspringLaw,
}

/// The unique `theta*` making `p_theta*` critical (mean one).
///
/// Requires `0 < p(0) < 1 - p(1)`.
pub fn find_critical_tilt(law: &OffspringLaw) -> Result<CriticalTilt> {
    let p0 = law.prob(0);
    let p1 = law.prob(1);
    if !(p0 > 0.0 && p0 < 1.0 - p1) {
        return Err(Error::TiltUndefined(format!(
            "need 0 < p(0) < 1 - p(1), got p(0) = {p0}, p(1) = {p1}"
        )));
    }
    if law.max_arity() <= 1 {
        return Err(Error::MeanUnreachable("support is contained in {0, 1}".into()));
    }
    if (law.mean() - 1.0).abs() <= 1e-15 {
        return Ok(CriticalTilt { theta: 0.0, law: law.clone() });
    }
    let theta = solve_tilted_mean(law, 1.0)?;
    let tilted = law.tilt(theta);
    Ok(CriticalTilt { theta, law: tilted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: root of 2y^3 + y^2 - 1 on (0, 1) by bisection.
    fn cubic_root() -> f64 {
        let f = |y: f64| 2.0 * y * y * y + y * y - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn critical_law_has_zero_tilt() {
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let t = find_critical_tilt(&law).unwrap();
        assert_eq!(t.theta, 0.0);
    }

    #[test]
    fn uniform_four_point_tilt_matches_cubic_root() {
        let law = OffspringLaw::uniform(3).unwrap();
        let t = find_critical_tilt(&law).unwrap();
        let y = cubic_root();
        assert!((t.theta - y.ln()).abs() < 1e-10, "{} vs {}", t.theta, y.ln());
        assert!((t.law.mean() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn half_half_on_zero_one_is_undefined() {
        let law = OffspringLaw::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(find_critical_tilt(&law), Err(Error::TiltUndefined(_))));
    }

    #[test]
    fn law_validation() {
        assert!(OffspringLaw::new(vec![0.0, 1.0]).is_err());
        assert!(OffspringLaw::new(vec![0.5, 0.4]).is_err());
        let k3 = OffspringLaw::kary(3).unwrap();
        assert!((k3.mean() - 1.0).abs() < 1e-15);
        let pois = OffspringLaw::poisson(1.0, 60).unwrap();
        assert!(pois.truncation_remainder() < 1e-60);
        assert!((pois.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let short = OffspringLaw::poisson(1.0, 3).unwrap();
        assert!(short.truncation_remainder() > 0.01);
        assert!((short.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn tilt_round_trip(w in proptest::collection::vec(0.01f64..1.0, 2..7), theta in -3.0f64..3.0) {
            let s: f64 = w.iter().sum();
            let law = OffspringLaw::new(w.iter().map(|x| x / s).collect()).unwrap();
            let back = law.tilt(theta).tilt(-theta);
            for (a, b) in law.probs().iter().zip(back.probs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
