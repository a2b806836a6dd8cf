use super::cramer::cramer_rate;
use super::value::{relative_entropy_vec, RateValue, Reason};
use crate::empirical::PairMeasure;
use crate::model::{find_critical_tilt, OffspringLaw, PairKernel};
use crate::{Error, Result};

/// Offspring law used inside the pair rate: `law` itself when critical,
/// otherwise its critical exponential tilt (the size-conditioned tree law
/// does not change under tilting).
pub fn critical_law(law: &OffspringLaw) -> Result<OffspringLaw> {
    if (law.mean() - 1.0).abs() <= 1e-12 {
        Ok(law.clone())
    } else {
        Ok(find_critical_tilt(law)?.law)
    }
}

fn check_dims(mu: &PairMeasure, pair: &PairKernel) -> Result<()> {
    if mu.num_types() != pair.dim() {
        return Err(Error::InvalidArgument(format!(
            "pair measure on {} types, kernel on {}",
            mu.num_types(),
            pair.dim()
        )));
    }
    Ok(())
}

/// `H(mu || mu_1 (x) Q)` with `(mu_1 (x) Q)(a, b) = Q{b | a} mu_1(a)`.
pub fn markov_entropy(mu: &PairMeasure, pair: &PairKernel) -> RateValue {
    let k = mu.num_types();
    let m1 = mu.marginal1();
    let reference: Vec<f64> = (0..k * k).map(|i| m1[i / k] * pair.prob(i / k, i % k)).collect();
    relative_entropy_vec(mu.entries(), &reference)
}

/// `mu_1 << mu_2`: no type is a parent without ever being a child.
pub fn marginals_compatible(mu: &PairMeasure) -> bool {
    mu.marginal1().iter().zip(mu.marginal2()).all(|(&m1, m2)| !(m1 > 0.0 && m2 == 0.0))
}

/// Rate of the empirical pair measure of a size-conditioned tree whose
/// offspring numbers follow `law` and child types follow `pair`:
///
/// `H(mu || mu_1 (x) Q) + sum_a mu_2(a) I_p(mu_1(a) / mu_2(a))` if
/// `mu_1 << mu_2`, `+inf` otherwise, with `0 I_p(0/0) = 0`.
pub fn pair_rate(mu: &PairMeasure, law: &OffspringLaw, pair: &PairKernel) -> Result<RateValue> {
    check_dims(mu, pair)?;
    if !marginals_compatible(mu) {
        return Ok(RateValue::infinite(Reason::MarginalViolation));
    }
    let law = critical_law(law)?;
    let mut total = markov_entropy(mu, pair);
    for (m1, m2) in mu.marginal1().into_iter().zip(mu.marginal2()) {
        if m2 > 0.0 {
            total = total.add(cramer_rate(&law, m1 / m2).scale(m2));
        }
    }
    Ok(total)
}

/// Closed form for the law `p(k) = 1/k = 1 - p(0)`:
/// `H(mu || mu_1 (x) Q) + (k-1)/k H((k mu_2 - mu_1)/(k-1) || mu_2) + 1/k H(mu_1 || mu_2)`
/// when `k mu_2 >= mu_1`, `+inf` otherwise.
pub fn pair_rate_kary_closed(mu: &PairMeasure, k: usize, pair: &PairKernel) -> Result<RateValue> {
    check_dims(mu, pair)?;
    let kf = k as f64;
    let m1 = mu.marginal1();
    let m2 = mu.marginal2();
    if m1.iter().zip(&m2).any(|(&a, &b)| kf * b < a) {
        return Ok(RateValue::infinite(Reason::Domain));
    }
    let mixed: Vec<f64> = m1.iter().zip(&m2).map(|(&a, &b)| ((kf * b - a) / (kf - 1.0)).max(0.0)).collect();
    Ok(markov_entropy(mu, pair)
        .add(relative_entropy_vec(&mixed, &m2).scale((kf - 1.0) / kf))
        .add(relative_entropy_vec(&m1, &m2).scale(1.0 / kf)))
}

/// Closed form for the standard Poisson law: `H(mu || mu_1 (x) Q) + H(mu_1 || mu_2)`.
pub fn pair_rate_poisson_closed(mu: &PairMeasure, pair: &PairKernel) -> Result<RateValue> {
    check_dims(mu, pair)?;
    if !marginals_compatible(mu) {
        return Ok(RateValue::infinite(Reason::MarginalViolation));
    }
    Ok(markov_entropy(mu, pair).add(relative_entropy_vec(&mu.marginal1(), &mu.marginal2())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> PairKernel {
        PairKernel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn zero_at_stationary_product() {
        let pi = q().stationary();
        let mu = PairMeasure::new(2, (0..4).map(|i| pi[i / 2] * q().prob(i / 2, i % 2)).collect()).unwrap();
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(pair_rate(&mu, &law, &q()).unwrap().value < 1e-14);
    }

    #[test]
    fn marginal_violation_is_infinite() {
        // Type b is a parent but never a child.
        let mu = PairMeasure::new(2, vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let r = pair_rate(&mu, &law, &q()).unwrap();
        assert_eq!(r.reason, Reason::MarginalViolation);
    }

    #[test]
    fn tilting_does_not_change_the_rate() {
        let mu = PairMeasure::new(2, vec![0.4, 0.2, 0.1, 0.3]).unwrap();
        let sub = OffspringLaw::uniform(3).unwrap();
        let crit = find_critical_tilt(&sub).unwrap().law;
        let a = pair_rate(&mu, &sub, &q()).unwrap().value;
        let b = pair_rate(&mu, &crit, &q()).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
}
