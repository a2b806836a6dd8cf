//! Two genetic types `A` and `B`: a type-`A` parent has `n + m` children by
//! `p_A`, each independently keeping type `A` with probability `1 - p` and
//! mutating to `B` with probability `p` (symmetrically for `B`). The rate of
//! the ratio `x = #A / #B` is a two-block constrained entropy minimisation.

use super::dual::{solve_entropy_dual, DualBlock, DualSolution};
use super::value::RateValue;
use crate::model::OffspringLaw;
use crate::numeric::ln_binomial;
use crate::{Error, Result};

/// `(q_A, q_B)` over `(n, m)` with `n + m <= n_max`, `n` counting type-`A`
/// children and `m` type-`B` children, together with their moment vectors.
fn genetic_blocks(p_a: &OffspringLaw, p_b: &OffspringLaw, p: f64, n_max: usize) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let mut qa = Vec::new();
    let mut qb = Vec::new();
    let mut moments = Vec::new();
    for total in 0..=n_max {
        for m in 0..=total {
            let n = total - m;
            let (nf, mf) = (n as f64, m as f64);
            let binom = ln_binomial(total, m);
            let keep = |k: f64, flip: f64| (binom + flip * p.ln() + k * (1.0 - p).ln()).exp();
            qa.push(p_a.prob(total) * keep(nf, mf));
            qb.push(p_b.prob(total) * keep(mf, nf));
            moments.push(vec![nf, mf]);
        }
    }
    (qa, qb, moments)
}

/// Rate of the type ratio `x >= 0`:
///
/// `inf { x/(1+x) H(nu_A || q_A) + 1/(1+x) H(nu_B || q_B) }` subject to
/// `x = x E_A[n] + E_B[n]` and `1 = x E_A[m] + E_B[m]`.
pub fn genetic_rate(
    x: f64,
    p_a: &OffspringLaw,
    p_b: &OffspringLaw,
    p: f64,
    n_max: usize,
) -> Result<(RateValue, DualSolution)> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratio {x} must be finite and nonnegative")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("mutation probability {p} must lie in (0, 1)")));
    }
    let (qa, qb, moments) = genetic_blocks(p_a, p_b, p, n_max);
    let (wa, wb) = (x / (1.0 + x), 1.0 / (1.0 + x));
    let blocks = [
        DualBlock { weight: wa, q: qa, moments: moments.clone() },
        DualBlock { weight: wb, q: qb, moments },
    ];
    solve_entropy_dual(&blocks, &[wa, wb])
}

/// Spectral radius of the genetic mean matrix for offspring means `m_a`, `m_b`.
pub fn genetic_rho(m_a: f64, m_b: f64, p: f64) -> f64 {
    let (a, b, c, d) = (m_a * (1.0 - p), m_b * p, m_a * p, m_b * (1.0 - p));
    let half = 0.5 * (a + d);
    half + (half * half - (a * d - b * c)).sqrt()
}

/// Poisson laws truncated at `n_max` with mean ratio `eta` and rates chosen
/// (by bisection) so the two-type process is critical.
pub fn critical_genetic_laws(eta: f64, p: f64, n_max: usize) -> Result<(OffspringLaw, OffspringLaw)> {
    if !(eta > 0.0 && p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("need eta > 0 and p in (0, 1), got {eta}, {p}")));
    }
    let laws = |lb: f64| -> Result<(OffspringLaw, OffspringLaw)> {
        Ok((OffspringLaw::poisson(eta * lb, n_max)?, OffspringLaw::poisson(lb, n_max)?))
    };
    let rho = |lb: f64| -> Result<f64> {
        let (a, b) = laws(lb)?;
        Ok(genetic_rho(a.mean(), b.mean(), p))
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    while rho(hi)? < 1.0 {
        hi *= 2.0;
        if hi > n_max as f64 {
            return Err(Error::MeanUnreachable("truncation too tight for criticality".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    laws(0.5 * (lo + hi))
}

/// Typical ratio: the positive root of `eta p x^2 + (1-p)(1-eta) x - p = 0`,
/// equivalently of `x/(1+x) = (x eta (1-p) + p)/(x eta + 1)`.
pub fn genetic_fixed_point(eta: f64, p: f64) -> f64 {
    let (a, b, c) = (eta * p, (1.0 - p) * (1.0 - eta), -p);
    // Stable form of the positive root.
    let disc = (b * b - 4.0 * a * c).sqrt();
    if b >= 0.0 {
        2.0 * (-c) / (b + disc)
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// `|x/(1+x) - (x eta (1-p) + p)/(x eta + 1)|`.
pub fn genetic_residual(x: f64, eta: f64, p: f64) -> f64 {
    (x / (1.0 + x) - (x * eta * (1.0 - p) + p) / (x * eta + 1.0)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_laws_and_fixed_point() {
        let (a, b) = critical_genetic_laws(1.2, 0.05, 40).unwrap();
        assert!((genetic_rho(a.mean(), b.mean(), 0.05) - 1.0).abs() < 1e-12);
        let x = genetic_fixed_point(1.2, 0.05);
        assert!(genetic_residual(x, 1.2, 0.05) < 1e-14);
        // Eigenvector check: (x, 1) is fixed by the mean matrix.
        let (ma, mb) = (a.mean(), b.mean());
        assert!((x * ma * 0.95 + mb * 0.05 - x).abs() < 1e-9);
        let (r, sol) = genetic_rate(x, &a, &b, 0.05, 40).unwrap();
        assert!(r.value < 1e-9, "{r}");
        assert!(sol.converged);
    }

    #[test]
    fn rate_is_positive_away_from_the_zero() {
        let (a, b) = critical_genetic_laws(1.2, 0.05, 40).unwrap();
        let x = genetic_fixed_point(1.2, 0.05);
        for dx in [-0.5, 0.1, 1.0] {
            let (r, _) = genetic_rate(x + dx, &a, &b, 0.05, 40).unwrap();
            assert!(r.is_finite() && r.value > 1e-6, "{dx}: {r}");
        }
    }
}
