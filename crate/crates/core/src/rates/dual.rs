//! Relative-entropy minimisation under linear moment constraints, solved
//! through the exponential-family dual.
//!
//! The primal problem is
//!
//! ```text
//! minimise   sum_i w_i H(nu_i || q_i)
//! subject to sum_i w_i E_{nu_i}[m] = target
//! ```
//!
//! over probability vectors `nu_i` on the support of `q_i`, where the moment
//! map `m` is nonnegative. The minimisers are `nu_i ∝ q_i exp(lambda . m)`
//! for one shared multiplier vector, found by damped Newton ascent on the
//! concave dual `D(lambda) = lambda . target - sum_i w_i log Z_i(lambda)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::value::{RateValue, Reason};
use crate::empirical::PairMeasure;
use crate::model::{OffspringConfig, OffspringKernel};
use crate::numeric::log_sum_exp;
use crate::{Error, Result};

pub const DUAL_GRAD_TOL: f64 = 1e-10;
pub const DUAL_MAX_ITER: usize = 200;
/// Multiplier norm beyond which an unmet constraint is declared infeasible.
pub const DUAL_DIVERGENCE: f64 = 1e3;

/// One weighted reference distribution and its moment vectors.
#[derive(Debug, Clone)]
pub struct DualBlock {
    pub weight: f64,
    pub q: Vec<f64>,
    pub moments: Vec<Vec<f64>>,
}

/// Diagnostics of a dual solve.
///
/// Coordinates whose target is zero are not solved for: they restrict the
/// support instead, and their multiplier is reported as `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub multipliers: Vec<f64>,
    pub moments: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl DualSolution {
    pub fn residual(&self, target: &[f64]) -> f64 {
        self.moments.iter().zip(target).map(|(m, t)| (m - t).abs()).fold(0.0, f64::max)
    }
}

struct Reduced {
    weight: f64,
    log_q: Vec<f64>,
    moments: Vec<Vec<f64>>,
}

struct Eval {
    dual: f64,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

fn evaluate(blocks: &[Reduced], target: &[f64], lambda: &[f64]) -> Eval {
    let d = target.len();
    let mut dual: f64 = lambda.iter().zip(target).map(|(l, t)| l * t).sum();
    let mut mean = vec![0.0; d];
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for b in blocks {
        let logits: Vec<f64> = b
            .log_q
            .iter()
            .zip(&b.moments)
            .map(|(lq, m)| lq + m.iter().zip(lambda).map(|(x, l)| x * l).sum::<f64>())
            .collect();
        let log_z = log_sum_exp(logits.iter().copied());
        dual -= b.weight * log_z;
        let mut e = vec![0.0; d];
        let mut second = DMatrix::<f64>::zeros(d, d);
        for (lg, m) in logits.iter().zip(&b.moments) {
            let p = (lg - log_z).exp();
            for i in 0..d {
                e[i] += p * m[i];
                for j in 0..=i {
                    second[(i, j)] += p * m[i] * m[j];
                }
            }
        }
        for i in 0..d {
            mean[i] += b.weight * e[i];
            for j in 0..=i {
                let c = b.weight * (second[(i, j)] - e[i] * e[j]);
                cov[(i, j)] += c;
                if i != j {
                    cov[(j, i)] += c;
                }
            }
        }
    }
    Eval { dual, mean, cov }
}

/// Newton direction `cov^{-1} grad`, with a growing ridge when the
/// covariance is numerically singular.
fn newton_direction(cov: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let scale = cov.diagonal().iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
    let mut ridge = 0.0;
    loop {
        let m = cov + DMatrix::identity(cov.nrows(), cov.ncols()) * ridge;
        if let Some(ch) = m.cholesky() {
            return ch.solve(grad);
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 10.0 };
        if ridge > 1e6 * scale {
            // Fall back to plain gradient ascent.
            return grad.clone();
        }
    }
}

/// Minimum of `sum_i w_i H(nu_i || q_i)` subject to
/// `sum_i w_i E_{nu_i}[m] = target`, with `+inf` (reason `domain`) when the
/// constraints cannot be met.
pub fn solve_entropy_dual(blocks: &[DualBlock], target: &[f64]) -> Result<(RateValue, DualSolution)> {
    let d = target.len();
    if target.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("moment targets must be finite and nonnegative".into()));
    }
    for b in blocks {
        if b.q.len() != b.moments.len() || b.moments.iter().any(|m| m.len() != d) {
            return Err(Error::InvalidArgument("moment vectors do not match the target".into()));
        }
        if b.moments.iter().flatten().any(|x| *x < 0.0) {
            return Err(Error::InvalidArgument("moments must be nonnegative".into()));
        }
    }
    let infeasible = |moments: Vec<f64>| {
        let sol = DualSolution { multipliers: vec![f64::NAN; d], moments, iterations: 0, converged: false };
        Ok((RateValue::infinite(Reason::Domain), sol))
    };

    // A zero target on a nonnegative moment forces every block onto the
    // configurations where that moment vanishes.
    let zero: Vec<bool> = target.iter().map(|&t| t == 0.0).collect();
    let active: Vec<usize> = (0..d).filter(|&i| !zero[i]).collect();
    let mut offset = 0.0;
    let mut reduced = Vec::new();
    for b in blocks.iter().filter(|b| b.weight > 0.0) {
        let mut r = Reduced { weight: b.weight, log_q: Vec::new(), moments: Vec::new() };
        let mut kept = 0.0;
        for (&q, m) in b.q.iter().zip(&b.moments) {
            if q > 0.0 && (0..d).all(|i| !zero[i] || m[i] == 0.0) {
                kept += q;
                r.log_q.push(q.ln());
                r.moments.push(active.iter().map(|&i| m[i]).collect());
            }
        }
        if kept == 0.0 {
            return infeasible(vec![f64::NAN; d]);
        }
        let log_kept = kept.ln();
        r.log_q.iter_mut().for_each(|x| *x -= log_kept);
        offset -= b.weight * log_kept;
        reduced.push(r);
    }
    let t: Vec<f64> = active.iter().map(|&i| target[i]).collect();
    let expand = |lambda: &[f64], mean: &[f64]| {
        let mut mult = vec![f64::NEG_INFINITY; d];
        let mut mom = vec![0.0; d];
        for (j, &i) in active.iter().enumerate() {
            mult[i] = lambda[j];
            mom[i] = mean[j];
        }
        (mult, mom)
    };
    if active.is_empty() {
        let (mult, mom) = expand(&[], &[]);
        return Ok((RateValue::finite(offset), DualSolution { multipliers: mult, moments: mom, iterations: 0, converged: true }));
    }

    let mut lambda = vec![0.0; t.len()];
    let mut ev = evaluate(&reduced, &t, &lambda);
    for it in 0..=DUAL_MAX_ITER {
        let grad = DVector::from_iterator(t.len(), t.iter().zip(&ev.mean).map(|(a, b)| a - b));
        let gnorm = grad.amax();
        if gnorm <= DUAL_GRAD_TOL {
            // Primal value at the exponential-family point; equals the dual
            // value under feasibility and is nonnegative by construction.
            let value = ev.dual + offset;
            let (mult, mom) = expand(&lambda, &ev.mean);
            let sol = DualSolution { multipliers: mult, moments: mom, iterations: it, converged: true };
            return Ok((RateValue::finite(value), sol));
        }
        let norm = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > DUAL_DIVERGENCE {
            let (_, mom) = expand(&lambda, &ev.mean);
            return infeasible(mom);
        }
        if it == DUAL_MAX_ITER {
            return Err(Error::DualNoConvergence { iterations: it, residual: gnorm });
        }
        let dir = newton_direction(&ev.cov, &grad);
        let slope = grad.dot(&dir);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = lambda.iter().zip(dir.iter()).map(|(l, s)| l + step * s).collect();
            let tev = evaluate(&reduced, &t, &trial);
            // Near the optimum the dual value changes below its round-off,
            // so a step that halves the gradient is accepted as well.
            let tgrad = t.iter().zip(&tev.mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if tev.dual >= ev.dual + 1e-4 * step * slope || tgrad <= 0.5 * gnorm || step < 1e-12 {
                lambda = trial;
                ev = tev;
                break;
            }
            step *= 0.5;
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Moment vector `m(b, c)` = number of type-`b` children in `c`.
fn config_moments(c: &OffspringConfig, num_types: usize) -> Vec<f64> {
    c.type_counts(num_types).into_iter().map(|x| x as f64).collect()
}

/// `min H(nu || q)` over configuration laws `nu` whose expected number of
/// type-`b` children is `phi(b)` for every `b`.
pub fn constrained_entropy_min(
    phi: &[f64],
    q: &BTreeMap<OffspringConfig, f64>,
) -> Result<(RateValue, DualSolution)> {
    let num_types = phi.len();
    let block = DualBlock {
        weight: 1.0,
        q: q.values().copied().collect(),
        moments: q.keys().map(|c| config_moments(c, num_types)).collect(),
    };
    solve_entropy_dual(&[block], phi)
}

/// Pair rate obtained by contracting the offspring rate:
/// `sum_a mu_2(a) Ĩ(mu(a, .) / mu_2(a), Q(. | a))`, `+inf` when some type
/// is a parent but never a child.
pub fn contraction_infimum(mu: &PairMeasure, kernel: &OffspringKernel) -> Result<RateValue> {
    let k = mu.num_types();
    if kernel.num_types() != k {
        return Err(Error::InvalidArgument(format!(
            "pair measure on {k} types, kernel on {}",
            kernel.num_types()
        )));
    }
    let m1 = mu.marginal1();
    let m2 = mu.marginal2();
    let mut total = RateValue::finite(0.0);
    for a in 0..k {
        if m2[a] == 0.0 {
            if m1[a] > 0.0 {
                return Ok(RateValue::infinite(Reason::MarginalViolation));
            }
            continue;
        }
        let phi: Vec<f64> = (0..k).map(|b| mu.get(a, b) / m2[a]).collect();
        let (v, _) = constrained_entropy_min(&phi, kernel.row(a))?;
        total = total.add(v.scale(m2[a]));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{product_kernel, OffspringLaw, PairKernel};
    use crate::rates::{cramer_rate, relative_entropy_vec};

    fn binary_row() -> BTreeMap<OffspringConfig, f64> {
        let pair = PairKernel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        product_kernel(&law, &pair).unwrap().row(0).clone()
    }

    #[test]
    fn mean_target_gives_zero() {
        let q = binary_row();
        let (v, sol) = constrained_entropy_min(&[0.7, 0.3], &q).unwrap();
        assert!(v.value < 1e-14);
        assert!(sol.multipliers.iter().all(|l| l.abs() < 1e-8));
    }

    #[test]
    fn product_identity() {
        // z H(phi / z || qhat) + I_p(z) for a product row.
        let q = binary_row();
        let phi = [0.9, 0.5];
        let z: f64 = phi.iter().sum();
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let expect = z * relative_entropy_vec(&[phi[0] / z, phi[1] / z], &[0.7, 0.3]).value
            + cramer_rate(&law, z).value;
        let (v, sol) = constrained_entropy_min(&phi, &q).unwrap();
        assert!(sol.converged && sol.residual(&phi) < 1e-8);
        assert!((v.value - expect).abs() < 1e-8, "{} vs {expect}", v.value);
    }

    #[test]
    fn zero_target_restricts_support() {
        let q = binary_row();
        let (v, _) = constrained_entropy_min(&[0.0, 0.0], &q).unwrap();
        assert!((v.value - 2f64.ln()).abs() < 1e-14);
        let (v, sol) = constrained_entropy_min(&[1.0, 0.0], &q).unwrap();
        // Only (0,0) children allowed: nu = (1/2 on leaf, 1/2 on (0,0)) after
        // restriction, against q(leaf)=0.5, q(00)=0.245.
        let s = 0.5 + 0.5 * 0.49;
        let expect = 0.5 * (0.5f64 / (0.5 / s)).ln() + 0.5 * (0.5 / (0.245 / s)).ln() - s.ln();
        assert!((v.value - expect).abs() < 1e-10, "{} vs {expect}", v.value);
        assert_eq!(sol.multipliers[1], f64::NEG_INFINITY);
    }

    #[test]
    fn outside_hull_is_infinite() {
        let q = binary_row();
        let (v, _) = constrained_entropy_min(&[1.5, 0.8], &q).unwrap();
        assert_eq!(v.reason, Reason::Domain);
    }
}
