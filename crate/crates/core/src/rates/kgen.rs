use std::collections::BTreeMap;

use super::value::{RateValue, Reason};
use crate::empirical::{shift_defect_k, GenMeasureK, Pattern};
use crate::model::OffspringKernel;
use crate::numeric::xlogx_over_y;
use crate::{Error, Result};

/// `(mu o pi_{k,k-1}^{-1} (x)_1 Q)(b)`: the mass of the depth-`(k-1)`
/// truncation of `b` times the kernel probability of every configuration
/// hanging below depth `k-1`.
fn extension_reference(b: &Pattern, k: usize, lower: &BTreeMap<Pattern, f64>, kernel: &OffspringKernel) -> f64 {
    let mut r = lower.get(&b.truncate(k - 1)).copied().unwrap_or(0.0);
    let code = b.code();
    for (pos, ty, arity) in b.vertices_at_depth(k - 1) {
        // Children of a vertex one level above the cut are leaves of the
        // pattern and therefore follow it consecutively.
        let children = code[pos + 1..pos + 1 + arity].iter().map(|&(t, _)| t as usize).collect();
        r *= kernel.prob(ty, &crate::model::OffspringConfig::new(children));
        if r == 0.0 {
            break;
        }
    }
    r
}

/// k-generation rate: `H(mu || mu o pi_{k,k-1}^{-1} (x)_1 Q)` when `mu` is
/// shift-invariant up to `tol`, `+inf` otherwise.
pub fn kgen_rate_jk(mu: &GenMeasureK, kernel: &OffspringKernel, tol: f64) -> Result<RateValue> {
    if mu.num_types() != kernel.num_types() {
        return Err(Error::InvalidArgument(format!(
            "measure on {} types, kernel on {}",
            mu.num_types(),
            kernel.num_types()
        )));
    }
    if shift_defect_k(mu).values().any(|d| d.abs() > tol) {
        return Ok(RateValue::infinite(Reason::NotShiftInvariant));
    }
    let k = mu.k();
    let mut lower: BTreeMap<Pattern, f64> = BTreeMap::new();
    for (b, m) in mu.iter() {
        *lower.entry(b.truncate(k - 1)).or_insert(0.0) += m;
    }
    let mut total = 0.0;
    for (b, &m) in mu.iter() {
        let r = extension_reference(b, k, &lower, kernel);
        if r <= 0.0 {
            return Ok(RateValue::infinite(Reason::NotAbsContinuous));
        }
        total += xlogx_over_y(m, r);
    }
    Ok(RateValue::finite(total))
}

/// Guard on the number of patterns built by [`stationary_kgen_measure`].
pub const STATIONARY_PATTERN_LIMIT: usize = 5_000_000;

/// Law of the depth-`k` truncation of a tree whose root has type drawn
/// from `root` and whose vertices reproduce independently by `kernel`:
/// `mu_0 = root`, `mu_l = mu_{l-1} (x)_1 Q`. With `root` the normalised
/// right Perron vector of a critical kernel every level is shift-invariant.
pub fn stationary_kgen_measure(kernel: &OffspringKernel, root: &[f64], k: usize) -> Result<GenMeasureK> {
    if root.len() != kernel.num_types() {
        return Err(Error::InvalidArgument("root weights do not match the kernel".into()));
    }
    let mut level: Vec<(Vec<(u32, u32)>, f64)> =
        root.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(a, &w)| (vec![(a as u32, 0)], w)).collect();
    let rows: Vec<Vec<(Vec<u32>, f64)>> = kernel
        .rows()
        .iter()
        .map(|row| row.iter().map(|(c, &p)| (c.children().iter().map(|&t| t as u32).collect(), p)).collect())
        .collect();
    for d in 0..k {
        let mut next = Vec::new();
        for (code, mass) in level {
            let depths = Pattern::from_code(code.clone())?.depths();
            let frontier: Vec<usize> = (0..code.len()).filter(|&i| depths[i] == d).collect();
            let choices: Vec<&[(Vec<u32>, f64)]> =
                frontier.iter().map(|&i| rows[code[i].0 as usize].as_slice()).collect();
            // Odometer over one configuration per frontier vertex.
            let mut digits = vec![0usize; frontier.len()];
            loop {
                let mut m = mass;
                let mut out = Vec::with_capacity(code.len() * 2);
                let mut f = 0;
                for (i, &(t, ar)) in code.iter().enumerate() {
                    if f < frontier.len() && frontier[f] == i {
                        let (children, p) = &choices[f][digits[f]];
                        m *= p;
                        out.push((t, children.len() as u32));
                        out.extend(children.iter().map(|&c| (c, 0)));
                        f += 1;
                    } else {
                        out.push((t, ar));
                    }
                }
                next.push((out, m));
                if next.len() > STATIONARY_PATTERN_LIMIT {
                    return Err(Error::TooLarge {
                        estimate: next.len() as f64,
                        limit: STATIONARY_PATTERN_LIMIT as f64,
                    });
                }
                let mut j = 0;
                while j < digits.len() {
                    digits[j] += 1;
                    if digits[j] < choices[j].len() {
                        break;
                    }
                    digits[j] = 0;
                    j += 1;
                }
                if j == digits.len() {
                    break;
                }
            }
        }
        level = next;
    }
    let mut mass = BTreeMap::new();
    for (code, m) in level {
        *mass.entry(Pattern::from_code(code)?).or_insert(0.0) += m;
    }
    GenMeasureK::new(k.max(1), kernel.num_types(), mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::OffspringMeasure;
    use crate::model::{analyze_model, mean_matrix, product_kernel, OffspringLaw, PairKernel};
    use crate::rates::{offspring_rate_j, zero_rate_measure};

    fn kernel(pair: Vec<Vec<f64>>) -> OffspringKernel {
        product_kernel(&OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(), &PairKernel::new(pair).unwrap()).unwrap()
    }

    fn stationary(k: &OffspringKernel, depth: usize) -> GenMeasureK {
        let u = analyze_model(&mean_matrix(k)).unwrap().right_vec;
        stationary_kgen_measure(k, &u, depth).unwrap()
    }

    #[test]
    fn stationary_levels_have_zero_rate() {
        let q = kernel(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        let mu = stationary(&q, 3);
        for j in 1..=3 {
            let proj = mu.project(j).unwrap();
            assert!(shift_defect_k(&proj).values().all(|d| d.abs() < 1e-12));
            assert!(kgen_rate_jk(&proj, &q, 1e-9).unwrap().value < 1e-9);
        }
    }

    #[test]
    fn depth_one_matches_offspring_rate() {
        let q0 = kernel(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        let q1 = kernel(vec![vec![0.2, 0.8], vec![0.5, 0.5]]);
        let mu = stationary(&q1, 1);
        let nu = OffspringMeasure::new(2, mu.iter().map(|(p, m)| (p.to_offspring(), *m)).collect()).unwrap();
        let a = kgen_rate_jk(&mu, &q0, 1e-9).unwrap().value;
        let b = offspring_rate_j(&nu, &q0, 1e-9).unwrap().value;
        assert!(a > 0.0 && (a - b).abs() < 1e-14);
        let nu_star = zero_rate_measure(&q1).unwrap();
        assert!((offspring_rate_j(&nu_star, &q0, 1e-9).unwrap().value - b).abs() < 1e-12);
    }

    #[test]
    fn ladder_is_monotone_on_a_mixture() {
        let q0 = kernel(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        let q1 = kernel(vec![vec![0.2, 0.8], vec![0.5, 0.5]]);
        let q2 = kernel(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        let (a, b) = (stationary(&q1, 3), stationary(&q2, 3));
        let mut mass: BTreeMap<Pattern, f64> = BTreeMap::new();
        for (p, m) in a.iter() {
            *mass.entry(p.clone()).or_insert(0.0) += 0.3 * m;
        }
        for (p, m) in b.iter() {
            *mass.entry(p.clone()).or_insert(0.0) += 0.7 * m;
        }
        let mix = GenMeasureK::new(3, 2, mass).unwrap();
        let j: Vec<f64> =
            (1..=3).map(|k| kgen_rate_jk(&mix.project(k).unwrap(), &q0, 1e-9).unwrap().value).collect();
        assert!(j[0] > 0.0 && j[0] <= j[1] + 1e-9 && j[1] <= j[2] + 1e-9, "{j:?}");
    }

    #[test]
    fn defective_measure_is_infinite() {
        let p = Pattern::from_code(vec![(0, 2), (0, 0), (1, 0)]).unwrap();
        let mu = GenMeasureK::new(1, 2, BTreeMap::from([(p, 1.0)])).unwrap();
        let q = kernel(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        assert_eq!(kgen_rate_jk(&mu, &q, 1e-9).unwrap().reason, Reason::NotShiftInvariant);
    }
}
