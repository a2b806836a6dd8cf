use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::exact::{enumerate_trees, size_law};
use crate::model::GWSpec;
use crate::sampler::{rejection_with, ExactSampler, ForwardSampler, RngHandle, SampleBudget};
use crate::{Error, Result};

/// Pearson chi-square statistic, degrees of freedom and upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Cells whose expected count is below this are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

fn p_value(statistic: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Goodness of fit of `observed` counts to cell probabilities `probs`
/// (which should sum to one). Cells are sorted by expected count and the
/// smallest are pooled until every pooled cell expects at least five.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::InvalidArgument("observed and expected differ in length".into()));
    }
    let total: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> =
        observed.iter().zip(probs).map(|(&o, &p)| (p * total as f64, o as f64)).collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in cells {
        acc.0 += e;
        acc.1 += o;
        if acc.0 >= MIN_EXPECTED {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let statistic = pooled.iter().map(|(e, o)| if *e > 0.0 { (o - e).powi(2) / e } else { 0.0 }).sum();
    let dof = pooled.len().saturating_sub(1);
    Ok(ChiSquare { statistic, dof, p_value: p_value(statistic, dof)? })
}

/// Chi-square test that two count vectors over the same cells come from the
/// same distribution, pooling cells whose expected count under the pooled
/// estimate is below five in either sample.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("samples have different cell counts".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut cells: Vec<(u64, u64)> = a.iter().copied().zip(b.iter().copied()).filter(|(x, y)| x + y > 0).collect();
    cells.sort_by_key(|(x, y)| x + y);
    let small = |c: (u64, u64)| (c.0 + c.1) as f64 * na.min(nb) / n < MIN_EXPECTED;
    let mut pooled = Vec::new();
    let mut acc = (0, 0);
    for c in cells {
        acc = (acc.0 + c.0, acc.1 + c.1);
        if !small(acc) {
            pooled.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match pooled.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => pooled.push(acc),
        }
    }
    let mut statistic = 0.0;
    for &(x, y) in &pooled {
        let row = (x + y) as f64;
        for (obs, size) in [(x as f64, na), (y as f64, nb)] {
            let e = row * size / n;
            statistic += (obs - e).powi(2) / e;
        }
    }
    let dof = pooled.len().saturating_sub(1);
    Ok(ChiSquare { statistic, dof, p_value: p_value(statistic, dof)? })
}

/// Chi-square checks of the size-`n` samplers against exhaustive
/// enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerFit {
    pub cells: usize,
    pub exact_vs_enumeration: ChiSquare,
    pub rejection_vs_enumeration: ChiSquare,
    pub exact_vs_rejection: ChiSquare,
}

/// Draws `draws` trees of size `n` with the exact conditioned sampler
/// (stream 0) and by rejection (stream 1) and tests both against the
/// enumerated conditioned law and against each other.
pub fn sampler_fit(spec: &GWSpec, n: usize, draws: u64, seed: u64) -> Result<SamplerFit> {
    let trees: Vec<_> = enumerate_trees(spec, n)?.codes().collect();
    let total: f64 = trees.iter().map(|(_, p)| p).sum();
    let index: HashMap<Vec<(usize, usize)>, usize> =
        trees.iter().enumerate().map(|(i, (c, _))| (c.clone(), i)).collect();
    let probs: Vec<f64> = trees.iter().map(|(_, p)| p / total).collect();
    let table = size_law(spec, n)?;
    let exact = ExactSampler::new(spec, &table)?;
    let forward = ForwardSampler::new(spec)?;
    let tally = |draw: &mut dyn FnMut(&mut RngHandle) -> Result<crate::model::TypedTree>, stream| {
        let mut rng = RngHandle::new(seed, stream);
        let mut counts = vec![0u64; trees.len()];
        for _ in 0..draws {
            let code = draw(&mut rng)?.preorder();
            let i = index
                .get(&code)
                .ok_or_else(|| Error::InvalidArgument("sampled a tree outside the enumerated support".into()))?;
            counts[*i] += 1;
        }
        Ok::<_, Error>(counts)
    };
    let a = tally(&mut |rng| exact.sample(n, rng), 0)?;
    let budget = SampleBudget::default();
    let b = tally(&mut |rng| rejection_with(&forward, n, rng, budget), 1)?;
    Ok(SamplerFit {
        cells: trees.len(),
        exact_vs_enumeration: chi_square_gof(&a, &probs)?,
        rejection_vs_enumeration: chi_square_gof(&b, &probs)?,
        exact_vs_rejection: chi_square_two_sample(&a, &b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_has_p_one() {
        let r = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4 on one degree of freedom.
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.04550026389635842).abs() < 1e-9);
    }

    #[test]
    fn small_cells_are_pooled() {
        let r = chi_square_gof(&[1, 1, 98], &[0.01, 0.01, 0.98]).unwrap();
        assert_eq!(r.dof, 0);
        let t = chi_square_two_sample(&[10, 20, 1], &[10, 20, 0]).unwrap();
        assert_eq!(t.dof, 1);
    }
}
