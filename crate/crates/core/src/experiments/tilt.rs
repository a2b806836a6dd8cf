use std::collections::HashMap;

use crate::exact::enumerate_trees;
use crate::model::GWSpec;
use crate::{Error, Result};

/// Conditioned law of the size-`n` trees, keyed by preorder code.
fn conditioned_law(spec: &GWSpec, n: usize) -> Result<HashMap<Vec<(usize, usize)>, f64>> {
    let trees: Vec<_> = enumerate_trees(spec, n)?.codes().collect();
    let total: f64 = trees.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(Error::NullConditioning(format!("no tree of size {n}")));
    }
    Ok(trees.into_iter().map(|(c, p)| (c, p / total)).collect())
}

/// Total-variation distance between the size-`n` conditioned tree laws of a
/// product model and of the same model with its offspring law tilted by each
/// `theta`.
pub fn tilt_invariance_report(spec: &GWSpec, thetas: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    let (law, pair) = spec
        .product_parts()
        .ok_or_else(|| Error::InvalidArgument("tilting needs a product model".into()))?;
    let base = conditioned_law(spec, n)?;
    let mut out = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        if theta == 0.0 {
            out.push((theta, 0.0));
            continue;
        }
        let tilted = GWSpec::product(spec.alphabet().clone(), spec.root_dist().to_vec(), law.tilt(theta), pair.clone())?;
        let other = conditioned_law(&tilted, n)?;
        let mut tv = 0.0;
        for (code, p) in &base {
            tv += (p - other.get(code).copied().unwrap_or(0.0)).abs();
        }
        for (code, q) in &other {
            if !base.contains_key(code) {
                tv += q;
            }
        }
        out.push((theta, 0.5 * tv));
    }
    Ok(out)
}
