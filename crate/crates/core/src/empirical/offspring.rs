use std::collections::BTreeMap;

use crate::model::{OffspringConfig, TypedTree};
use crate::{Error, Result};

/// Integer counts of (vertex type, offspring configuration) over a tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OffspringCounts {
    num_types: usize,
    counts: BTreeMap<(usize, OffspringConfig), u64>,
}

impl OffspringCounts {
    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn counts(&self) -> &BTreeMap<(usize, OffspringConfig), u64> {
        &self.counts
    }

    /// Number of vertices.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Divide by the number of vertices.
    pub fn measure(&self) -> OffspringMeasure {
        let n = self.total() as f64;
        let mass = self.counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n)).collect();
        OffspringMeasure::new_unchecked(self.num_types, mass)
    }

    /// `n * defect(a)` computed on integers: vertices of type `a` minus
    /// children of type `a`.
    pub fn integer_shift_defect(&self) -> Vec<i64> {
        let mut d = vec![0i64; self.num_types];
        for ((a, c), &cnt) in &self.counts {
            d[*a] += cnt as i64;
            for &child in c.children() {
                d[child] -= cnt as i64;
            }
        }
        d
    }

    /// `(n - 1) * L_X` recovered from counts: `sum_c m(b, c) count(a, c)`.
    pub fn contracted_pair_counts(&self) -> Vec<u64> {
        let k = self.num_types;
        let mut out = vec![0u64; k * k];
        for ((a, c), &cnt) in &self.counts {
            for &b in c.children() {
                out[a * k + b] += cnt;
            }
        }
        out
    }
}

/// Finitely supported probability measure on (type, offspring configuration).
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringMeasure {
    num_types: usize,
    mass: BTreeMap<(usize, OffspringConfig), f64>,
    nu1: Vec<f64>,
}

impl OffspringMeasure {
    pub fn new(num_types: usize, mass: BTreeMap<(usize, OffspringConfig), f64>) -> Result<Self> {
        let mut total = 0.0;
        for ((a, c), &m) in &mass {
            if *a >= num_types || c.children().iter().any(|&t| t >= num_types) {
                return Err(Error::InvalidArgument(format!("type out of range in ({a}, {c})")));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidArgument(format!("mass {m} at ({a}, {c}) is invalid")));
            }
            total += m;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("offspring measure sums to {total}")));
        }
        Ok(Self::new_unchecked(num_types, mass))
    }

    fn new_unchecked(num_types: usize, mut mass: BTreeMap<(usize, OffspringConfig), f64>) -> Self {
        mass.retain(|_, m| *m > 0.0);
        let mut nu1 = vec![0.0; num_types];
        for ((a, _), m) in &mass {
            nu1[*a] += m;
        }
        Self { num_types, mass, nu1 }
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn get(&self, ty: usize, config: &OffspringConfig) -> f64 {
        self.mass.get(&(ty, config.clone())).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, OffspringConfig), &f64)> {
        self.mass.iter()
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// Type marginal `nu_1(a) = sum_c nu(a, c)`.
    pub fn nu1(&self) -> &[f64] {
        &self.nu1
    }
}

pub fn offspring_counts(tree: &TypedTree, num_types: usize) -> OffspringCounts {
    let mut counts = BTreeMap::new();
    for v in 0..tree.size() {
        *counts.entry((tree.ty(v), tree.config(v))).or_insert(0) += 1;
    }
    OffspringCounts { num_types, counts }
}

/// Empirical offspring measure: uniform over vertices of (type, configuration).
pub fn offspring_measure(tree: &TypedTree, num_types: usize) -> OffspringMeasure {
    offspring_counts(tree, num_types).measure()
}

/// `F(nu)(a, b) = sum_c m(b, c) nu(a, c)`, row-major; the linear map taking
/// the offspring measure of a tree to `(n - 1) / n` times its pair measure.
pub fn contraction_f(nu: &OffspringMeasure) -> Vec<Vec<f64>> {
    let k = nu.num_types();
    let mut out = vec![vec![0.0; k]; k];
    for ((a, c), m) in nu.iter() {
        for &b in c.children() {
            out[*a][b] += m;
        }
    }
    out
}

/// `defect(a) = nu_1(a) - sum_{b, c} m(a, c) nu(b, c)`.
pub fn shift_defect(nu: &OffspringMeasure) -> Vec<f64> {
    let mut d = nu.nu1().to_vec();
    for ((_, c), m) in nu.iter() {
        for &child in c.children() {
            d[child] -= m;
        }
    }
    d
}

pub fn is_shift_invariant(nu: &OffspringMeasure, tol: f64) -> bool {
    shift_defect(nu).iter().all(|d| d.abs() <= tol)
}
