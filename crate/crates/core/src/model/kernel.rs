use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::alphabet::OffspringConfig;
use super::law::OffspringLaw;
use crate::{Error, Result};

const ROW_TOL: f64 = 1e-12;

/// Markov transition kernel `Q{b | a}` on the type alphabet; `rows[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKernel {
    rows: Vec<Vec<f64>>,
}

impl PairKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidModel("pair kernel has no rows".into()));
        }
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModel(format!("pair kernel row {a} has length {}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidModel(format!("pair kernel row {a} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidModel(format!("pair kernel row {a} sums to {s}")));
            }
        }
        Ok(Self { rows })
    }

    /// The trivial kernel on a single type.
    pub fn single() -> Self {
        Self { rows: vec![vec![1.0]] }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `Q{to | from}`.
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Stationary distribution, by power iteration on the lazy chain.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.dim();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let mut next = vec![0.0; n];
            for a in 0..n {
                for b in 0..n {
                    next[b] += 0.5 * pi[a] * self.rows[a][b];
                }
                next[a] += 0.5 * pi[a];
            }
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s);
            let diff = pi.iter().zip(&next).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            pi = next;
            if diff < 1e-16 {
                break;
            }
        }
        pi
    }
}

/// Offspring kernel `Q{c | a}`: per type, a finitely supported law on
/// offspring configurations. Only configurations of positive mass are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringKernel {
    rows: Vec<BTreeMap<OffspringConfig, f64>>,
    n_max: usize,
}

impl OffspringKernel {
    pub fn new(rows: Vec<BTreeMap<OffspringConfig, f64>>) -> Result<Self> {
        let num_types = rows.len();
        if num_types == 0 {
            return Err(Error::InvalidModel("offspring kernel has no rows".into()));
        }
        let mut cleaned = Vec::with_capacity(num_types);
        let mut n_max = 0;
        for (a, row) in rows.into_iter().enumerate() {
            let mut sum = 0.0;
            let mut kept = BTreeMap::new();
            for (c, p) in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "kernel row {a}: probability {p} of {c} is invalid"
                    )));
                }
                if let Some(&bad) = c.children().iter().find(|&&t| t >= num_types) {
                    return Err(Error::InvalidModel(format!(
                        "kernel row {a}: child type {bad} out of range"
                    )));
                }
                sum += p;
                if p > 0.0 {
                    n_max = n_max.max(c.arity());
                    kept.insert(c, p);
                }
            }
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidModel(format!("kernel row {a} sums to {sum}")));
            }
            cleaned.push(kept);
        }
        Ok(Self { rows: cleaned, n_max })
    }

    pub fn num_types(&self) -> usize {
        self.rows.len()
    }

    /// Largest arity in the support.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn row(&self, ty: usize) -> &BTreeMap<OffspringConfig, f64> {
        &self.rows[ty]
    }

    pub fn rows(&self) -> &[BTreeMap<OffspringConfig, f64>] {
        &self.rows
    }

    /// `Q{c | a}`, zero off the support.
    pub fn prob(&self, ty: usize, config: &OffspringConfig) -> f64 {
        self.rows[ty].get(config).copied().unwrap_or(0.0)
    }

    /// `Q{(0, ∅) | a}`.
    pub fn leaf_prob(&self, ty: usize) -> f64 {
        self.prob(ty, &OffspringConfig::empty())
    }

    /// Reweight every row by `w(a, c) >= 0` and renormalise.
    pub fn reweighted(&self, weight: impl Fn(usize, &OffspringConfig) -> f64) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(a, row)| {
                let raw: Vec<(OffspringConfig, f64)> =
                    row.iter().map(|(c, p)| (c.clone(), p * weight(a, c))).collect();
                let s: f64 = raw.iter().map(|(_, p)| p).sum();
                raw.into_iter().map(|(c, p)| (c, p / s)).collect()
            })
            .collect();
        Self::new(rows)
    }
}

/// Mean matrix `A(a, b) = sum_c Q{c | b} m(a, c)`: expected number of type-`a`
/// children of a type-`b` parent. Column `b` is the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix(pub DMatrix<f64>);

impl MeanMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, child: usize, parent: usize) -> f64 {
        self.0[(child, parent)]
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        MeanMatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

pub fn mean_matrix(kernel: &OffspringKernel) -> MeanMatrix {
    let n = kernel.num_types();
    let mut a = DMatrix::zeros(n, n);
    for parent in 0..n {
        for (c, p) in kernel.row(parent) {
            for &child in c.children() {
                a[(child, parent)] += p;
            }
        }
    }
    MeanMatrix(a)
}

/// Upper bound on the number of configurations `product_kernel` will build.
pub const PRODUCT_KERNEL_LIMIT: f64 = 2e6;

/// `Q{(n, a_1..a_n) | b} = p(n) prod_i Q{a_i | b}`: offspring number from `p`,
/// child types i.i.d. from the pair kernel row of the parent.
pub fn product_kernel(law: &OffspringLaw, pair: &PairKernel) -> Result<OffspringKernel> {
    let k = pair.dim();
    let estimate: f64 = law
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, _)| (k as f64).powi(n as i32))
        .sum::<f64>()
        * k as f64;
    if estimate > PRODUCT_KERNEL_LIMIT {
        return Err(Error::TooLarge { estimate, limit: PRODUCT_KERNEL_LIMIT });
    }
    let mut rows = Vec::with_capacity(k);
    for parent in 0..k {
        let mut row = BTreeMap::new();
        for (n, &pn) in law.probs().iter().enumerate() {
            if pn == 0.0 {
                continue;
            }
            let mut digits = vec![0usize; n];
            loop {
                let prob = digits.iter().fold(pn, |acc, &t| acc * pair.prob(parent, t));
                if prob > 0.0 {
                    row.insert(OffspringConfig::new(digits.clone()), prob);
                }
                // odometer over X^n
                let mut i = n;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < k {
                        break;
                    }
                    digits[i] = 0;
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                }
                if n == 0 || i == usize::MAX {
                    break;
                }
            }
        }
        rows.push(row);
    }
    // Rows may drift from 1 by accumulated rounding; renormalise exactly once.
    let rows = rows
        .into_iter()
        .map(|row: BTreeMap<OffspringConfig, f64>| {
            let s: f64 = row.values().sum();
            row.into_iter().map(|(c, p)| (c, p / s)).collect()
        })
        .collect();
    OffspringKernel::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(v: &[usize]) -> OffspringConfig {
        OffspringConfig::new(v.to_vec())
    }

    #[test]
    fn binary_single_type_mean_is_one() {
        let k = product_kernel(&OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(), &PairKernel::single())
            .unwrap();
        let a = mean_matrix(&k);
        assert!((a.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((k.prob(0, &cfg(&[])) - 0.5).abs() < 1e-15);
        assert!((k.prob(0, &cfg(&[0, 0])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn swap_kernel_mean_matrix() {
        let rows = vec![
            BTreeMap::from([(cfg(&[1]), 1.0)]),
            BTreeMap::from([(cfg(&[0]), 1.0)]),
        ];
        let a = mean_matrix(&OffspringKernel::new(rows).unwrap());
        assert_eq!(a.0, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn truncated_law_uses_renormalised_mass() {
        let law = OffspringLaw::poisson(1.0, 3).unwrap();
        let k = product_kernel(&law, &PairKernel::single()).unwrap();
        let a = mean_matrix(&k);
        assert!((a.get(0, 0) - law.mean()).abs() < 1e-14);
        assert!(law.mean() < 1.0);
    }

    #[test]
    fn unary_law_reproduces_pair_kernel() {
        let q = PairKernel::new(vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let k = product_kernel(&OffspringLaw::new(vec![1e-300, 1.0 - 1e-300]).unwrap(), &q).unwrap();
        for b in 0..2 {
            for a in 0..2 {
                assert!((k.prob(b, &cfg(&[a])) - q.prob(b, a)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_two_type_binary_entries() {
        let q = PairKernel::new(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let k = product_kernel(&OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(), &q).unwrap();
        // (1/2)(3/4)(1/4) by hand
        assert!((k.prob(0, &cfg(&[0, 1])) - 0.09375).abs() < 1e-15);
        assert!((k.prob(0, &cfg(&[1, 1])) - 0.03125).abs() < 1e-15);
        for a in 0..2 {
            let s: f64 = k.row(a).values().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_kernel_guard() {
        let law = OffspringLaw::poisson(1.0, 40).unwrap();
        let q = PairKernel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(product_kernel(&law, &q), Err(Error::TooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn product_kernel_rows_sum_to_one(
            w in proptest::collection::vec(0.01f64..1.0, 1..5),
            q in proptest::collection::vec(0.0f64..1.0, 9),
            k in 1usize..4,
        ) {
            let s: f64 = w.iter().sum();
            let law = OffspringLaw::new(w.iter().map(|x| x / s).collect()).unwrap();
            let rows: Vec<Vec<f64>> = (0..k).map(|a| {
                let raw: Vec<f64> = (0..k).map(|b| q[a * 3 + b] + 1e-3).collect();
                let t: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / t).collect()
            }).collect();
            let pk = PairKernel::new(rows).unwrap();
            let kern = product_kernel(&law, &pk).unwrap();
            for a in 0..k {
                let total: f64 = kern.row(a).values().sum();
                prop_assert!((total - 1.0).abs() <= 1e-12);
            }
        }
    }
}
