use std::collections::{BTreeMap, HashMap};

use crate::model::{GWSpec, OffspringKernel};
use crate::numeric::log_sum_exp;
use crate::{Error, Result};

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Trie of sorted child-type prefixes occurring in a kernel's support.
///
/// The total-size law of a configuration's children does not depend on the
/// order of the children, so configurations sharing a sorted multiset share a
/// convolution table, and multisets sharing a prefix share the partial
/// convolutions.
#[derive(Debug, Clone)]
pub(crate) struct PrefixTrie {
    /// `(parent node, last type, prefix length)`; node 0 is the empty prefix.
    nodes: Vec<(usize, usize, usize)>,
    index: HashMap<Vec<usize>, usize>,
}

impl PrefixTrie {
    fn from_kernel(kernel: &OffspringKernel) -> Self {
        let mut trie = Self { nodes: vec![(usize::MAX, usize::MAX, 0)], index: HashMap::new() };
        trie.index.insert(Vec::new(), 0);
        for row in kernel.rows() {
            for c in row.keys() {
                trie.insert(&c.sorted_children());
            }
        }
        trie
    }

    fn insert(&mut self, sorted: &[usize]) -> usize {
        if let Some(&id) = self.index.get(sorted) {
            return id;
        }
        let parent = self.insert(&sorted[..sorted.len() - 1]);
        let id = self.nodes.len();
        self.nodes.push((parent, *sorted.last().unwrap(), sorted.len()));
        self.index.insert(sorted.to_vec(), id);
        id
    }

    pub(crate) fn node_of(&self, sorted: &[usize]) -> Option<usize> {
        self.index.get(sorted).copied()
    }

    pub(crate) fn parent(&self, node: usize) -> usize {
        self.nodes[node].0
    }

    pub(crate) fn last_type(&self, node: usize) -> usize {
        self.nodes[node].1
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Exact law of the total size: `f_a(n) = P{|T| = n | root type a}` for
/// `n = 1..=n_max`, in log domain with `-inf` for zero.
///
/// Also keeps the children-size convolution tables `W_P(s)`, the log
/// probability that the subtrees of a sorted child prefix `P` have total size
/// `s`; the exact sampler reads its size splits from them.
#[derive(Debug, Clone)]
pub struct SizeLawTable {
    n_max: usize,
    log_f: Vec<Vec<f64>>,
    pub(crate) trie: PrefixTrie,
    log_w: Vec<Vec<f64>>,
}

impl SizeLawTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn num_types(&self) -> usize {
        self.log_f.len()
    }

    /// `log f_a(n)`; `-inf` for `n = 0` or `n > n_max`.
    pub fn log_f(&self, ty: usize, n: usize) -> f64 {
        self.log_f[ty].get(n).copied().unwrap_or(NEG_INF)
    }

    pub fn f(&self, ty: usize, n: usize) -> f64 {
        self.log_f(ty, n).exp()
    }

    /// `log sum_a mu(a) f_a(n)`.
    pub fn log_total(&self, root_dist: &[f64], n: usize) -> f64 {
        log_sum_exp(
            root_dist
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0.0)
                .map(|(a, &m)| m.ln() + self.log_f(a, n)),
        )
    }

    /// Log weight that the subtrees of the sorted child prefix `node` have
    /// total size `s`.
    pub(crate) fn log_w(&self, node: usize, s: usize) -> f64 {
        self.log_w[node].get(s).copied().unwrap_or(NEG_INF)
    }
}

/// Exact size law of every root type up to `n_max`.
pub fn size_law(spec: &GWSpec, n_max: usize) -> Result<SizeLawTable> {
    build_table(spec.kernel(), n_max, false)
}

/// Same recursion with every supported configuration weighted 1: `log` of
/// the number of typed planar trees of each size with positive probability.
pub(crate) fn count_table(kernel: &OffspringKernel, n_max: usize) -> Result<SizeLawTable> {
    build_table(kernel, n_max, true)
}

fn build_table(kernel: &OffspringKernel, n_max: usize, unit_weights: bool) -> Result<SizeLawTable> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let k = kernel.num_types();
    let trie = PrefixTrie::from_kernel(kernel);

    // Per type: trie node -> aggregated log weight of configs with that multiset.
    let groups: Vec<Vec<(usize, f64)>> = (0..k)
        .map(|a| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (c, &p) in kernel.row(a) {
                let node = trie.node_of(&c.sorted_children()).expect("prefix inserted");
                *acc.entry(node).or_insert(0.0) += if unit_weights { 1.0 } else { p };
            }
            acc.into_iter().map(|(node, w)| (node, w.ln())).collect()
        })
        .collect();

    let mut log_f = vec![vec![NEG_INF; n_max + 1]; k];
    let mut log_w = vec![vec![NEG_INF; n_max]; trie.len()];
    log_w[0][0] = 0.0;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let s = n - 1;
        for node in 1..trie.len() {
            let (parent, last, len) = trie.nodes[node];
            let min_parent = len - 1;
            if s < len {
                continue;
            }
            terms.clear();
            // The last child takes size `s - s1 >= 1`, the prefix takes `s1`.
            for s1 in min_parent..s {
                let lg = log_w[parent][s1];
                let lf = log_f[last][s - s1];
                if lg > NEG_INF && lf > NEG_INF {
                    terms.push(lg + lf);
                }
            }
            log_w[node][s] = log_sum_exp(terms.iter().copied());
        }
        for a in 0..k {
            log_f[a][n] = log_sum_exp(groups[a].iter().map(|&(node, lw)| lw + log_w[node][s]));
        }
    }
    Ok(SizeLawTable { n_max, log_f, trie, log_w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OffspringLaw;

    #[test]
    fn binary_values() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        let t = size_law(&spec, 7).unwrap();
        let f = |n| t.f(0, n);
        assert!((f(1) - 0.5).abs() < 1e-15);
        assert!((f(3) - 0.125).abs() < 1e-15);
        assert!((f(5) - 0.0625).abs() < 1e-15);
        assert_eq!(f(2), 0.0);
        assert_eq!(f(4), 0.0);
        // Catalan(3) = 5 trees with 3 internal vertices, each 2^-7.
        assert!((f(7) - 5.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn counts_are_catalan_numbers() {
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let spec = GWSpec::single_type(law).unwrap();
        let t = count_table(spec.kernel(), 21).unwrap();
        let catalan = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0, 4862.0, 16796.0];
        for (m, &c) in catalan.iter().enumerate() {
            assert!((t.log_f(0, 2 * m + 1).exp() - c).abs() < 1e-9 * c);
        }
    }

    #[test]
    fn n_max_zero_rejected() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        assert!(size_law(&spec, 0).is_err());
    }

    #[test]
    fn partial_sums_monotone_and_bounded() {
        let spec = GWSpec::single_type(OffspringLaw::poisson(1.0, 12).unwrap()).unwrap();
        let t = size_law(&spec, 200).unwrap();
        let mut acc = 0.0;
        for n in 1..=200 {
            let next = acc + t.f(0, n);
            assert!(next >= acc && next <= 1.0 + 1e-12);
            acc = next;
        }
    }
}
