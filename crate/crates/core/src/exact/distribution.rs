use std::collections::{BTreeMap, HashMap};

use super::enumerate::enumerate_trees;
use super::sizelaw::size_law;
use crate::empirical::{kgen_counts, offspring_counts, pair_counts, PairCounts};
use crate::model::{GWSpec, TypedTree};
use crate::{Error, Result};

/// Which integer statistic of the tree to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// Edge counts by (parent type, child type).
    PairCounts,
    /// Vertex counts by (type, offspring configuration).
    OffspringCounts,
    /// Vertex counts by depth-`k` subtree pattern.
    KgenCounts { k: usize },
}

impl StatKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatKind::PairCounts => "pair_counts",
            StatKind::OffspringCounts => "offspring_counts",
            StatKind::KgenCounts { .. } => "kgen_counts",
        }
    }
}

/// How to compute an exact distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Count dynamic program for pair counts, enumeration otherwise.
    #[default]
    Auto,
    Enumeration,
    CountDp,
}

/// Canonical integer encoding of a statistic.
///
/// * pair counts: the `|X|^2` counts, row-major;
/// * offspring counts: `[a, arity, children.., count]` per (type, config),
///   in sorted order;
/// * pattern counts: `[len, (type, arity)*len, count]` per pattern, sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatKey(pub Vec<u32>);

impl StatKey {
    pub fn render(&self) -> String {
        self.0.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
    }
}

/// The statistic of `tree` in the canonical encoding of [`StatKey`].
pub fn statistic_key(tree: &TypedTree, kind: StatKind, num_types: usize) -> StatKey {
    match kind {
        StatKind::PairCounts => {
            StatKey(pair_counts(tree, num_types).counts().iter().map(|&c| c as u32).collect())
        }
        StatKind::OffspringCounts => {
            let mut out = Vec::new();
            for ((a, c), &cnt) in offspring_counts(tree, num_types).counts() {
                out.push(*a as u32);
                out.push(c.arity() as u32);
                out.extend(c.children().iter().map(|&t| t as u32));
                out.push(cnt as u32);
            }
            StatKey(out)
        }
        StatKind::KgenCounts { k } => {
            let mut out = Vec::new();
            for (p, cnt) in kgen_counts(tree, k) {
                out.push(p.len() as u32);
                for &(t, a) in p.code() {
                    out.push(t);
                    out.push(a);
                }
                out.push(cnt as u32);
            }
            StatKey(out)
        }
    }
}

/// Exact law of a statistic on `{|T| = n}` (unnormalised: total mass is
/// `P{|T| = n}`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub kind: StatKind,
    pub n: usize,
    pub num_types: usize,
    pub entries: BTreeMap<StatKey, f64>,
    pub total: f64,
}

impl ExactDistribution {
    /// Decode a pair-count key.
    pub fn pair_counts(&self, key: &StatKey) -> Result<PairCounts> {
        if self.kind != StatKind::PairCounts {
            return Err(Error::InvalidArgument("distribution is not over pair counts".into()));
        }
        PairCounts::from_counts(self.num_types, key.0.iter().map(|&c| c as u64).collect())
    }
}

/// Exact joint law of a statistic over all trees of size `n`.
pub fn exact_statistic_distribution(
    spec: &GWSpec,
    n: usize,
    kind: StatKind,
    backend: Backend,
) -> Result<ExactDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("tree size must be at least 1".into()));
    }
    if let StatKind::KgenCounts { k: 0 } = kind {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let use_dp = match backend {
        Backend::CountDp => {
            if kind != StatKind::PairCounts {
                return Err(Error::InvalidArgument("the count DP only handles pair counts".into()));
            }
            true
        }
        Backend::Enumeration => false,
        Backend::Auto => kind == StatKind::PairCounts && pair_dp_fits(spec.num_types(), n),
    };
    let entries = if use_dp {
        pair_count_dp(spec, n)?
    } else {
        let num_types = spec.num_types();
        let mut acc: HashMap<StatKey, f64> = HashMap::new();
        for (tree, p) in enumerate_trees(spec, n)? {
            *acc.entry(statistic_key(&tree, kind, num_types)).or_insert(0.0) += p;
        }
        acc.into_iter().collect()
    };
    let total = entries.values().sum();
    Ok(ExactDistribution { kind, n, num_types: spec.num_types(), entries, total })
}

/// `P{statistic in B | |T| = n}` for the event given by `predicate`.
pub fn conditioned_event_probability(
    dist: &ExactDistribution,
    predicate: impl Fn(&StatKey) -> bool,
) -> Result<f64> {
    if !(dist.total > 0.0) {
        return Err(Error::NullConditioning(format!("P{{|T| = {}}} = 0", dist.n)));
    }
    let hit: f64 = dist.entries.iter().filter(|(k, _)| predicate(k)).map(|(_, p)| p).sum();
    Ok(hit / dist.total)
}

fn pair_dp_fits(num_types: usize, n: usize) -> bool {
    (n.max(2) as f64).powi((num_types * num_types) as i32) < 1.8e19
}

type Sparse = Vec<(u64, f64)>;

/// Pair-count distribution by dynamic programming over subtree sizes.
///
/// The pair counts of a subtree are encoded as one base-`n` integer (every
/// count is below `n`), so combining children is integer addition. For each
/// type and size the law of that code is kept as a sorted sparse vector;
/// child prefixes are convolved exactly as in the size-law recursion.
fn pair_count_dp(spec: &GWSpec, n: usize) -> Result<BTreeMap<StatKey, f64>> {
    let k = spec.num_types();
    if !pair_dp_fits(k, n) {
        return Err(Error::TooLarge {
            estimate: (n as f64).powi((k * k) as i32),
            limit: 1.8e19,
        });
    }
    let base = n.max(2) as u64;
    let digit: Vec<u64> = (0..k * k).map(|i| base.pow(i as u32)).collect();
    let kernel = spec.kernel();
    let table = size_law(spec, 1)?;
    let trie = &table.trie;

    // groups[a]: (trie node, total kernel weight of configs with that multiset)
    let groups: Vec<Vec<(usize, f64)>> = (0..k)
        .map(|a| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (c, &p) in kernel.row(a) {
                *acc.entry(trie.node_of(&c.sorted_children()).expect("prefix")).or_insert(0.0) += p;
            }
            acc.into_iter().collect()
        })
        .collect();

    // d[a][s]: law of the pair-count code of a type-a subtree of size s.
    let mut d: Vec<Vec<Sparse>> = vec![vec![Vec::new(); n + 1]; k];
    // h[a][node][s]: law of the code of children (plus their edges to an
    // `a` parent) for the sorted prefix `node` with total size s.
    let mut h: Vec<Vec<Vec<Sparse>>> = vec![vec![vec![Vec::new(); n]; trie.len()]; k];
    for row in h.iter_mut() {
        row[0][0] = vec![(0, 1.0)];
    }
    let mut scratch: HashMap<u64, f64> = HashMap::new();
    for size in 1..=n {
        let s = size - 1;
        for a in 0..k {
            for node in 1..trie.len() {
                let parent = trie.parent(node);
                let last = trie.last_type(node);
                let edge = digit[a * k + last];
                scratch.clear();
                for s1 in 0..s {
                    let left = &h[a][parent][s1];
                    let right = &d[last][s - s1];
                    if left.is_empty() || right.is_empty() {
                        continue;
                    }
                    for &(kl, pl) in left {
                        for &(kr, pr) in right {
                            *scratch.entry(kl + kr + edge).or_insert(0.0) += pl * pr;
                        }
                    }
                }
                h[a][node][s] = sorted(&scratch);
            }
            scratch.clear();
            for &(node, w) in &groups[a] {
                for &(key, p) in &h[a][node][s] {
                    *scratch.entry(key).or_insert(0.0) += w * p;
                }
            }
            d[a][size] = sorted(&scratch);
        }
    }

    let mut out: BTreeMap<StatKey, f64> = BTreeMap::new();
    for (a, &mu) in spec.root_dist().iter().enumerate() {
        if mu == 0.0 {
            continue;
        }
        for &(code, p) in &d[a][n] {
            let mut rest = code;
            let counts: Vec<u32> = (0..k * k)
                .map(|_| {
                    let c = (rest % base) as u32;
                    rest /= base;
                    c
                })
                .collect();
            *out.entry(StatKey(counts)).or_insert(0.0) += mu * p;
        }
    }
    Ok(out)
}

/// Sorting makes every later summation order, and hence every rounding,
/// independent of hash-map iteration order.
fn sorted(map: &HashMap<u64, f64>) -> Sparse {
    let mut v: Sparse = map.iter().map(|(&k, &p)| (k, p)).collect();
    v.sort_unstable_by_key(|&(k, _)| k);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OffspringConfig, OffspringKernel, OffspringLaw, PairKernel, TypeAlphabet};

    fn binary() -> GWSpec {
        GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap()
    }

    fn chain(q: f64) -> GWSpec {
        GWSpec::product(
            TypeAlphabet::new(["a", "b"]).unwrap(),
            vec![0.5, 0.5],
            OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(),
            PairKernel::new(vec![vec![q, 1.0 - q], vec![1.0 - q, q]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn binary_three_pair_counts_point_mass() {
        let d = exact_statistic_distribution(&binary(), 3, StatKind::PairCounts, Backend::Enumeration).unwrap();
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries.keys().next().unwrap().0, vec![2]);
        assert!((d.total - 0.125).abs() < 1e-15);
    }

    #[test]
    fn swap_kernel_offspring_counts_alternate() {
        let cfg = |v: &[usize]| OffspringConfig::new(v.to_vec());
        let rows = vec![
            BTreeMap::from([(cfg(&[]), 0.5), (cfg(&[1]), 0.5)]),
            BTreeMap::from([(cfg(&[]), 0.5), (cfg(&[0]), 0.5)]),
        ];
        let spec = GWSpec::new(TypeAlphabet::new(["a", "b"]).unwrap(), vec![1.0, 0.0], OffspringKernel::new(rows).unwrap()).unwrap();
        let d = exact_statistic_distribution(&spec, 3, StatKind::OffspringCounts, Backend::Auto).unwrap();
        // The only size-3 tree is the path a - b - a.
        assert_eq!(d.entries.len(), 1);
        let key = &d.entries.keys().next().unwrap().0;
        assert_eq!(key, &vec![0, 0, 1, 0, 1, 1, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn dp_matches_enumeration() {
        for n in [1, 3, 5, 7, 9] {
            let spec = chain(0.3);
            let e = exact_statistic_distribution(&spec, n, StatKind::PairCounts, Backend::Enumeration).unwrap();
            let p = exact_statistic_distribution(&spec, n, StatKind::PairCounts, Backend::CountDp).unwrap();
            assert_eq!(e.entries.keys().collect::<Vec<_>>(), p.entries.keys().collect::<Vec<_>>());
            for (k, v) in &e.entries {
                assert!((v - p.entries[k]).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn trivial_events() {
        let d = exact_statistic_distribution(&chain(0.3), 5, StatKind::PairCounts, Backend::Auto).unwrap();
        assert_eq!(conditioned_event_probability(&d, |_| true).unwrap(), 1.0);
        assert_eq!(conditioned_event_probability(&d, |_| false).unwrap(), 0.0);
        let empty = exact_statistic_distribution(&binary(), 4, StatKind::PairCounts, Backend::Auto).unwrap();
        assert!(matches!(conditioned_event_probability(&empty, |_| true), Err(Error::NullConditioning(_))));
    }

    #[test]
    fn event_probability_matches_hand_sum() {
        let spec = chain(0.3);
        let n = 5;
        let d = exact_statistic_distribution(&spec, n, StatKind::PairCounts, Backend::Auto).unwrap();
        let p = conditioned_event_probability(&d, |k| k.0[0] as f64 / (n - 1) as f64 >= 0.4).unwrap();
        let (mut hit, mut tot) = (0.0, 0.0);
        for (t, pr) in enumerate_trees(&spec, n).unwrap() {
            tot += pr;
            if pair_counts(&t, 2).get(0, 0) as f64 / 4.0 >= 0.4 {
                hit += pr;
            }
        }
        assert!((p - hit / tot).abs() < 1e-14);
    }
}
