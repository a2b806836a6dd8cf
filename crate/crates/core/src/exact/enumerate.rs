use std::collections::HashMap;
use std::sync::Arc;

use super::sizelaw::count_table;
use crate::model::{GWSpec, OffspringConfig, OffspringKernel, TypedTree};
use crate::{Error, Result};

/// Refuse to enumerate more trees than this.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// A subtree in preorder `(type, arity)` encoding with its probability
/// (conditionally on its root type).
#[derive(Debug, Clone)]
struct Shape {
    code: Vec<(usize, usize)>,
    prob: f64,
}

type ShapeList = Arc<Vec<Shape>>;

/// One root type, one configuration, one split of the remaining size over
/// the children; the trees it yields are the cartesian product of the
/// children's shape lists.
struct Job {
    root: usize,
    weight: f64,
    lists: Vec<ShapeList>,
}

/// Number of typed planar trees of size `n` with positive probability under
/// `spec`, computed by the size-law recursion with unit weights.
pub fn estimate_tree_count(spec: &GWSpec, n: usize) -> Result<f64> {
    let table = count_table(spec.kernel(), n)?;
    Ok((0..spec.num_types())
        .filter(|&a| spec.root_dist()[a] > 0.0)
        .map(|a| table.log_f(a, n).exp())
        .sum())
}

/// Every typed planar tree of size `n` in the support, with its
/// unconditioned probability `mu(root type) * prod_v Q{C(v) | X(v)}`.
///
/// Subtrees of size below `n` are materialised once per (type, size); the
/// size-`n` trees themselves are produced lazily.
pub fn enumerate_trees(spec: &GWSpec, n: usize) -> Result<TreeEnumerator> {
    if n == 0 {
        return Err(Error::InvalidArgument("tree size must be at least 1".into()));
    }
    let estimate = estimate_tree_count(spec, n)?;
    if estimate > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { estimate, limit: ENUMERATION_LIMIT });
    }
    let kernel = spec.kernel();
    let mut memo: HashMap<(usize, usize), ShapeList> = HashMap::new();
    for m in 1..n {
        for a in 0..kernel.num_types() {
            let shapes: Vec<Shape> = JobIter::new(jobs_for(kernel, &memo, a, m, 1.0))
                .map(|(code, prob)| Shape { code, prob })
                .collect();
            memo.insert((a, m), Arc::new(shapes));
        }
    }
    let mut jobs = Vec::new();
    for (a, &mu) in spec.root_dist().iter().enumerate() {
        if mu > 0.0 {
            jobs.extend(jobs_for(kernel, &memo, a, n, mu));
        }
    }
    Ok(TreeEnumerator { inner: JobIter::new(jobs) })
}

fn jobs_for(
    kernel: &OffspringKernel,
    memo: &HashMap<(usize, usize), ShapeList>,
    root: usize,
    size: usize,
    root_weight: f64,
) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (c, &q) in kernel.row(root) {
        let r = c.arity();
        if r == 0 {
            if size == 1 {
                jobs.push(Job { root, weight: root_weight * q, lists: Vec::new() });
            }
            continue;
        }
        if size < r + 1 {
            continue;
        }
        let mut parts = Vec::with_capacity(r);
        compositions(c, memo, size - 1, &mut parts, &mut |lists| {
            jobs.push(Job { root, weight: root_weight * q, lists });
        });
    }
    jobs
}

/// Calls `emit` with the children's shape lists for every split of `total`
/// over the children of `c` in which every child size is realisable.
fn compositions(
    c: &OffspringConfig,
    memo: &HashMap<(usize, usize), ShapeList>,
    total: usize,
    parts: &mut Vec<ShapeList>,
    emit: &mut dyn FnMut(Vec<ShapeList>),
) {
    let i = parts.len();
    let remaining_children = c.arity() - i;
    if remaining_children == 0 {
        if total == 0 {
            emit(parts.clone());
        }
        return;
    }
    let ty = c.children()[i];
    let max_here = total.saturating_sub(remaining_children - 1);
    for s in 1..=max_here {
        let list = match memo.get(&(ty, s)) {
            Some(l) if !l.is_empty() => l.clone(),
            _ => continue,
        };
        parts.push(list);
        compositions(c, memo, total - s, parts, emit);
        parts.pop();
    }
}

/// Odometer over the jobs and, within a job, over the children's shapes.
struct JobIter {
    jobs: Vec<Job>,
    job: usize,
    digits: Vec<usize>,
    fresh: bool,
}

impl JobIter {
    fn new(jobs: Vec<Job>) -> Self {
        Self { jobs, job: 0, digits: Vec::new(), fresh: true }
    }
}

impl Iterator for JobIter {
    type Item = (Vec<(usize, usize)>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let job = self.jobs.get(self.job)?;
            if self.fresh {
                self.digits = vec![0; job.lists.len()];
                self.fresh = false;
            } else {
                // Advance the odometer, rightmost digit fastest.
                let mut i = self.digits.len();
                let mut carried_out = true;
                while i > 0 {
                    i -= 1;
                    self.digits[i] += 1;
                    if self.digits[i] < job.lists[i].len() {
                        carried_out = false;
                        break;
                    }
                    self.digits[i] = 0;
                }
                if carried_out {
                    self.job += 1;
                    self.fresh = true;
                    continue;
                }
            }
            let mut code = vec![(job.root, job.lists.len())];
            let mut prob = job.weight;
            for (list, &d) in job.lists.iter().zip(&self.digits) {
                let shape = &list[d];
                code.extend_from_slice(&shape.code);
                prob *= shape.prob;
            }
            return Some((code, prob));
        }
    }
}

/// Lazy stream of `(tree, probability)` pairs of one size.
pub struct TreeEnumerator {
    inner: JobIter,
}

impl TreeEnumerator {
    /// The same stream as preorder `(type, arity)` codes, skipping tree
    /// construction.
    pub fn codes(self) -> impl Iterator<Item = (Vec<(usize, usize)>, f64)> {
        self.inner
    }
}

impl Iterator for TreeEnumerator {
    type Item = (TypedTree, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.inner
            .next()
            .map(|(code, p)| (TypedTree::from_preorder(&code).expect("enumerated codes are well formed"), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OffspringLaw, PairKernel, TypeAlphabet};

    fn binary() -> GWSpec {
        GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap()
    }

    #[test]
    fn binary_three_has_one_tree() {
        let trees: Vec<_> = enumerate_trees(&binary(), 3).unwrap().collect();
        assert_eq!(trees.len(), 1);
        assert!((trees[0].1 - 0.125).abs() < 1e-15);
        assert_eq!(trees[0].0.size(), 3);
    }

    #[test]
    fn binary_nine_is_catalan_four() {
        let trees: Vec<_> = enumerate_trees(&binary(), 9).unwrap().collect();
        assert_eq!(trees.len(), 14);
        let mut codes: Vec<_> = trees.iter().map(|(t, _)| t.preorder()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 14);
    }

    #[test]
    fn size_one_one_per_type() {
        let q = PairKernel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let spec = GWSpec::product(
            TypeAlphabet::indexed(2).unwrap(),
            vec![0.3, 0.7],
            OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(),
            q,
        )
        .unwrap();
        let trees: Vec<_> = enumerate_trees(&spec, 1).unwrap().collect();
        assert_eq!(trees.len(), 2);
        assert!((trees[0].1 - 0.15).abs() < 1e-15);
        assert!((trees[1].1 - 0.35).abs() < 1e-15);
    }

    #[test]
    fn no_unary_means_no_size_two() {
        assert_eq!(enumerate_trees(&binary(), 2).unwrap().count(), 0);
    }

    #[test]
    fn guard_refuses_large_sizes() {
        let spec = GWSpec::single_type(OffspringLaw::poisson(1.0, 10).unwrap()).unwrap();
        assert!(matches!(enumerate_trees(&spec, 30), Err(Error::TooLarge { .. })));
    }
}
