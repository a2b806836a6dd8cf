//! Reproducible random generation of unconditioned and size-conditioned
//! typed trees.

mod exact;
mod rng;

pub use exact::{sample_conditioned_exact, ExactSampler};
pub use rng::RngHandle;

use std::collections::VecDeque;

use rand::distr::{weighted::WeightedIndex, Distribution};

use crate::exact::{admissible_set, size_law};
use crate::model::{GWSpec, OffspringConfig, TypedTree};
use crate::{Error, Result};

/// Limits for rejection sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleBudget {
    pub max_attempts: u64,
    pub size_cap: usize,
}

impl SampleBudget {
    pub fn new(max_attempts: u64, size_cap: usize) -> Result<Self> {
        if max_attempts == 0 || size_cap == 0 {
            return Err(Error::InvalidArgument("sample budget entries must be positive".into()));
        }
        Ok(Self { max_attempts, size_cap })
    }
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self { max_attempts: 10_000_000, size_cap: 1_000_000 }
    }
}

/// Outcome of unconditioned growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampled {
    Tree(TypedTree),
    /// The tree grew beyond the size cap and was abandoned.
    Overflow,
}

/// Forward sampler with the per-type configuration laws prepared once.
pub struct ForwardSampler<'a> {
    spec: &'a GWSpec,
    root: WeightedIndex<f64>,
    configs: Vec<Vec<&'a OffspringConfig>>,
    laws: Vec<WeightedIndex<f64>>,
}

impl<'a> ForwardSampler<'a> {
    pub fn new(spec: &'a GWSpec) -> Result<Self> {
        let root = WeightedIndex::new(spec.root_dist())
            .map_err(|e| Error::InvalidModel(format!("root distribution: {e}")))?;
        let mut configs = Vec::new();
        let mut laws = Vec::new();
        for a in 0..spec.num_types() {
            let row = spec.kernel().row(a);
            configs.push(row.keys().collect());
            laws.push(
                WeightedIndex::new(row.values().copied())
                    .map_err(|e| Error::InvalidModel(format!("kernel row {a}: {e}")))?,
            );
        }
        Ok(Self { spec, root, configs, laws })
    }

    pub fn spec(&self) -> &GWSpec {
        self.spec
    }

    /// Breadth-first growth, abandoned once the size exceeds `size_cap`.
    pub fn sample(&self, rng: &mut RngHandle, size_cap: usize) -> Sampled {
        let mut tree = TypedTree::leaf(self.root.sample(rng));
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let a = tree.ty(v);
            let c = self.configs[a][self.laws[a].sample(rng)];
            if tree.size() + c.arity() > size_cap {
                return Sampled::Overflow;
            }
            for &t in c.children() {
                let id = tree.add_child(v, t);
                queue.push_back(id);
            }
        }
        Sampled::Tree(tree)
    }
}

/// One unconditioned tree: root type from the root law, every vertex's
/// configuration drawn independently from the kernel row of its type.
pub fn sample_unconditioned(spec: &GWSpec, rng: &mut RngHandle, size_cap: usize) -> Result<Sampled> {
    Ok(ForwardSampler::new(spec)?.sample(rng, size_cap))
}

/// A tree conditioned on `|T| = n`, by drawing unconditioned trees until one
/// has exactly `n` vertices.
pub fn sample_conditioned_rejection(
    spec: &GWSpec,
    n: usize,
    rng: &mut RngHandle,
    budget: SampleBudget,
) -> Result<TypedTree> {
    let table = size_law(spec, n)?;
    if admissible_set(&table, spec.root_dist()).contains(n) != Some(true) {
        return Err(Error::NotAdmissible(n));
    }
    let sampler = ForwardSampler::new(spec)?;
    rejection_with(&sampler, n, rng, budget)
}

/// Rejection loop with a prepared sampler; the caller vouches that `n` is
/// admissible.
pub fn rejection_with(
    sampler: &ForwardSampler<'_>,
    n: usize,
    rng: &mut RngHandle,
    budget: SampleBudget,
) -> Result<TypedTree> {
    let cap = n.min(budget.size_cap);
    for _ in 0..budget.max_attempts {
        if let Sampled::Tree(t) = sampler.sample(rng, cap) {
            if t.size() == n {
                return Ok(t);
            }
        }
    }
    Err(Error::BudgetExhausted { attempts: budget.max_attempts })
}
