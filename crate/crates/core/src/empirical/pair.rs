use crate::model::TypedTree;
use crate::{Error, Result};

/// Integer edge counts by (parent type, child type), row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairCounts {
    num_types: usize,
    counts: Vec<u64>,
}

impl PairCounts {
    pub fn from_counts(num_types: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != num_types * num_types {
            return Err(Error::InvalidArgument("pair counts must have |X|^2 entries".into()));
        }
        Ok(Self { num_types, counts })
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn get(&self, parent: usize, child: usize) -> u64 {
        self.counts[parent * self.num_types + child]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn edges(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Divide by the number of edges.
    pub fn measure(&self) -> Result<PairMeasure> {
        let e = self.edges();
        if e == 0 {
            return Err(Error::NoEdges);
        }
        PairMeasure::new(self.num_types, self.counts.iter().map(|&c| c as f64 / e as f64).collect())
    }
}

/// Probability matrix `mu(a, b)` on pairs of types, row-major with the
/// parent type as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMeasure {
    num_types: usize,
    mass: Vec<f64>,
}

impl PairMeasure {
    pub fn new(num_types: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != num_types * num_types || num_types == 0 {
            return Err(Error::InvalidArgument("pair measure must have |X|^2 entries".into()));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidArgument("pair measure has a negative entry".into()));
        }
        let s: f64 = mass.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("pair measure sums to {s}")));
        }
        Ok(Self { num_types, mass })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mass[a * self.num_types + b]
    }

    pub fn entries(&self) -> &[f64] {
        &self.mass
    }

    /// First-coordinate (parent) marginal.
    pub fn marginal1(&self) -> Vec<f64> {
        (0..self.num_types).map(|a| (0..self.num_types).map(|b| self.get(a, b)).sum()).collect()
    }

    /// Second-coordinate (child) marginal.
    pub fn marginal2(&self) -> Vec<f64> {
        (0..self.num_types).map(|b| (0..self.num_types).map(|a| self.get(a, b)).sum()).collect()
    }
}

pub fn pair_counts(tree: &TypedTree, num_types: usize) -> PairCounts {
    let mut counts = vec![0u64; num_types * num_types];
    for node in tree.nodes() {
        if let Some(p) = node.parent {
            counts[tree.ty(p) * num_types + node.ty] += 1;
        }
    }
    PairCounts { num_types, counts }
}

/// Empirical pair measure: uniform on the tree's (parent type, child type) edges.
pub fn pair_measure(tree: &TypedTree, num_types: usize) -> Result<PairMeasure> {
    pair_counts(tree, num_types).measure()
}
