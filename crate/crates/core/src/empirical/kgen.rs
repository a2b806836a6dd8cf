use std::collections::BTreeMap;
use std::fmt;

use crate::model::{OffspringConfig, TypeAlphabet, TypedTree};
use crate::{Error, Result};

/// A typed planar tree of depth at most `k`, stored as its preorder listing
/// of `(type, arity)`. Vertices at the truncation depth are listed with arity
/// 0, so patterns compare syntactically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    code: Vec<(u32, u32)>,
}

impl Pattern {
    pub fn from_code(code: Vec<(u32, u32)>) -> Result<Self> {
        // Validate that the arities describe exactly one tree.
        let mut open: i64 = 1;
        for (i, &(_, ar)) in code.iter().enumerate() {
            if open == 0 {
                return Err(Error::InvalidArgument(format!("pattern code has extra vertex at {i}")));
            }
            open += ar as i64 - 1;
        }
        if open != 0 || code.is_empty() {
            return Err(Error::InvalidArgument("pattern code is incomplete".into()));
        }
        Ok(Self { code })
    }

    /// Subtree of `tree` rooted at `v`, cut at depth `k` below `v`.
    pub fn from_subtree(tree: &TypedTree, v: usize, k: usize) -> Self {
        let mut code = Vec::new();
        let mut stack = vec![(v, 0usize)];
        while let Some((w, d)) = stack.pop() {
            let node = tree.node(w);
            if d == k {
                code.push((node.ty as u32, 0));
            } else {
                code.push((node.ty as u32, node.children.len() as u32));
                stack.extend(node.children.iter().rev().map(|&c| (c, d + 1)));
            }
        }
        Self { code }
    }

    /// The depth-1 pattern of a vertex of type `ty` with configuration `c`.
    pub fn from_offspring(ty: usize, c: &OffspringConfig) -> Self {
        let mut code = vec![(ty as u32, c.arity() as u32)];
        code.extend(c.children().iter().map(|&t| (t as u32, 0)));
        Self { code }
    }

    /// Root type and configuration; the inverse of [`Pattern::from_offspring`]
    /// on depth-1 patterns.
    pub fn to_offspring(&self) -> (usize, OffspringConfig) {
        let children = self.root_child_positions().into_iter().map(|i| self.code[i].0 as usize).collect();
        (self.root_type(), OffspringConfig::new(children))
    }

    pub fn code(&self) -> &[(u32, u32)] {
        &self.code
    }

    pub fn root_type(&self) -> usize {
        self.code[0].0 as usize
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Depth of every listed vertex.
    pub fn depths(&self) -> Vec<usize> {
        let mut depths = Vec::with_capacity(self.code.len());
        // Stack of (depth, children still expected) for open vertices.
        let mut stack: Vec<(usize, u32)> = Vec::new();
        for &(_, ar) in &self.code {
            while matches!(stack.last(), Some(&(_, 0))) {
                stack.pop();
            }
            let d = match stack.last_mut() {
                Some(top) => {
                    top.1 -= 1;
                    top.0 + 1
                }
                None => 0,
            };
            depths.push(d);
            stack.push((d, ar));
        }
        depths
    }

    /// Keep vertices at depth `<= j`, cutting those at depth `j`.
    pub fn truncate(&self, j: usize) -> Pattern {
        let code = self
            .code
            .iter()
            .zip(self.depths())
            .filter(|&(_, d)| d <= j)
            .map(|(&(t, ar), d)| (t, if d == j { 0 } else { ar }))
            .collect();
        Pattern { code }
    }

    fn subtree_end(&self, start: usize) -> usize {
        let mut open = 1i64;
        let mut i = start;
        while open > 0 {
            open += self.code[i].1 as i64 - 1;
            i += 1;
        }
        i
    }

    fn root_child_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.code[0].1 as usize);
        let mut i = 1;
        for _ in 0..self.code[0].1 {
            out.push(i);
            i = self.subtree_end(i);
        }
        out
    }

    /// Patterns rooted at the root's children, left to right.
    pub fn root_children(&self) -> Vec<Pattern> {
        self.root_child_positions()
            .into_iter()
            .map(|i| Pattern { code: self.code[i..self.subtree_end(i)].to_vec() })
            .collect()
    }

    /// Types of the vertices at depth `d`, in preorder.
    pub fn types_at_depth(&self, d: usize) -> Vec<usize> {
        self.code.iter().zip(self.depths()).filter(|&(_, dd)| dd == d).map(|(&(t, _), _)| t as usize).collect()
    }

    /// `(position, type, arity)` of the vertices at depth `d`, in preorder.
    pub fn vertices_at_depth(&self, d: usize) -> Vec<(usize, usize, usize)> {
        self.code
            .iter()
            .zip(self.depths())
            .enumerate()
            .filter(|&(_, (_, dd))| dd == d)
            .map(|(i, (&(t, ar), _))| (i, t as usize, ar as usize))
            .collect()
    }

    pub fn render(&self, alphabet: &TypeAlphabet) -> String {
        let tree = TypedTree::from_preorder(
            &self.code.iter().map(|&(t, a)| (t as usize, a as usize)).collect::<Vec<_>>(),
        )
        .expect("pattern codes are valid trees");
        tree.render(alphabet)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.code.iter().map(|(t, a)| format!("{t}:{a}")).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Probability measure on depth-`<= k` patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct GenMeasureK {
    k: usize,
    num_types: usize,
    mass: BTreeMap<Pattern, f64>,
}

impl GenMeasureK {
    pub fn new(k: usize, num_types: usize, mut mass: BTreeMap<Pattern, f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let total: f64 = mass.values().sum();
        if mass.values().any(|m| !m.is_finite() || *m < 0.0) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("k-generation measure sums to {total}")));
        }
        for p in mass.keys() {
            if p.depths().into_iter().max().unwrap_or(0) > k {
                return Err(Error::InvalidArgument(format!("pattern {p} is deeper than {k}")));
            }
            if p.code.iter().any(|&(t, _)| t as usize >= num_types) {
                return Err(Error::InvalidArgument(format!("pattern {p} has a type out of range")));
            }
        }
        mass.retain(|_, m| *m > 0.0);
        Ok(Self { k, num_types, mass })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn get(&self, p: &Pattern) -> f64 {
        self.mass.get(p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, &f64)> {
        self.mass.iter()
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// Image under truncation to depth `j <= k`.
    pub fn project(&self, j: usize) -> Result<GenMeasureK> {
        if j == 0 || j > self.k {
            return Err(Error::InvalidArgument(format!("cannot project depth {} to {j}", self.k)));
        }
        let mut mass = BTreeMap::new();
        for (p, m) in &self.mass {
            *mass.entry(p.truncate(j)).or_insert(0.0) += m;
        }
        Ok(GenMeasureK { k: j, num_types: self.num_types, mass })
    }
}

pub fn kgen_counts(tree: &TypedTree, k: usize) -> BTreeMap<Pattern, u64> {
    let mut counts = BTreeMap::new();
    for v in 0..tree.size() {
        *counts.entry(Pattern::from_subtree(tree, v, k)).or_insert(0) += 1;
    }
    counts
}

/// Empirical k-generation measure: uniform over vertices of the depth-`k`
/// truncation of the subtree they root.
pub fn kgen_measure(tree: &TypedTree, k: usize, num_types: usize) -> Result<GenMeasureK> {
    let n = tree.size() as f64;
    let mass = kgen_counts(tree, k).into_iter().map(|(p, c)| (p, c as f64 / n)).collect();
    GenMeasureK::new(k, num_types, mass)
}

/// Shift defect of a k-generation measure, indexed by depth-`<= k-1`
/// patterns `a`: the mass of patterns truncating to `a` minus the expected
/// number of root children whose depth-`(k-1)` pattern is `a`.
pub fn shift_defect_k(mu: &GenMeasureK) -> BTreeMap<Pattern, f64> {
    let j = mu.k() - 1;
    let mut defect: BTreeMap<Pattern, f64> = BTreeMap::new();
    for (b, m) in mu.iter() {
        *defect.entry(b.truncate(j)).or_insert(0.0) += m;
        for child in b.root_children() {
            // Children of a depth-k pattern are depth-(k-1) patterns already.
            *defect.entry(child).or_insert(0.0) -= m;
        }
    }
    defect
}

pub fn is_shift_invariant_k(mu: &GenMeasureK, tol: f64) -> bool {
    shift_defect_k(mu).values().all(|d| d.abs() <= tol)
}
