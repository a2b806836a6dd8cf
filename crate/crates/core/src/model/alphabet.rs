use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// Ordered, finite set of type labels. Indices `0..len` are used everywhere
/// internally; labels only appear at the I/O boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeAlphabet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TypeAlphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidModel("alphabet must contain at least one type".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty()
                || !label
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.')
            {
                return Err(Error::InvalidModel(format!(
                    "type label {label:?} must be non-empty and use only letters, digits, '_', '-', '.'"
                )));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidModel(format!("duplicate type label {label:?}")));
            }
        }
        Ok(Self { labels, index })
    }

    /// Alphabet `t0, t1, ...` of the given size.
    pub fn indexed(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| format!("t{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, ty: usize) -> &str {
        &self.labels[ty]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// Offspring configuration `(n, a_1, ..., a_n)`: the ordered child types of a
/// vertex. The arity is the number of children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OffspringConfig {
    children: Vec<usize>,
}

impl OffspringConfig {
    pub fn new(children: Vec<usize>) -> Self {
        Self { children }
    }

    /// The childless configuration `(0, ∅)`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of children of type `ty`.
    pub fn multiplicity(&self, ty: usize) -> usize {
        self.children.iter().filter(|&&c| c == ty).count()
    }

    /// Child-type counts as a vector of length `num_types`.
    pub fn type_counts(&self, num_types: usize) -> Vec<usize> {
        let mut counts = vec![0; num_types];
        for &c in &self.children {
            counts[c] += 1;
        }
        counts
    }

    /// Children sorted by type: the multiset underlying the configuration.
    pub fn sorted_children(&self) -> Vec<usize> {
        let mut v = self.children.clone();
        v.sort_unstable();
        v
    }

    pub fn render(&self, alphabet: &TypeAlphabet) -> String {
        let kids: Vec<&str> = self.children.iter().map(|&c| alphabet.label(c)).collect();
        format!("({};{})", self.arity(), kids.join(","))
    }
}

impl fmt::Display for OffspringConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.arity())?;
        for c in &self.children {
            write!(f, ",{c}")?;
        }
        write!(f, ")")
    }
}

/// `m(a, c)`: number of occurrences of type `a` among the children of `c`.
pub fn multiplicity(ty: usize, config: &OffspringConfig) -> usize {
    config.multiplicity(ty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_counts_occurrences() {
        let (a, b) = (0, 1);
        assert_eq!(multiplicity(a, &OffspringConfig::new(vec![a, b, a])), 2);
        assert_eq!(multiplicity(a, &OffspringConfig::empty()), 0);
        assert_eq!(multiplicity(b, &OffspringConfig::new(vec![a, a])), 0);
    }

    #[test]
    fn alphabet_rejects_duplicates_and_bad_labels() {
        assert!(TypeAlphabet::new(["a", "a"]).is_err());
        assert!(TypeAlphabet::new(["a(b"]).is_err());
        assert!(TypeAlphabet::new(Vec::<String>::new()).is_err());
        let alpha = TypeAlphabet::new(["r", "t"]).unwrap();
        assert_eq!(alpha.index_of("t"), Some(1));
        assert_eq!(alpha.label(0), "r");
    }
}
