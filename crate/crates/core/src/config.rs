//! JSON input files: model configurations and measures to evaluate.
//!
//! A model file lists the type labels, the root law, and either an explicit
//! offspring kernel or a product form (offspring-number law plus a Markov
//! kernel on child types):
//!
//! ```json
//! {
//!   "types": ["a", "b"],
//!   "root": {"a": 0.5, "b": 0.5},
//!   "law": {"kary": 2},
//!   "pair": {"a": {"a": 0.7, "b": 0.3}, "b": {"a": 0.4, "b": 0.6}}
//! }
//! ```
//!
//! or, with an explicit kernel,
//!
//! ```json
//! {
//!   "types": ["r", "t"],
//!   "root": {"r": 1.0},
//!   "kernel": {
//!     "r": [{"arity": 0, "children": [], "prob": 0.25},
//!           {"arity": 1, "children": ["t"], "prob": 0.25},
//!           {"arity": 3, "children": ["r", "r", "t"], "prob": 0.5}],
//!     "t": [{"arity": 0, "children": [], "prob": 1.0}]
//!   }
//! }
//! ```
//!
//! Unknown fields are rejected and structural errors carry the JSON path of
//! the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::empirical::{GenMeasureK, OffspringMeasure, PairMeasure, Pattern};
use crate::model::{GWSpec, OffspringConfig, OffspringKernel, OffspringLaw, PairKernel, TypeAlphabet, TypedTree};
use crate::{Error, Result};

/// Analytic or explicit offspring-number law; exactly one of `poisson`,
/// `uniform`, `kary`, `probs` must be given. `n_max` is the truncation cap
/// for `poisson`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    #[serde(default)]
    pub poisson: Option<f64>,
    #[serde(default)]
    pub uniform: Option<usize>,
    #[serde(default)]
    pub kary: Option<usize>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    #[serde(default)]
    pub n_max: Option<usize>,
}

/// Default truncation for analytic laws with unbounded support.
pub const DEFAULT_POISSON_NMAX: usize = 40;

impl LawConfig {
    pub fn build(&self) -> Result<OffspringLaw> {
        let given = [self.poisson.is_some(), self.uniform.is_some(), self.kary.is_some(), self.probs.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(config_err("law", "give exactly one of poisson, uniform, kary, probs"));
        }
        if self.n_max.is_some() && self.poisson.is_none() {
            return Err(config_err("law.n_max", "only used with poisson"));
        }
        if let Some(l) = self.poisson {
            OffspringLaw::poisson(l, self.n_max.unwrap_or(DEFAULT_POISSON_NMAX))
        } else if let Some(k) = self.uniform {
            OffspringLaw::uniform(k)
        } else if let Some(k) = self.kary {
            OffspringLaw::kary(k)
        } else {
            OffspringLaw::new(self.probs.clone().unwrap_or_default())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub arity: usize,
    pub children: Vec<String>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub types: Vec<String>,
    /// Root law by label; omitted labels get probability zero.
    pub root: BTreeMap<String, f64>,
    #[serde(default)]
    pub kernel: Option<BTreeMap<String, Vec<KernelEntry>>>,
    #[serde(default)]
    pub law: Option<LawConfig>,
    /// Child-type kernel by parent label; may be omitted for one type.
    #[serde(default)]
    pub pair: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(default)]
    pub criticality_tol: Option<f64>,
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

fn label_index(alphabet: &TypeAlphabet, label: &str, path: &str) -> Result<usize> {
    alphabet.index_of(label).ok_or_else(|| config_err(path, format!("unknown type label {label:?}")))
}

/// Dense vector over the alphabet from a label map.
fn by_label(alphabet: &TypeAlphabet, map: &BTreeMap<String, f64>, path: &str) -> Result<Vec<f64>> {
    let mut out = vec![0.0; alphabet.len()];
    for (label, &v) in map {
        out[label_index(alphabet, label, &format!("{path}.{label}"))?] = v;
    }
    Ok(out)
}

impl ModelConfig {
    pub fn build(&self) -> Result<GWSpec> {
        let alphabet = TypeAlphabet::new(self.types.iter().cloned())?;
        let root = by_label(&alphabet, &self.root, "root")?;
        let spec = match (&self.kernel, &self.law) {
            (Some(_), Some(_)) => return Err(config_err("kernel", "give either kernel or law, not both")),
            (None, None) => return Err(config_err("law", "give either kernel or law")),
            (Some(rows), None) => {
                if self.pair.is_some() {
                    return Err(config_err("pair", "only used together with law"));
                }
                let mut dense = vec![BTreeMap::new(); alphabet.len()];
                for (label, entries) in rows {
                    let a = label_index(&alphabet, label, &format!("kernel.{label}"))?;
                    for (i, e) in entries.iter().enumerate() {
                        let path = format!("kernel.{label}[{i}]");
                        if e.children.len() != e.arity {
                            return Err(config_err(&path, "arity differs from the number of children"));
                        }
                        let children = e
                            .children
                            .iter()
                            .map(|c| label_index(&alphabet, c, &format!("{path}.children")))
                            .collect::<Result<Vec<_>>>()?;
                        *dense[a].entry(OffspringConfig::new(children)).or_insert(0.0) += e.prob;
                    }
                }
                GWSpec::new(alphabet, root, OffspringKernel::new(dense)?)?
            }
            (None, Some(law)) => {
                let law = law.build()?;
                let pair = match &self.pair {
                    None if alphabet.len() == 1 => PairKernel::single(),
                    None => return Err(config_err("pair", "required with more than one type")),
                    Some(rows) => {
                        let mut dense = vec![vec![0.0; alphabet.len()]; alphabet.len()];
                        for (label, row) in rows {
                            let a = label_index(&alphabet, label, &format!("pair.{label}"))?;
                            dense[a] = by_label(&alphabet, row, &format!("pair.{label}"))?;
                        }
                        PairKernel::new(dense)?
                    }
                };
                GWSpec::product(alphabet, root, law, pair)?
            }
        };
        Ok(match self.criticality_tol {
            Some(t) => spec.with_criticality_tol(t),
            None => spec,
        })
    }
}

/// Parse JSON text into `T`, reporting the path of the failing field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config { path, message: e.into_inner().to_string() }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text)
}

pub fn load_model(path: &Path) -> Result<GWSpec> {
    read_json::<ModelConfig>(path)?.build()
}

/// Measure file for the rate evaluators; exactly one field is given.
///
/// * `pair`: parent label -> child label -> mass;
/// * `offspring`: list of `{type, children, mass}`;
/// * `kgen`: depth `k` and a list of `{pattern, mass}` with patterns written
///   as trees, e.g. `a(b,a(b,b))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub pair: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(default)]
    pub offspring: Option<Vec<OffspringEntry>>,
    #[serde(default)]
    pub kgen: Option<KgenConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffspringEntry {
    #[serde(rename = "type")]
    pub ty: String,
    pub children: Vec<String>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgenConfig {
    pub k: usize,
    pub patterns: Vec<PatternEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternEntry {
    pub pattern: String,
    pub mass: f64,
}

impl MeasureConfig {
    pub fn pair_measure(&self, alphabet: &TypeAlphabet) -> Result<PairMeasure> {
        let rows = self.pair.as_ref().ok_or_else(|| config_err("pair", "missing"))?;
        let k = alphabet.len();
        let mut dense = vec![vec![0.0; k]; k];
        for (label, row) in rows {
            let a = label_index(alphabet, label, &format!("pair.{label}"))?;
            dense[a] = by_label(alphabet, row, &format!("pair.{label}"))?;
        }
        PairMeasure::from_rows(&dense)
    }

    pub fn offspring_measure(&self, alphabet: &TypeAlphabet) -> Result<OffspringMeasure> {
        let entries = self.offspring.as_ref().ok_or_else(|| config_err("offspring", "missing"))?;
        let mut mass = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            let path = format!("offspring[{i}]");
            let a = label_index(alphabet, &e.ty, &format!("{path}.type"))?;
            let children = e
                .children
                .iter()
                .map(|c| label_index(alphabet, c, &format!("{path}.children")))
                .collect::<Result<Vec<_>>>()?;
            *mass.entry((a, OffspringConfig::new(children))).or_insert(0.0) += e.mass;
        }
        OffspringMeasure::new(alphabet.len(), mass)
    }

    pub fn kgen_measure(&self, alphabet: &TypeAlphabet) -> Result<GenMeasureK> {
        let cfg = self.kgen.as_ref().ok_or_else(|| config_err("kgen", "missing"))?;
        let mut mass = BTreeMap::new();
        for (i, e) in cfg.patterns.iter().enumerate() {
            let tree = TypedTree::parse(&e.pattern, alphabet)
                .map_err(|err| config_err(&format!("kgen.patterns[{i}].pattern"), err.to_string()))?;
            if tree.height() > cfg.k {
                return Err(config_err(&format!("kgen.patterns[{i}].pattern"), "deeper than k"));
            }
            *mass.entry(Pattern::from_subtree(&tree, tree.root(), cfg.k)).or_insert(0.0) += e.mass;
        }
        GenMeasureK::new(cfg.k, alphabet.len(), mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRODUCT: &str = r#"{
        "types": ["a", "b"],
        "root": {"a": 0.5, "b": 0.5},
        "law": {"kary": 2},
        "pair": {"a": {"a": 0.7, "b": 0.3}, "b": {"a": 0.4, "b": 0.6}}
    }"#;

    #[test]
    fn product_model_builds() {
        let spec = parse_json::<ModelConfig>(PRODUCT).unwrap().build().unwrap();
        assert_eq!(spec.num_types(), 2);
        assert!(spec.is_critical());
    }

    #[test]
    fn unknown_field_reports_path() {
        let bad = PRODUCT.replace(r#""kary": 2"#, r#""kary": 2, "bogus": 1"#);
        match parse_json::<ModelConfig>(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "law.bogus"),
            other => panic!("{other:?}"),
        }
        let bad = PRODUCT.replace(r#""root": {"a": 0.5, "b": 0.5}"#, r#""root": {"a": "x"}"#);
        match parse_json::<ModelConfig>(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "root.a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_kernel_and_measures() {
        let text = r#"{
            "types": ["r", "t"],
            "root": {"r": 1.0},
            "kernel": {
                "r": [{"arity": 0, "children": [], "prob": 0.25},
                      {"arity": 1, "children": ["t"], "prob": 0.25},
                      {"arity": 3, "children": ["r", "r", "t"], "prob": 0.5}],
                "t": [{"arity": 0, "children": [], "prob": 1.0}]
            }
        }"#;
        let spec = parse_json::<ModelConfig>(text).unwrap().build().unwrap();
        assert!(spec.is_critical());
        let m: MeasureConfig =
            parse_json(r#"{"kgen": {"k": 1, "patterns": [{"pattern": "r(r,t)", "mass": 1.0}]}}"#).unwrap();
        let mu = m.kgen_measure(spec.alphabet()).unwrap();
        assert_eq!(mu.support_len(), 1);
        let bad = text.replace(r#""children": ["t"]"#, r#""children": ["x"]"#);
        match parse_json::<ModelConfig>(&bad).unwrap().build() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "kernel.r[1].children"),
            other => panic!("{other:?}"),
        }
    }
}
