use super::alphabet::TypeAlphabet;
use super::kernel::{mean_matrix, product_kernel, MeanMatrix, OffspringKernel, PairKernel};
use super::law::OffspringLaw;
use super::spectral::{analyze_model, SpectralData};
use crate::{Error, Result, DEFAULT_CRITICALITY_TOL};

/// A fully specified multitype Galton–Watson model.
///
/// Immutable once built; the mean matrix and spectral data are derived at
/// construction. A model whose mean matrix is not weakly irreducible is still
/// usable for sampling and exact size laws, but carries no spectral data.
#[derive(Debug, Clone)]
pub struct GWSpec {
    alphabet: TypeAlphabet,
    root_dist: Vec<f64>,
    kernel: OffspringKernel,
    mean: MeanMatrix,
    spectral: std::result::Result<SpectralData, Error>,
    criticality_tol: f64,
    product: Option<(OffspringLaw, PairKernel)>,
}

impl GWSpec {
    pub fn new(alphabet: TypeAlphabet, root_dist: Vec<f64>, kernel: OffspringKernel) -> Result<Self> {
        if alphabet.len() != kernel.num_types() {
            return Err(Error::InvalidModel(format!(
                "alphabet has {} types but kernel has {} rows",
                alphabet.len(),
                kernel.num_types()
            )));
        }
        if root_dist.len() != alphabet.len() {
            return Err(Error::InvalidModel("root distribution has the wrong length".into()));
        }
        if root_dist.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidModel("root distribution has a negative entry".into()));
        }
        let s: f64 = root_dist.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("root distribution sums to {s}")));
        }
        let mean = mean_matrix(&kernel);
        let spectral = analyze_model(&mean);
        Ok(Self {
            alphabet,
            root_dist,
            kernel,
            mean,
            spectral,
            criticality_tol: DEFAULT_CRITICALITY_TOL,
            product: None,
        })
    }

    /// Model with offspring numbers from `law` and i.i.d. child types drawn
    /// from the parent's row of `pair`.
    pub fn product(
        alphabet: TypeAlphabet,
        root_dist: Vec<f64>,
        law: OffspringLaw,
        pair: PairKernel,
    ) -> Result<Self> {
        let kernel = product_kernel(&law, &pair)?;
        let mut spec = Self::new(alphabet, root_dist, kernel)?;
        spec.product = Some((law, pair));
        Ok(spec)
    }

    /// Single-type model with the given offspring law.
    pub fn single_type(law: OffspringLaw) -> Result<Self> {
        Self::product(TypeAlphabet::indexed(1)?, vec![1.0], law, PairKernel::single())
    }

    pub fn with_criticality_tol(mut self, tol: f64) -> Self {
        self.criticality_tol = tol;
        self
    }

    pub fn alphabet(&self) -> &TypeAlphabet {
        &self.alphabet
    }

    pub fn num_types(&self) -> usize {
        self.alphabet.len()
    }

    pub fn root_dist(&self) -> &[f64] {
        &self.root_dist
    }

    pub fn kernel(&self) -> &OffspringKernel {
        &self.kernel
    }

    pub fn mean(&self) -> &MeanMatrix {
        &self.mean
    }

    /// Spectral data, or the reason the mean matrix admits none.
    pub fn spectral(&self) -> Result<&SpectralData> {
        self.spectral.as_ref().map_err(Clone::clone)
    }

    pub fn criticality_tol(&self) -> f64 {
        self.criticality_tol
    }

    /// The offspring law and pair kernel, when the model was built as a product.
    pub fn product_parts(&self) -> Option<(&OffspringLaw, &PairKernel)> {
        self.product.as_ref().map(|(l, q)| (l, q))
    }

    pub fn is_critical(&self) -> bool {
        self.spectral.as_ref().is_ok_and(|s| s.is_critical(self.criticality_tol))
    }

    /// Same kernel, different root distribution.
    pub fn with_root_dist(&self, root_dist: Vec<f64>) -> Result<Self> {
        let mut spec = Self::new(self.alphabet.clone(), root_dist, self.kernel.clone())?;
        spec.product = self.product.clone();
        spec.criticality_tol = self.criticality_tol;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_single_type_is_critical() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        assert!(spec.is_critical());
        assert_eq!(spec.spectral().unwrap().recurrent, vec![0]);
    }

    #[test]
    fn leaf_only_model_has_no_spectral_data_but_builds() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![1.0]).unwrap()).unwrap();
        assert!(spec.spectral().is_err());
        assert!(!spec.is_critical());
    }

    #[test]
    fn bad_root_dist_rejected() {
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let r = GWSpec::product(TypeAlphabet::indexed(1).unwrap(), vec![0.7], law, PairKernel::single());
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }
}
