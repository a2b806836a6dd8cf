use nalgebra::{DMatrix, DVector};

use super::kernel::MeanMatrix;
use crate::{Error, Result};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;
/// Shift used when plain power iteration fails to settle (periodic supports).
/// A unit shift keeps every eigenvalue of a periodic class strictly inside
/// the Perron root's modulus, so the restart converges quickly.
const RESTART_SHIFT: f64 = 1.0;

/// Perron–Frobenius data of a mean matrix together with its recurrent /
/// transient partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Largest eigenvalue.
    pub rho: f64,
    /// Right eigenvector `A u = rho u`, normalised to sum 1.
    pub right_vec: Vec<f64>,
    /// Left eigenvector `v A = rho v`, normalised to sum 1.
    pub left_vec: Vec<f64>,
    /// Types reachable from every type (recurrent states).
    pub recurrent: Vec<usize>,
    /// Remaining types, ordered so that children precede their parents.
    pub transient: Vec<usize>,
    /// Whether every entry of `A*` is positive.
    pub irreducible: bool,
}

impl SpectralData {
    pub fn is_critical(&self, tol: f64) -> bool {
        (self.rho - 1.0).abs() <= tol
    }
}

/// Largest eigenvalue and normalised eigenvector of a nonnegative matrix by
/// power iteration, restarting on `M + I` if the plain iteration stalls.
pub fn perron_vector(m: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    match power_iteration(m, 0.0) {
        Ok(r) => Ok(r),
        Err(_) => power_iteration(m, RESTART_SHIFT),
    }
}

fn power_iteration(m: &DMatrix<f64>, shift: f64) -> Result<(f64, Vec<f64>)> {
    let n = m.nrows();
    let shifted = m + DMatrix::identity(n, n) * shift;
    let mut u = DVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let w = &shifted * &u;
        let s = w.sum();
        if s <= 0.0 {
            // Nilpotent matrix: every eigenvalue is zero.
            return Ok((0.0, u.iter().copied().collect()));
        }
        residual = (&w - &u * s).amax();
        if residual <= POWER_TOL * s.max(1.0) {
            let u = w / s;
            return Ok((s - shift, u.iter().copied().collect()));
        }
        u = w / s;
    }
    Err(Error::EigenNoConvergence { iterations: POWER_MAX_ITER, residual })
}

/// Boolean transitive closure of the support: `reach[a][b]` iff `A^k(a, b) > 0`
/// for some `k >= 1`.
pub(crate) fn reachability(a: &DMatrix<f64>) -> Vec<Vec<bool>> {
    let n = a.nrows();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] > 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Spectral analysis of a mean matrix: Perron root, eigenvectors, and the
/// recurrent/transient partition. Fails if the matrix is not weakly
/// irreducible.
pub fn analyze_model(a: &MeanMatrix) -> Result<SpectralData> {
    let m = &a.0;
    let n = m.nrows();
    if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidModel("mean matrix must be finite and nonnegative".into()));
    }
    let reach = reachability(m);

    // The recurrent set is forced: a recurrent type must be reachable from
    // every type, and a type reachable from everything cannot be transient
    // (it would reach itself). Only verification remains.
    let recurrent: Vec<usize> = (0..n).filter(|&b| (0..n).all(|x| reach[x][b])).collect();
    if recurrent.is_empty() {
        return Err(Error::NotWeaklyIrreducible("no type is reachable from every type".into()));
    }
    let transient: Vec<usize> = (0..n).filter(|b| !recurrent.contains(b)).collect();
    for &b in &transient {
        if reach[b][b] {
            return Err(Error::NotWeaklyIrreducible(format!(
                "type {b} lies on a cycle but is not reachable from every type"
            )));
        }
        if let Some(&r) = recurrent.iter().find(|&&r| reach[r][b]) {
            return Err(Error::NotWeaklyIrreducible(format!(
                "transient type {b} has recurrent descendant {r}"
            )));
        }
    }

    // Height of a transient type within the transient sub-DAG; sorting by it
    // puts children before parents.
    let mut height = vec![0usize; n];
    let mut changed = true;
    while changed {
        changed = false;
        for &b in &transient {
            for &c in &transient {
                if m[(c, b)] > 0.0 && height[b] < height[c] + 1 {
                    height[b] = height[c] + 1;
                    changed = true;
                }
            }
        }
    }
    let mut transient_sorted = transient.clone();
    transient_sorted.sort_by_key(|&b| (height[b], b));

    let (rho, right_vec) = perron_vector(m)?;
    let (rho_left, left_vec) = perron_vector(&m.transpose())?;
    debug_assert!((rho - rho_left).abs() < 1e-8 * rho.max(1.0));

    Ok(SpectralData {
        rho,
        right_vec,
        left_vec,
        irreducible: transient.is_empty(),
        recurrent,
        transient: transient_sorted,
    })
}
