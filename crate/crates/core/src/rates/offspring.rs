use std::collections::BTreeMap;

use rand::Rng;

use super::value::{RateValue, Reason};
use crate::empirical::{is_shift_invariant, shift_defect, OffspringMeasure};
use crate::model::{analyze_model, mean_matrix, perron_vector, OffspringConfig, OffspringKernel};
use crate::numeric::{log_sum_exp, xlogx_over_y};
use crate::{Error, Result};

fn check_types(nu: &OffspringMeasure, kernel: &OffspringKernel) -> Result<()> {
    if nu.num_types() != kernel.num_types() {
        return Err(Error::InvalidArgument(format!(
            "offspring measure on {} types, kernel on {}",
            nu.num_types(),
            kernel.num_types()
        )));
    }
    Ok(())
}

/// `H(nu || nu_1 (x) Q)` without the shift-invariance gate.
fn entropy_against_kernel(nu: &OffspringMeasure, kernel: &OffspringKernel) -> RateValue {
    let nu1 = nu.nu1();
    let mut total = 0.0;
    for ((a, c), &m) in nu.iter() {
        let reference = nu1[*a] * kernel.prob(*a, c);
        if reference <= 0.0 {
            return RateValue::infinite(Reason::NotAbsContinuous);
        }
        total += xlogx_over_y(m, reference);
    }
    RateValue::finite(total)
}

/// Offspring rate: `H(nu || nu_1 (x) Q)` when `nu` is shift-invariant up to
/// `tol`, `+inf` otherwise.
pub fn offspring_rate_j(nu: &OffspringMeasure, kernel: &OffspringKernel, tol: f64) -> Result<RateValue> {
    check_types(nu, kernel)?;
    if !is_shift_invariant(nu, tol) {
        return Ok(RateValue::infinite(Reason::NotShiftInvariant));
    }
    Ok(entropy_against_kernel(nu, kernel))
}

/// `nu*(a, c) = Q{c | a} u(a)` with `u` the normalised right Perron vector
/// of the mean matrix. For a critical kernel this is the zero of the
/// offspring rate.
pub fn zero_rate_measure(kernel: &OffspringKernel) -> Result<OffspringMeasure> {
    let spectral = analyze_model(&mean_matrix(kernel))?;
    let u = &spectral.right_vec;
    let mass = kernel
        .rows()
        .iter()
        .enumerate()
        .flat_map(|(a, row)| row.iter().map(move |(c, p)| ((a, c.clone()), p * u[a])))
        .collect();
    OffspringMeasure::new(kernel.num_types(), mass)
}

/// Residuals of the three identities certified by [`tilted_kernel_from_measure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltCertificate {
    /// `|rho(tilted mean matrix) - 1|`.
    pub rho: f64,
    /// `max_a |u(a) - nu_1(a)|`.
    pub eigenvector: f64,
    /// `|H(nu || nu_1 (x) Q) - ∫ g dnu|`.
    pub entropy: f64,
}

/// The tilt `g(a, c) = log(nu(a, c) / (nu_1(a) Q{c | a}))` that turns `Q`
/// into a kernel whose stationary offspring measure is `nu`.
///
/// Convention: `g = -inf` on kernel-supported configurations that `nu` does
/// not charge (so that `sum_c Q e^g = 1` holds exactly), and `0` off the
/// kernel's support.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedKernel {
    pub g: BTreeMap<(usize, OffspringConfig), f64>,
    pub kernel: OffspringKernel,
    pub rho: f64,
    pub u: Vec<f64>,
    pub certificate: TiltCertificate,
}

impl TiltedKernel {
    pub fn g(&self, ty: usize, config: &OffspringConfig) -> f64 {
        self.g.get(&(ty, config.clone())).copied().unwrap_or(0.0)
    }
}

const TILT_EIGEN_TOL: f64 = 1e-8;
const TILT_ENTROPY_TOL: f64 = 1e-10;

pub fn tilted_kernel_from_measure(
    nu: &OffspringMeasure,
    kernel: &OffspringKernel,
    tol: f64,
) -> Result<TiltedKernel> {
    check_types(nu, kernel)?;
    let defect = shift_defect(nu).iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if defect > tol {
        return Err(Error::Precondition {
            reason: Reason::NotShiftInvariant.code(),
            detail: format!("shift defect {defect:e} exceeds {tol:e}"),
        });
    }
    let nu1 = nu.nu1();
    if let Some(a) = nu1.iter().position(|&m| m <= 0.0) {
        return Err(Error::Precondition {
            reason: Reason::Domain.code(),
            detail: format!("type {a} carries no mass"),
        });
    }
    let mut g = BTreeMap::new();
    for (a, row) in kernel.rows().iter().enumerate() {
        for c in row.keys() {
            g.insert((a, c.clone()), f64::NEG_INFINITY);
        }
    }
    let mut rows = vec![BTreeMap::new(); kernel.num_types()];
    let mut integral = 0.0;
    for ((a, c), &m) in nu.iter() {
        let q = kernel.prob(*a, c);
        if q <= 0.0 {
            return Err(Error::Precondition {
                reason: Reason::NotAbsContinuous.code(),
                detail: format!("configuration {c} of type {a} has kernel probability 0"),
            });
        }
        let value = (m / (nu1[*a] * q)).ln();
        g.insert((*a, c.clone()), value);
        integral += m * value;
        rows[*a].insert(c.clone(), m / nu1[*a]);
    }
    let tilted = OffspringKernel::new(rows)?;
    let (rho, u) = perron_vector(&mean_matrix(&tilted).0)?;
    let entropy = entropy_against_kernel(nu, kernel).value;
    let certificate = TiltCertificate {
        rho: (rho - 1.0).abs(),
        eigenvector: u.iter().zip(nu1).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        entropy: (entropy - integral).abs(),
    };
    if certificate.rho > TILT_EIGEN_TOL
        || certificate.eigenvector > TILT_EIGEN_TOL
        || certificate.entropy > TILT_ENTROPY_TOL
    {
        return Err(Error::Certificate(format!("{certificate:?}")));
    }
    Ok(TiltedKernel { g, kernel: tilted, rho, u, certificate })
}

/// `U_g(a) = log sum_c Q{c | a} e^{g(a, c)}`.
pub fn log_partition(kernel: &OffspringKernel, g: &impl Fn(usize, &OffspringConfig) -> f64) -> Vec<f64> {
    kernel
        .rows()
        .iter()
        .enumerate()
        .map(|(a, row)| log_sum_exp(row.iter().map(|(c, q)| q.ln() + g(a, c))))
        .collect()
}

/// `∫ [g(b, c) - sum_j U_g(c_j)] dnu(b, c)`: a lower bound on the offspring
/// rate of a shift-invariant `nu` for every bounded `g`, attained by the
/// tilt of [`tilted_kernel_from_measure`].
pub fn variational_functional(
    nu: &OffspringMeasure,
    g: impl Fn(usize, &OffspringConfig) -> f64,
    kernel: &OffspringKernel,
) -> Result<f64> {
    check_types(nu, kernel)?;
    let u = log_partition(kernel, &g);
    Ok(nu
        .iter()
        .map(|((b, c), m)| m * (g(*b, c) - c.children().iter().map(|&j| u[j]).sum::<f64>()))
        .sum())
}

/// Tilt every row by `e^{theta * arity}` with `theta` chosen by bisection so
/// that the Perron root is one.
fn criticalise(kernel: &OffspringKernel) -> Result<OffspringKernel> {
    let rho_at = |theta: f64| -> Result<(f64, OffspringKernel)> {
        let k = kernel.reweighted(|_, c| (theta * c.arity() as f64).exp())?;
        let (rho, _) = perron_vector(&mean_matrix(&k).0)?;
        Ok((rho, k))
    };
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    if rho_at(lo)?.0 > 1.0 || rho_at(hi)?.0 < 1.0 {
        return Err(Error::MeanUnreachable("arity tilt cannot reach criticality".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (rho, k) = rho_at(mid)?;
        if (rho - 1.0).abs() <= 1e-14 {
            return Ok(k);
        }
        if rho > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(rho_at(0.5 * (lo + hi))?.1)
}

/// A random shift-invariant offspring measure absolutely continuous with
/// respect to `kernel`: reweight the kernel by independent factors
/// `exp(spread * U(-1, 1))`, tilt by arity back to criticality, and take the stationary
/// offspring measure of the result.
pub fn random_shift_invariant_measure<R: Rng + ?Sized>(
    kernel: &OffspringKernel,
    rng: &mut R,
    spread: f64,
) -> Result<OffspringMeasure> {
    let noise: BTreeMap<(usize, OffspringConfig), f64> = kernel
        .rows()
        .iter()
        .enumerate()
        .flat_map(|(a, row)| row.keys().map(move |c| (a, c.clone())))
        .map(|key| (key, (spread * (2.0 * rng.random::<f64>() - 1.0)).exp()))
        .collect();
    let noisy = kernel.reweighted(|a, c| noise[&(a, c.clone())])?;
    zero_rate_measure(&criticalise(&noisy)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{product_kernel, OffspringLaw, PairKernel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel() -> OffspringKernel {
        let pair = PairKernel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        product_kernel(&OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(), &pair).unwrap()
    }

    #[test]
    fn zero_rate_measure_is_a_zero() {
        let nu = zero_rate_measure(&kernel()).unwrap();
        assert!(shift_defect(&nu).iter().all(|d| d.abs() < 1e-10));
        assert!(offspring_rate_j(&nu, &kernel(), 1e-9).unwrap().value <= 1e-12);
        let t = tilted_kernel_from_measure(&nu, &kernel(), 1e-9).unwrap();
        assert!(t.g.values().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn point_mass_is_not_shift_invariant() {
        let nu = OffspringMeasure::new(2, BTreeMap::from([((0, OffspringConfig::empty()), 1.0)])).unwrap();
        let r = offspring_rate_j(&nu, &kernel(), 1e-9).unwrap();
        assert_eq!(r.reason, Reason::NotShiftInvariant);
    }

    #[test]
    fn two_atom_hand_value() {
        // Single type, binary law: nu = 1/2 leaf + 1/2 binary is shift
        // invariant; against p(0) = 0.6, p(2) = 0.4 the rate is
        // 1/2 log(1/2 / 0.6) + 1/2 log(1/2 / 0.4).
        let law = OffspringLaw::new(vec![0.6, 0.0, 0.4]).unwrap();
        let k = product_kernel(&law, &PairKernel::single()).unwrap();
        let nu = OffspringMeasure::new(
            1,
            BTreeMap::from([
                ((0, OffspringConfig::empty()), 0.5),
                ((0, OffspringConfig::new(vec![0, 0])), 0.5),
            ]),
        )
        .unwrap();
        let expect = 0.5 * (0.5f64 / 0.6).ln() + 0.5 * (0.5f64 / 0.4).ln();
        assert!((offspring_rate_j(&nu, &k, 1e-9).unwrap().value - expect).abs() < 1e-15);
    }

    #[test]
    fn tilt_certificates_and_variational_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let nu = random_shift_invariant_measure(&kernel(), &mut rng, 1.0).unwrap();
            let j = offspring_rate_j(&nu, &kernel(), 1e-9).unwrap().value;
            assert!(j > 0.0);
            let t = tilted_kernel_from_measure(&nu, &kernel(), 1e-9).unwrap();
            let at_tilt = variational_functional(&nu, |a, c| t.g(a, c), &kernel()).unwrap();
            assert!((at_tilt - j).abs() < 1e-10, "{at_tilt} vs {j}");
            for _ in 0..20 {
                let g: BTreeMap<_, f64> =
                    t.g.keys().map(|k| (k.clone(), 4.0 * rng.random::<f64>() - 2.0)).collect();
                let v = variational_functional(&nu, |a, c| g[&(a, c.clone())], &kernel()).unwrap();
                assert!(v <= j + 1e-10);
            }
        }
    }

    #[test]
    fn kernel_null_config_is_rejected() {
        let law = OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap();
        let k = product_kernel(&law, &PairKernel::single()).unwrap();
        let nu = OffspringMeasure::new(
            1,
            BTreeMap::from([((0, OffspringConfig::empty()), 0.5), ((0, OffspringConfig::new(vec![0, 0])), 0.5)]),
        )
        .unwrap();
        assert!(tilted_kernel_from_measure(&nu, &k, 1e-9).is_ok());
        // A single infinite line is shift-invariant but has kernel mass 0.
        let nu = OffspringMeasure::new(1, BTreeMap::from([((0, OffspringConfig::new(vec![0])), 1.0)])).unwrap();
        let err = tilted_kernel_from_measure(&nu, &k, 1e-9).unwrap_err();
        assert_eq!(err.reason_code(), "not_abs_continuous");
    }
}
