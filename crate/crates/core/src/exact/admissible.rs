use super::sizelaw::SizeLawTable;
use crate::numeric::gcd;

/// Sizes `n <= n_max` with `P{|T| = n} > 0`, described as a lattice: one
/// residue class modulo the period, positive from a stabilisation point on,
/// with finitely many gaps below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleSet {
    pub period: usize,
    /// Residue of every admissible size modulo `period`.
    pub residue: usize,
    /// Smallest `n0` such that every `n >= n0` in the residue class, up to
    /// `n_max`, is admissible.
    pub stabilization: usize,
    /// Sizes in the residue class below `stabilization` that are not admissible.
    pub exceptions: Vec<usize>,
    pub n_max: usize,
}

impl AdmissibleSet {
    /// Membership for `n <= n_max`; `None` beyond the table.
    pub fn contains(&self, n: usize) -> Option<bool> {
        if n > self.n_max {
            return None;
        }
        Some(n >= 1 && n % self.period == self.residue && !self.exceptions.contains(&n))
    }

    /// Admissible sizes in `1..=n_max`, ascending.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.n_max).filter(|&n| self.contains(n) == Some(true)).collect()
    }
}

/// Read the admissible lattice off a size-law table for the root law `mu`.
pub fn admissible_set(table: &SizeLawTable, root_dist: &[f64]) -> AdmissibleSet {
    let n_max = table.n_max();
    let positive: Vec<usize> =
        (1..=n_max).filter(|&n| table.log_total(root_dist, n) > f64::NEG_INFINITY).collect();
    if positive.len() <= 1 {
        // Only the bare root (or nothing at all) is reachable.
        let n0 = positive.first().copied().unwrap_or(1);
        let exceptions = if positive.is_empty() { vec![1] } else { Vec::new() };
        return AdmissibleSet { period: n_max.max(1), residue: n0 % n_max.max(1), stabilization: n0, exceptions, n_max };
    }
    let first = positive[0];
    let period = positive[1..].iter().fold(0, |g, &n| gcd(g, n - first));
    let residue = first % period;
    // Walk the class downwards from the top until the first gap.
    let mut stabilization = *positive.last().unwrap();
    while stabilization > period && positive.binary_search(&(stabilization - period)).is_ok() {
        stabilization -= period;
    }
    let exceptions = (1..stabilization)
        .filter(|&n| n % period == residue && positive.binary_search(&n).is_err())
        .collect();
    AdmissibleSet { period, residue, stabilization, exceptions, n_max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::size_law;
    use crate::model::{GWSpec, OffspringLaw};

    fn set_for(law: OffspringLaw, n_max: usize) -> AdmissibleSet {
        let spec = GWSpec::single_type(law).unwrap();
        admissible_set(&size_law(&spec, n_max).unwrap(), spec.root_dist())
    }

    #[test]
    fn binary_is_odd() {
        let s = set_for(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap(), 40);
        assert_eq!((s.period, s.residue, s.stabilization), (2, 1, 1));
        assert!(s.exceptions.is_empty());
        assert_eq!(s.contains(41), None);
    }

    #[test]
    fn poisson_is_everything() {
        let s = set_for(OffspringLaw::poisson(1.0, 20).unwrap(), 40);
        assert_eq!(s.period, 1);
        assert_eq!(s.members(), (1..=40).collect::<Vec<_>>());
    }

    #[test]
    fn ternary_is_one_mod_three() {
        let s = set_for(OffspringLaw::kary(3).unwrap(), 40);
        assert_eq!((s.period, s.residue), (3, 1));
        assert!(s.members().iter().all(|n| n % 3 == 1));
    }

    #[test]
    fn gaps_below_stabilisation() {
        // Arities {0, 3, 5}: sizes 1, 4, 6, 7, 9, 10, ... with 2, 3, 5, 8 missing.
        let s = set_for(OffspringLaw::new(vec![0.6, 0.0, 0.0, 0.2, 0.0, 0.2]).unwrap(), 60);
        assert_eq!(s.period, 1);
        for n in 1..=60 {
            let direct = size_law(&GWSpec::single_type(
                OffspringLaw::new(vec![0.6, 0.0, 0.0, 0.2, 0.0, 0.2]).unwrap()).unwrap(), 60).unwrap().f(0, n) > 0.0;
            assert_eq!(s.contains(n), Some(direct), "n={n}");
        }
        assert!(s.exceptions.contains(&2));
    }

    #[test]
    fn leaf_only_is_degenerate() {
        let s = set_for(OffspringLaw::new(vec![1.0]).unwrap(), 10);
        assert_eq!(s.members(), vec![1]);
    }
}
