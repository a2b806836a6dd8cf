use std::collections::BTreeMap;
use std::fmt;

use crate::numeric::xlogx_over_y;

/// Why a rate is what it is; every value except [`Reason::Finite`] comes
/// with `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    Finite,
    NotAbsContinuous,
    NotShiftInvariant,
    MarginalViolation,
    Domain,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::Finite => "finite",
            Reason::NotAbsContinuous => "not_abs_continuous",
            Reason::NotShiftInvariant => "not_shift_invariant",
            Reason::MarginalViolation => "marginal_violation",
            Reason::Domain => "domain",
        }
    }
}

/// Nonnegative extended real with the reason for an infinite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub value: f64,
    pub reason: Reason,
}

impl RateValue {
    /// Finite value; rounding noise below zero is clamped to zero.
    pub fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite(), "finite rate expected, got {value}");
        Self { value: value.max(0.0), reason: Reason::Finite }
    }

    pub fn infinite(reason: Reason) -> Self {
        debug_assert!(reason != Reason::Finite);
        Self { value: f64::INFINITY, reason }
    }

    pub fn is_finite(&self) -> bool {
        self.reason == Reason::Finite
    }

    /// Sum of two rates; the first infinite reason wins.
    pub fn add(self, other: RateValue) -> RateValue {
        match (self.is_finite(), other.is_finite()) {
            (true, true) => RateValue::finite(self.value + other.value),
            (false, _) => self,
            (true, false) => other,
        }
    }

    /// `w * self` for `w >= 0`, with `0 * inf = 0`.
    pub fn scale(self, w: f64) -> RateValue {
        if w == 0.0 {
            RateValue::finite(0.0)
        } else if self.is_finite() {
            RateValue::finite(w * self.value)
        } else {
            self
        }
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", crate::numeric::sci(self.value), self.reason.code())
    }
}

/// `H(nu || xi) = sum nu log(nu / xi)` over dense vectors, `0 log 0 = 0`.
pub fn relative_entropy_vec(nu: &[f64], xi: &[f64]) -> RateValue {
    let mut total = 0.0;
    for (&a, &b) in nu.iter().zip(xi) {
        if a > 0.0 && b <= 0.0 {
            return RateValue::infinite(Reason::NotAbsContinuous);
        }
        total += xlogx_over_y(a, b);
    }
    RateValue::finite(total)
}

/// `H(nu || xi)` for finitely supported measures keyed by `K`.
pub fn relative_entropy<K: Ord>(nu: &BTreeMap<K, f64>, xi: &BTreeMap<K, f64>) -> RateValue {
    let mut total = 0.0;
    for (k, &a) in nu {
        if a == 0.0 {
            continue;
        }
        match xi.get(k) {
            Some(&b) if b > 0.0 => total += xlogx_over_y(a, b),
            _ => return RateValue::infinite(Reason::NotAbsContinuous),
        }
    }
    RateValue::finite(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let nu = BTreeMap::from([(1, 0.5), (2, 0.5)]);
        assert_eq!(relative_entropy(&nu, &nu).value, 0.0);
        let point = BTreeMap::from([(3, 1.0)]);
        let xi = BTreeMap::from([(3, 0.125), (4, 0.875)]);
        assert!((relative_entropy(&point, &xi).value - 8f64.ln()).abs() < 1e-15);
        let r = relative_entropy(&nu, &xi);
        assert_eq!((r.value, r.reason), (f64::INFINITY, Reason::NotAbsContinuous));
        assert_eq!(relative_entropy_vec(&[0.0, 1.0], &[0.0, 1.0]).value, 0.0);
    }

    #[test]
    fn arithmetic() {
        let inf = RateValue::infinite(Reason::Domain);
        assert_eq!(RateValue::finite(1.0).add(inf).reason, Reason::Domain);
        assert_eq!(inf.scale(0.0).value, 0.0);
        assert_eq!(RateValue::finite(-1e-18).value, 0.0);
    }
}
