use std::cmp::Ordering;

use super::num::Q;
use crate::rational::Rational;

/// `real + inf·δ` for a positive infinitesimal δ, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Delta {
    pub real: Q,
    pub inf: Q,
}

impl Delta {
    pub fn new(real: Q, inf: Q) -> Self {
        Delta { real, inf }
    }

    #[cfg(test)]
    pub fn real(real: Q) -> Self {
        Delta {
            real,
            inf: Q::default(),
        }
    }

    pub fn add_scaled(&mut self, other: &Delta, k: &Q) {
        self.real.add_mul(&other.real, k);
        if !other.inf.is_zero() {
            self.inf.add_mul(&other.inf, k);
        }
    }

    pub fn sub(&self, other: &Delta) -> Delta {
        Delta {
            real: self.real.sub(&other.real),
            inf: self.inf.sub(&other.inf),
        }
    }

    pub fn scaled(&self, k: &Q) -> Delta {
        Delta {
            real: self.real.mul(k),
            inf: self.inf.mul(k),
        }
    }

    /// Value once δ is replaced by a concrete positive rational.
    pub fn concretize(&self, delta: &Rational) -> Rational {
        self.real.to_rational() + self.inf.to_rational() * delta
    }

    /// Largest concrete δ bound under which `self ≤ other` survives
    /// substitution, if the relation holds symbolically and constrains δ.
    pub fn delta_limit(&self, other: &Delta) -> Option<Rational> {
        // self.real + self.inf·δ ≤ other.real + other.inf·δ
        if self.inf > other.inf && self.real < other.real {
            Some(other.real.sub(&self.real).to_rational() / self.inf.sub(&other.inf).to_rational())
        } else {
            None
        }
    }
}

impl PartialOrd for Delta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Delta {
    fn cmp(&self, other: &Self) -> Ordering {
        self.real
            .cmp(&other.real)
            .then_with(|| self.inf.cmp(&other.inf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn q(n: i64) -> Q {
        Q::int(n)
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a = Delta::new(q(1), q(-1)); // 1 − δ
        let b = Delta::real(q(1));
        let c = Delta::new(Q::from_rational(&ratio(1, 2)), q(100));
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn limit_keeps_strictness() {
        // 0 + δ ≤ 1 − δ  holds for δ ≤ 1/2
        let lhs = Delta::new(q(0), q(1));
        let rhs = Delta::new(q(1), q(-1));
        assert_eq!(lhs.delta_limit(&rhs), Some(ratio(1, 2)));
        assert_eq!(Delta::real(q(0)).delta_limit(&Delta::real(q(1))), None);
    }
}
