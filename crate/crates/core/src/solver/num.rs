//! Exact rationals for the simplex tableau: a reduced `i64` fraction when it
//! fits, a big rational otherwise. Results are always normalized, so equal
//! values have equal representations.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::rational::Rational;

#[derive(Debug, Clone)]
pub enum Q {
    /// `num / den`, `den > 0`, `gcd(num, den) = 1`.
    Small(i64, i64),
    Big(Box<Rational>),
}

impl Default for Q {
    fn default() -> Self {
        Q::Small(0, 1)
    }
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

impl Q {
    pub fn int(v: i64) -> Q {
        Q::Small(v, 1)
    }

    /// Reduce `n / d` (d ≠ 0) into the narrowest representation.
    fn from_i128(n: i128, d: i128) -> Q {
        debug_assert!(d != 0);
        let g = gcd128(n, d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q::Small(n, d),
            _ => Q::Big(Box::new(Rational::new(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn from_rational(r: &Rational) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(Box::new(r.clone())),
        }
    }

    fn from_big(r: Rational) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(Box::new(r)),
        }
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            Q::Small(n, d) => Rational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Q::Small(n, _) => *n > 0,
            Q::Big(b) => b.is_positive(),
        }
    }

    pub fn add(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    if let Some(s) = a.checked_add(*c) {
                        return Q::Small(s, 1);
                    }
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                match a
                    .checked_mul(d)
                    .and_then(|x| c.checked_mul(b).and_then(|y| x.checked_add(y)))
                {
                    Some(n) => Q::from_i128(n, b * d),
                    None => Q::from_big(self.to_rational() + o.to_rational()),
                }
            }
            _ => Q::from_big(self.to_rational() + o.to_rational()),
        }
    }

    pub fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) => match n.checked_neg() {
                Some(m) => Q::Small(m, *d),
                None => Q::from_big(-self.to_rational()),
            },
            Q::Big(b) => Q::from_big(-(**b).clone()),
        }
    }

    pub fn sub(&self, o: &Q) -> Q {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    if let Some(p) = a.checked_mul(*c) {
                        return Q::Small(p, 1);
                    }
                }
                Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Q::from_big(self.to_rational() * o.to_rational()),
        }
    }

    pub fn recip(&self) -> Q {
        match self {
            Q::Small(n, d) => {
                debug_assert!(*n != 0);
                Q::from_i128(*d as i128, *n as i128)
            }
            Q::Big(b) => Q::from_big(b.recip()),
        }
    }

    /// `self += k·x`.
    pub fn add_mul(&mut self, k: &Q, x: &Q) {
        *self = self.add(&k.mul(x));
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => a == c && b == d,
            (Q::Big(a), Q::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Q {}

impl Hash for Q {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Q::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Q::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if b == d {
                    a.cmp(c)
                } else {
                    (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
                }
            }
            _ => {
                let (x, y) = (self.to_rational(), other.to_rational());
                // cross-multiplication avoids the division in Ratio's Ord
                (x.numer() * y.denom()).cmp(&(y.numer() * x.denom()))
            }
        }
    }
}

impl From<i64> for Q {
    fn from(v: i64) -> Self {
        Q::int(v)
    }
}
