//! Exact bit-size accounting.
//!
//! A quantity is `k`-bounded when `log2 |x| <= k` for every entry. Bounds that
//! arise here (Hadamard-style determinant bounds in particular) involve
//! logarithms of integers, so a [`BitBound`] is kept in the closed form
//! `log2(base) / denom` and compared by exponentiation instead of rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A non-negative real number of bits, represented exactly as
/// `log2(base) / denom` with `base >= 1` and `denom >= 1`.
#[derive(Clone, Debug)]
pub struct BitBound {
    base: BigUint,
    denom: u32,
}

impl BitBound {
    pub fn zero() -> Self {
        Self { base: BigUint::one(), denom: 1 }
    }

    /// Exactly `k` bits.
    pub fn from_bits(k: u64) -> Self {
        Self { base: BigUint::one() << k, denom: 1 }
    }

    /// `log2 |x|`, with the convention that `log2 0 = 0`.
    pub fn of_integer(x: &BigInt) -> Self {
        let mag = x.magnitude();
        if mag.is_zero() {
            return Self::zero();
        }
        Self { base: mag.clone(), denom: 1 }
    }

    /// Maximum of `log2 |x|` over a collection (0 when empty or all zero).
    pub fn of_entries<'a>(entries: impl IntoIterator<Item = &'a BigInt>) -> Self {
        let mut best = BigUint::one();
        for x in entries {
            if x.magnitude() > &best {
                best = x.magnitude().clone();
            }
        }
        Self { base: best, denom: 1 }
    }

    /// `log2(n)` for a positive count.
    pub fn log2_of(n: u64) -> Self {
        assert!(n >= 1, "log2 of zero");
        Self { base: BigUint::from(n), denom: 1 }
    }

    /// Rescale to a common denominator (`denom` must be a multiple of ours).
    fn base_at(&self, denom: u32) -> BigUint {
        debug_assert_eq!(denom % self.denom, 0);
        self.base.pow(denom / self.denom)
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = lcm(self.denom, other.denom);
        Self { base: self.base_at(d) * other.base_at(d), denom: d }
    }

    pub fn add_bits(&self, k: u64) -> Self {
        self.add(&Self::from_bits(k))
    }

    /// Multiply by a non-negative integer.
    pub fn scale(&self, n: u32) -> Self {
        Self { base: self.base.pow(n), denom: self.denom }
    }

    /// Divide by a positive integer.
    pub fn halve_by(&self, n: u32) -> Self {
        assert!(n >= 1);
        Self { base: self.base.clone(), denom: self.denom * n }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Whether `|x| <= 2^self`.
    pub fn admits(&self, x: &BigInt) -> bool {
        x.is_zero() || Self::of_integer(x) <= *self
    }

    /// Floating-point approximation in bits, for display only.
    pub fn approx(&self) -> f64 {
        let bits = self.base.bits();
        let value = if bits > 1000 {
            // Keep the top 64 bits and add back the shifted exponent.
            let shift = bits - 64;
            let top = (&self.base >> shift).to_f64().unwrap_or(f64::MAX);
            top.log2() + shift as f64
        } else {
            self.base.to_f64().map(f64::log2).unwrap_or(f64::INFINITY)
        };
        value / self.denom as f64
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

impl PartialEq for BitBound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BitBound {}

impl PartialOrd for BitBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitBound {
    fn cmp(&self, other: &Self) -> Ordering {
        // log2(a)/p vs log2(b)/q  <=>  a^q vs b^p
        self.base.pow(other.denom).cmp(&other.base.pow(self.denom))
    }
}

impl fmt::Display for BitBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.approx())
    }
}

/// Bit bound of a vector of integers.
pub fn vector_bits(v: &[BigInt]) -> BitBound {
    BitBound::of_entries(v.iter())
}

/// Convenience: `|x| <= 2^k` for an integer `k`.
pub fn fits_in_bits(x: &BigInt, k: u64) -> bool {
    x.abs() <= (BigInt::one() << k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_logs() {
        assert_eq!(BitBound::of_integer(&BigInt::from(8)), BitBound::from_bits(3));
        assert!(BitBound::of_integer(&BigInt::from(9)) > BitBound::from_bits(3));
        assert_eq!(BitBound::of_integer(&BigInt::from(0)), BitBound::zero());
        assert_eq!(BitBound::of_integer(&BigInt::from(-1)), BitBound::zero());
    }

    #[test]
    fn arithmetic_is_exact() {
        // 4 * log2(4) / 2 = 4
        let b = BitBound::log2_of(4).scale(4).halve_by(2);
        assert_eq!(b, BitBound::from_bits(4));
        // log2(3)/2 + log2(3)/2 = log2(3)
        let h = BitBound::log2_of(3).halve_by(2);
        assert_eq!(h.add(&h), BitBound::log2_of(3));
        assert!((BitBound::log2_of(5).approx() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn admits_matches_direct_check() {
        let k = BitBound::from_bits(5);
        assert!(k.admits(&BigInt::from(32)));
        assert!(k.admits(&BigInt::from(-32)));
        assert!(!k.admits(&BigInt::from(33)));
        assert!(fits_in_bits(&BigInt::from(-32), 5));
    }
}
