use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::GroupError;

/// An element `u · p^(−k)` of the localized ring ℤ[1/p].
///
/// Always normalized: zero is stored as `(0, 0)`, and a non-zero mantissa is
/// divisible by `p` only when `k = 0`. Structural equality is therefore value
/// equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicLaurent {
    mantissa: BigInt,
    expo: u32,
    prime: u64,
}

impl PAdicLaurent {
    pub fn new(mantissa: impl Into<BigInt>, expo: u32, prime: u64) -> Self {
        assert!(prime >= 2, "prime must be at least 2");
        let mut v = PAdicLaurent { mantissa: mantissa.into(), expo, prime };
        v.normalize();
        v
    }

    pub fn zero(prime: u64) -> Self {
        PAdicLaurent::new(0, 0, prime)
    }

    pub fn one(prime: u64) -> Self {
        PAdicLaurent::new(1, 0, prime)
    }

    pub fn from_int(n: i64, prime: u64) -> Self {
        PAdicLaurent::new(n, 0, prime)
    }

    /// `p^k` for any integer `k`.
    pub fn prime_power(prime: u64, k: i64) -> Self {
        if k >= 0 {
            PAdicLaurent::new(BigInt::from(prime).pow(k as u32), 0, prime)
        } else {
            PAdicLaurent::new(1, (-k) as u32, prime)
        }
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.expo = 0;
            return;
        }
        let p = BigInt::from(self.prime);
        while self.expo > 0 {
            let (q, r) = self.mantissa.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            self.mantissa = q;
            self.expo -= 1;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn expo(&self) -> u32 {
        self.expo
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.expo == 0
    }

    /// Multiplication by `p^k`, `k` of either sign.
    pub fn scale_by_prime_power(&self, k: i64) -> Self {
        if k >= 0 {
            let shift = (k as u32).min(self.expo);
            let rest = k as u32 - shift;
            PAdicLaurent::new(&self.mantissa * BigInt::from(self.prime).pow(rest), self.expo - shift, self.prime)
        } else {
            PAdicLaurent::new(self.mantissa.clone(), self.expo + (-k) as u32, self.prime)
        }
    }

    /// The mantissa scaled to a common denominator `p^target`, i.e. the integer
    /// `self · p^target`. Requires `target ≥ expo`.
    pub fn scaled_integer(&self, target: u32) -> BigInt {
        assert!(target >= self.expo);
        &self.mantissa * BigInt::from(self.prime).pow(target - self.expo)
    }

    /// Image in ℤ/m, with `p^(−1)` mapped to the modular inverse of `p`.
    pub fn reduce_mod(&self, modulus: u64) -> Result<u64, GroupError> {
        let inv = mod_inverse(self.prime % modulus, modulus)
            .ok_or(GroupError::ModulusNotCoprime { modulus, prime: self.prime })?;
        let m = BigInt::from(modulus);
        let u = self.mantissa.mod_floor(&m).to_u64().expect("residue fits in u64");
        Ok((u as u128 * pow_mod(inv, self.expo as u64, modulus) as u128 % modulus as u128) as u64)
    }

    /// Fractional part `self mod 1` as an exact rational `(num, den)` with
    /// `0 ≤ num < den = p^expo`.
    pub fn frac(&self) -> (BigInt, BigInt) {
        let den = BigInt::from(self.prime).pow(self.expo);
        (self.mantissa.mod_floor(&den), den)
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixed primes in Z[1/p] arithmetic");
    }
}

/// Modular inverse via the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(&BigInt::from(m)).to_u64().unwrap())
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

impl Add for &PAdicLaurent {
    type Output = PAdicLaurent;
    fn add(self, rhs: &PAdicLaurent) -> PAdicLaurent {
        self.check_prime(rhs);
        let k = self.expo.max(rhs.expo);
        PAdicLaurent::new(self.scaled_integer(k) + rhs.scaled_integer(k), k, self.prime)
    }
}

impl Sub for &PAdicLaurent {
    type Output = PAdicLaurent;
    fn sub(self, rhs: &PAdicLaurent) -> PAdicLaurent {
        self + &(-rhs)
    }
}

impl Mul for &PAdicLaurent {
    type Output = PAdicLaurent;
    fn mul(self, rhs: &PAdicLaurent) -> PAdicLaurent {
        self.check_prime(rhs);
        PAdicLaurent::new(&self.mantissa * &rhs.mantissa, self.expo + rhs.expo, self.prime)
    }
}

impl Neg for &PAdicLaurent {
    type Output = PAdicLaurent;
    fn neg(self) -> PAdicLaurent {
        PAdicLaurent { mantissa: -&self.mantissa, expo: self.expo, prime: self.prime }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PAdicLaurent {
            type Output = PAdicLaurent;
            fn $m(self, rhs: PAdicLaurent) -> PAdicLaurent {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for PAdicLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expo == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/{}^{}", self.mantissa, self.prime, self.expo)
        }
    }
}

impl PAdicLaurent {
    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(u: i64, k: u32) -> PAdicLaurent {
        PAdicLaurent::new(u, k, 2)
    }

    #[test]
    fn normalization() {
        assert_eq!(q(4, 3), q(1, 1));
        assert_eq!(q(0, 5), PAdicLaurent::zero(2));
        assert_eq!(q(0, 5).expo(), 0);
        assert_eq!(q(6, 1), q(3, 0));
        assert!(q(6, 1).is_integer());
    }

    #[test]
    fn half_mod_three_is_two() {
        assert_eq!(q(1, 1).reduce_mod(3).unwrap(), 2);
        assert_eq!(q(-1, 1).reduce_mod(3).unwrap(), 1);
        assert_eq!(q(1, 2).reduce_mod(5).unwrap(), 4);
        assert!(q(1, 1).reduce_mod(4).is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(PAdicLaurent::prime_power(2, 3), q(8, 0));
        assert_eq!(&PAdicLaurent::prime_power(2, -3) * &q(8, 0), q(1, 0));
        assert_eq!(q(3, 1).scale_by_prime_power(2), q(6, 0));
        assert_eq!(q(3, 1).scale_by_prime_power(-2), q(3, 3));
    }

    #[test]
    fn extended_gcd_inverse() {
        assert_eq!(mod_inverse(2, 3), Some(2));
        assert_eq!(mod_inverse(2, 9), Some(5));
        assert_eq!(mod_inverse(3, 9), None);
    }

    proptest! {
        #[test]
        fn ring_laws(a in -50i64..50, ka in 0u32..5, b in -50i64..50, kb in 0u32..5, c in -50i64..50, kc in 0u32..5) {
            let (x, y, z) = (q(a, ka), q(b, kb), q(c, kc));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&(&x - &y) + &y, x.clone());
            // reduction is a ring homomorphism
            for m in [3u64, 5, 7, 9, 11] {
                let s = (x.reduce_mod(m).unwrap() + y.reduce_mod(m).unwrap()) % m;
                prop_assert_eq!((&x + &y).reduce_mod(m).unwrap(), s);
                let p = x.reduce_mod(m).unwrap() * y.reduce_mod(m).unwrap() % m;
                prop_assert_eq!((&x * &y).reduce_mod(m).unwrap(), p);
            }
        }
    }
}
