//! Fixed-precision arithmetic in `Q_p`.
//!
//! A nonzero [`PadicScalar`] is stored as `p^v * u` where `u` is a unit
//! modulo `p^r`; `r` is the relative precision (number of significant base-p
//! digits). Zero is a separate marker that still carries an absolute
//! precision bound: `O(p^N)`.
//!
//! Precision propagation:
//! * multiplication keeps `min(r_a, r_b)` significant digits at `v_a + v_b`;
//! * addition keeps digits below the smaller absolute bound `min(v_a + r_a, v_b + r_b)`
//!   and renormalizes when leading digits cancel, so cancellation costs relative
//!   precision instead of inventing digits.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::{max, min};
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Default number of cached powers of `p` held by a [`Prime`].
const DEFAULT_POWER_TABLE: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("{0} is not a prime greater than 3")]
    InvalidPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("cannot invert a value indistinguishable from zero")]
    NotInvertible,
    #[error("digit {digit} is out of range for p = {prime}")]
    DigitOutOfRange { digit: u32, prime: u32 },
    #[error("leading digit must be nonzero")]
    LeadingZeroDigit,
    #[error("relative precision must be at least one digit")]
    ZeroPrecision,
}

/// `v_p` of a value; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Deterministic primality test by trial division; inputs here are at most 32 bits.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An odd prime `p > 3` together with a cache of its powers.
///
/// Cloning is cheap (reference counted). Two handles compare equal when they
/// name the same prime, whatever the cache size.
#[derive(Clone)]
pub struct Prime(Arc<PrimeTable>);

struct PrimeTable {
    p: u32,
    powers: Vec<BigUint>,
}

impl Prime {
    pub fn new(p: u32) -> Result<Self, PadicError> {
        Self::with_power_table(p, DEFAULT_POWER_TABLE)
    }

    /// Like [`Prime::new`], caching `p^0 ..= p^max_exponent`. Size this to about
    /// twice the working precision when running at large precision.
    pub fn with_power_table(p: u32, max_exponent: u32) -> Result<Self, PadicError> {
        if p <= 3 || !is_prime(u64::from(p)) {
            return Err(PadicError::InvalidPrime(u64::from(p)));
        }
        let base = BigUint::from(p);
        let mut powers = Vec::with_capacity(max_exponent as usize + 1);
        let mut acc = BigUint::one();
        for _ in 0..=max_exponent {
            powers.push(acc.clone());
            acc *= &base;
        }
        Ok(Prime(Arc::new(PrimeTable { p, powers })))
    }

    pub fn get(&self) -> u32 {
        self.0.p
    }

    pub(crate) fn pow(&self, k: u32) -> Cow<'_, BigUint> {
        match self.0.powers.get(k as usize) {
            Some(v) => Cow::Borrowed(v),
            None => Cow::Owned(BigUint::from(self.0.p).pow(k)),
        }
    }
}

impl PartialEq for Prime {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p
    }
}

impl Eq for Prime {}

impl fmt::Debug for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prime({})", self.0.p)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.p)
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// `0 + O(p^absolute)`.
    Zero { absolute: i64 },
    /// `p^valuation * unit + O(p^(valuation + precision))`, `unit` coprime to p.
    Nonzero {
        valuation: i64,
        precision: u32,
        unit: BigUint,
    },
}

/// An element of `Q_p` known to a finite number of digits.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicScalar {
    prime: Prime,
    repr: Repr,
}

fn p_adic_split_u64(mut n: u64, p: u64) -> (u64, i64) {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    (n, v)
}

/// Inverse of `unit` modulo `p^precision` by Newton lifting from mod p.
fn unit_inverse(prime: &Prime, unit: &BigUint, precision: u32) -> Option<BigUint> {
    let p = u64::from(prime.get());
    let residue = (unit % prime.get()).to_u64()?;
    if residue == 0 {
        return None;
    }
    // Fermat: r^(p-2) mod p.
    let (mut base, mut e, mut acc) = (residue, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    let mut y = BigUint::from(acc);
    let mut k = 1u32;
    while k < precision {
        k = min(2 * k, precision);
        let modulus = prime.pow(k);
        let modulus = modulus.as_ref();
        let uy = (unit % modulus) * &y % modulus;
        // y (2 - u y) mod p^k
        let two_minus = (modulus + 2u32 - uy) % modulus;
        y = y * two_minus % modulus;
    }
    Some(y)
}

impl PadicScalar {
    /// `0 + O(p^absolute_precision)`.
    pub fn zero(prime: &Prime, absolute_precision: i64) -> Self {
        PadicScalar {
            prime: prime.clone(),
            repr: Repr::Zero {
                absolute: absolute_precision,
            },
        }
    }

    pub fn one(prime: &Prime, precision: u32) -> Self {
        Self::from_integer(prime, 1, precision)
    }

    pub fn from_integer(prime: &Prime, n: i64, precision: u32) -> Self {
        // The denominator is 1, so this cannot fail.
        Self::from_rational(prime, n, 1, precision).expect("nonzero denominator")
    }

    /// The p-adic expansion of `numerator / denominator` with `precision`
    /// significant digits. Zero becomes `O(p^precision)`.
    pub fn from_rational(
        prime: &Prime,
        numerator: i64,
        denominator: i64,
        precision: u32,
    ) -> Result<Self, PadicError> {
        if denominator == 0 {
            return Err(PadicError::ZeroDenominator);
        }
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if numerator == 0 {
            return Ok(Self::zero(prime, i64::from(precision)));
        }
        let p = u64::from(prime.get());
        let negative = (numerator < 0) != (denominator < 0);
        let (num, vn) = p_adic_split_u64(numerator.unsigned_abs(), p);
        let (den, vd) = p_adic_split_u64(denominator.unsigned_abs(), p);
        let modulus = prime.pow(precision);
        let den_inv = BigUint::from(den)
            .modinv(&modulus)
            .expect("denominator is coprime to p");
        let mut unit = (BigUint::from(num) * den_inv) % modulus.as_ref();
        if negative {
            unit = modulus.as_ref() - unit;
        }
        Ok(PadicScalar {
            prime: prime.clone(),
            repr: Repr::Nonzero {
                valuation: vn - vd,
                precision,
                unit,
            },
        })
    }

    /// Builds `p^valuation * sum(digits[i] * p^i)`; the first digit must be nonzero.
    pub fn from_digits(prime: &Prime, valuation: i64, digits: &[u32]) -> Result<Self, PadicError> {
        let p = prime.get();
        if digits.is_empty() {
            return Err(PadicError::ZeroPrecision);
        }
        if let Some(&digit) = digits.iter().find(|&&d| d >= p) {
            return Err(PadicError::DigitOutOfRange { digit, prime: p });
        }
        if digits[0] == 0 {
            return Err(PadicError::LeadingZeroDigit);
        }
        let mut unit = BigUint::zero();
        for &d in digits.iter().rev() {
            unit = unit * p + d;
        }
        Ok(PadicScalar {
            prime: prime.clone(),
            repr: Repr::Nonzero {
                valuation,
                precision: digits.len() as u32,
                unit,
            },
        })
    }

    /// `p^valuation * mantissa` with `precision` significant digits. The
    /// mantissa is reduced modulo `p^precision` and renormalized, so callers
    /// may pass any integer.
    pub fn from_mantissa(prime: &Prime, valuation: i64, precision: u32, mantissa: BigUint) -> Self {
        let m = mantissa % prime.pow(precision).as_ref();
        Self::normalized(prime, valuation, precision as i64, m)
    }

    /// `p^base * n` known modulo `p^(base + width)`.
    fn normalized(prime: &Prime, base: i64, width: i64, mut n: BigUint) -> Self {
        if width <= 0 || n.is_zero() {
            return Self::zero(prime, base + width);
        }
        let p = prime.get();
        let mut shift = 0i64;
        while (&n % p).is_zero() {
            n /= p;
            shift += 1;
        }
        PadicScalar {
            prime: prime.clone(),
            repr: Repr::Nonzero {
                valuation: base + shift,
                precision: (width - shift) as u32,
                unit: n,
            },
        }
    }

    pub fn prime(&self) -> &Prime {
        &self.prime
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { .. } => Valuation::Infinite,
            Repr::Nonzero { valuation, .. } => Valuation::Finite(*valuation),
        }
    }

    /// Number of significant digits; zero has none.
    pub fn relative_precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { precision, .. } => *precision,
        }
    }

    /// The exponent `N` of the `O(p^N)` error term.
    pub fn absolute_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { absolute } => *absolute,
            Repr::Nonzero {
                valuation,
                precision,
                ..
            } => valuation + i64::from(*precision),
        }
    }

    /// True when the value is indistinguishable from zero at its precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// The unit part `u` of `p^v * u`, for nonzero values.
    pub fn mantissa(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// Base-p digits `d_0 .. d_{r-1}` of the mantissa, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        let Repr::Nonzero {
            precision, unit, ..
        } = &self.repr
        else {
            return Vec::new();
        };
        let p = BigUint::from(self.prime.get());
        let mut out = Vec::with_capacity(*precision as usize);
        let mut n = unit.clone();
        for _ in 0..*precision {
            let (q, r) = n.div_rem(&p);
            out.push(r.to_u32().unwrap_or(0));
            n = q;
        }
        out
    }

    /// The residue modulo p, when the value is integral and known mod p.
    pub fn residue(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero { absolute } => (*absolute >= 1).then_some(0),
            Repr::Nonzero {
                valuation, unit, ..
            } => match *valuation {
                v if v < 0 => None,
                0 => (unit % self.prime.get()).to_u32(),
                _ => Some(0),
            },
        }
    }

    /// Coarsens the value to absolute precision `min(N, absolute)`.
    pub fn truncate_absolute(&self, absolute: i64) -> Self {
        match &self.repr {
            Repr::Zero { absolute: own } => Self::zero(&self.prime, min(*own, absolute)),
            Repr::Nonzero {
                valuation,
                precision,
                unit,
            } => {
                if absolute >= valuation + i64::from(*precision) {
                    self.clone()
                } else if absolute <= *valuation {
                    Self::zero(&self.prime, absolute)
                } else {
                    let r = (absolute - valuation) as u32;
                    PadicScalar {
                        prime: self.prime.clone(),
                        repr: Repr::Nonzero {
                            valuation: *valuation,
                            precision: r,
                            unit: unit % self.prime.pow(r).as_ref(),
                        },
                    }
                }
            }
        }
    }

    /// The same value claimed known to `p^absolute`. Only meaningful for
    /// values that are exact, such as integer parts.
    pub(crate) fn with_absolute_precision(&self, absolute: i64) -> Self {
        match &self.repr {
            Repr::Zero { .. } => Self::zero(&self.prime, absolute),
            Repr::Nonzero { valuation, unit, .. } => {
                if absolute <= *valuation {
                    return Self::zero(&self.prime, absolute);
                }
                let precision = (absolute - valuation) as u32;
                PadicScalar {
                    prime: self.prime.clone(),
                    repr: Repr::Nonzero {
                        valuation: *valuation,
                        precision,
                        unit: unit % self.prime.pow(precision).as_ref(),
                    },
                }
            }
        }
    }

    /// Multiplication by `p^k`; exact.
    pub fn shift(&self, k: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero { absolute } => Repr::Zero {
                absolute: absolute + k,
            },
            Repr::Nonzero {
                valuation,
                precision,
                unit,
            } => Repr::Nonzero {
                valuation: valuation + k,
                precision: *precision,
                unit: unit.clone(),
            },
        };
        PadicScalar {
            prime: self.prime.clone(),
            repr,
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch(self.prime.get(), other.prime.get()))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        Ok(self.add_same_prime(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        Ok(self.mul_same_prime(other))
    }

    fn add_same_prime(&self, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Zero { absolute }, _) => other.truncate_absolute(*absolute),
            (_, Repr::Zero { absolute }) => self.truncate_absolute(*absolute),
            (
                Repr::Nonzero {
                    valuation: va,
                    precision: ra,
                    unit: ua,
                },
                Repr::Nonzero {
                    valuation: vb,
                    precision: rb,
                    unit: ub,
                },
            ) => {
                let absolute = min(va + i64::from(*ra), vb + i64::from(*rb));
                let base = min(*va, *vb);
                let width = absolute - base;
                if width <= 0 {
                    return Self::zero(&self.prime, absolute);
                }
                let modulus = self.prime.pow(width as u32);
                let lift = |v: i64, u: &BigUint| -> BigUint {
                    let s = v - base;
                    if s >= width {
                        BigUint::zero()
                    } else if s == 0 {
                        u.clone()
                    } else {
                        u * self.prime.pow(s as u32).as_ref()
                    }
                };
                let sum = (lift(*va, ua) + lift(*vb, ub)) % modulus.as_ref();
                Self::normalized(&self.prime, base, width, sum)
            }
        }
    }

    fn mul_same_prime(&self, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Zero { absolute: a }, Repr::Zero { absolute: b }) => {
                Self::zero(&self.prime, a + b)
            }
            (Repr::Zero { absolute }, Repr::Nonzero { valuation, .. })
            | (Repr::Nonzero { valuation, .. }, Repr::Zero { absolute }) => {
                Self::zero(&self.prime, absolute + valuation)
            }
            (
                Repr::Nonzero {
                    valuation: va,
                    precision: ra,
                    unit: ua,
                },
                Repr::Nonzero {
                    valuation: vb,
                    precision: rb,
                    unit: ub,
                },
            ) => {
                let precision = min(*ra, *rb);
                let unit = (ua * ub) % self.prime.pow(precision).as_ref();
                PadicScalar {
                    prime: self.prime.clone(),
                    repr: Repr::Nonzero {
                        valuation: va + vb,
                        precision,
                        unit,
                    },
                }
            }
        }
    }

    /// `sum(a_i * b_i)` with a single reduction; equal to summing the
    /// products one by one. `terms` must be non-empty and share one prime.
    pub(crate) fn dot<'a>(terms: impl Iterator<Item = (&'a Self, &'a Self)> + Clone) -> Self {
        let mut prime = None;
        let mut absolute = i64::MAX;
        let mut base = i64::MAX;
        for (a, b) in terms.clone() {
            prime.get_or_insert(&a.prime);
            match (&a.repr, &b.repr) {
                (Repr::Zero { absolute: x }, Repr::Zero { absolute: y }) => absolute = min(absolute, x + y),
                (Repr::Zero { absolute: x }, Repr::Nonzero { valuation, .. })
                | (Repr::Nonzero { valuation, .. }, Repr::Zero { absolute: x }) => {
                    absolute = min(absolute, x + valuation)
                }
                (
                    Repr::Nonzero {
                        valuation: va,
                        precision: ra,
                        ..
                    },
                    Repr::Nonzero {
                        valuation: vb,
                        precision: rb,
                        ..
                    },
                ) => {
                    absolute = min(absolute, va + vb + i64::from(min(*ra, *rb)));
                    base = min(base, va + vb);
                }
            }
        }
        let prime = prime.expect("non-empty dot product");
        if base == i64::MAX || absolute <= base {
            return Self::zero(prime, absolute);
        }
        let width = absolute - base;
        let mut sum = BigUint::zero();
        for (a, b) in terms {
            if let (
                Repr::Nonzero {
                    valuation: va,
                    unit: ua,
                    ..
                },
                Repr::Nonzero {
                    valuation: vb,
                    unit: ub,
                    ..
                },
            ) = (&a.repr, &b.repr)
            {
                let s = va + vb - base;
                if s >= width {
                    continue;
                }
                let product = ua * ub;
                if s == 0 {
                    sum += product;
                } else {
                    sum += product * prime.pow(s as u32).as_ref();
                }
            }
        }
        let sum = sum % prime.pow(width as u32).as_ref();
        Self::normalized(prime, base, width, sum)
    }

    /// Multiplicative inverse; keeps the relative precision and negates the valuation.
    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { .. } => Err(PadicError::NotInvertible),
            Repr::Nonzero {
                valuation,
                precision,
                unit,
            } => {
                let inverse = unit_inverse(&self.prime, unit, *precision).ok_or(PadicError::NotInvertible)?;
                Ok(PadicScalar {
                    prime: self.prime.clone(),
                    repr: Repr::Nonzero {
                        valuation: -valuation,
                        precision: *precision,
                        unit: inverse,
                    },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        Ok(self.mul_same_prime(&other.inv()?))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let precision = max(self.relative_precision(), 1);
        self.mul_same_prime(&Self::from_integer(&self.prime, k, precision))
    }

    /// The digits at exponents `<= 0`. Digits above `p^0` are dropped; the
    /// dropped tail has valuation at least 1. The absolute precision is kept,
    /// since the discarded positions are exactly zero in the result.
    pub fn integer_part(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero {
                valuation,
                precision,
                unit,
            } => {
                if *valuation >= 1 {
                    return Self::zero(&self.prime, valuation + i64::from(*precision));
                }
                let kept = (1 - valuation) as u64;
                if kept >= u64::from(*precision) {
                    return self.clone();
                }
                PadicScalar {
                    prime: self.prime.clone(),
                    repr: Repr::Nonzero {
                        valuation: *valuation,
                        precision: *precision,
                        unit: unit % self.prime.pow(kept as u32).as_ref(),
                    },
                }
            }
        }
    }

    /// True when `self - other` is zero at the available precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.prime == other.prime && (self - other).is_zero()
    }
}

impl Add for &PadicScalar {
    type Output = PadicScalar;

    /// Panics on mismatched primes; see [`PadicScalar::checked_add`].
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.checked_add(rhs).expect("p-adic operands share a prime")
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;

    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.checked_add(&-rhs).expect("p-adic operands share a prime")
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;

    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.checked_mul(rhs).expect("p-adic operands share a prime")
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;

    fn neg(self) -> PadicScalar {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero {
                valuation,
                precision,
                unit,
            } => PadicScalar {
                prime: self.prime.clone(),
                repr: Repr::Nonzero {
                    valuation: *valuation,
                    precision: *precision,
                    unit: self.prime.pow(*precision).as_ref() - unit,
                },
            },
        }
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;

    fn neg(self) -> PadicScalar {
        -&self
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime.get();
        let Repr::Nonzero { valuation, .. } = &self.repr else {
            return write!(f, "O({p}^{})", self.absolute_precision());
        };
        let mut terms = String::new();
        for (i, d) in self.digits().into_iter().enumerate() {
            if d == 0 {
                continue;
            }
            let e = valuation + i as i64;
            let term = match e {
                0 => alloc::format!("{d}"),
                1 => alloc::format!("{d}*{p}"),
                _ => alloc::format!("{d}*{p}^{e}"),
            };
            if !terms.is_empty() {
                terms.push_str(" + ");
            }
            terms.push_str(&term);
        }
        write!(f, "{terms} + O({p}^{})", self.absolute_precision())
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn half_at_five() {
        let half = PadicScalar::from_rational(&p5(), 1, 2, 3).unwrap();
        assert_eq!(half.valuation(), Valuation::Finite(0));
        assert_eq!(half.digits(), [3, 2, 2]);
        let two = PadicScalar::from_integer(&p5(), 2, 3);
        assert!((&half * &two).agrees_with(&PadicScalar::one(&p5(), 3)));
    }

    #[test]
    fn zero_and_prime_powers() {
        let z = PadicScalar::from_rational(&p5(), 0, 1, 3).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.valuation(), Valuation::Infinite);

        let x = PadicScalar::from_rational(&p5(), 25, 1, 3).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(2));
        assert_eq!(x.digits(), [1, 0, 0]);

        let p = PadicScalar::from_integer(&p5(), 5, 4);
        let pp = &p * &p;
        assert_eq!(pp.valuation(), Valuation::Finite(2));
        assert_eq!(pp.digits()[0], 1);
        assert_eq!(
            PadicScalar::from_integer(&p5(), 125, 4).valuation(),
            Valuation::Finite(3)
        );
    }

    #[test]
    fn additive_inverse_is_zero_at_shared_precision() {
        let a = PadicScalar::from_rational(&p5(), 7, 3, 6).unwrap();
        let s = &a + &(-&a);
        assert!(s.is_zero());
        assert_eq!(s.absolute_precision(), 6);
    }

    #[test]
    fn cancellation_costs_relative_precision() {
        let a = PadicScalar::from_integer(&p5(), 1, 6);
        let b = PadicScalar::from_integer(&p5(), 26, 6);
        let d = &b - &a;
        assert_eq!(d.valuation(), Valuation::Finite(2));
        assert_eq!(d.relative_precision(), 4);
        assert_eq!(d.absolute_precision(), 6);
    }

    #[test]
    fn inversion() {
        let one = PadicScalar::one(&p5(), 5);
        assert_eq!(one.inv().unwrap(), one);

        let inv2 = PadicScalar::from_integer(&p5(), 2, 3).inv().unwrap();
        assert_eq!(inv2.digits(), [3, 2, 2]);

        let inv_p = PadicScalar::from_integer(&p5(), 5, 4).inv().unwrap();
        assert_eq!(inv_p.valuation(), Valuation::Finite(-1));
        assert_eq!(inv_p.digits(), [1, 0, 0, 0]);

        assert_eq!(
            PadicScalar::zero(&p5(), 3).inv(),
            Err(PadicError::NotInvertible)
        );
    }

    #[test]
    fn integer_part_examples() {
        let p = p5();
        let a = PadicScalar::from_integer(&p, 50, 4);
        assert!(a.integer_part().is_zero());

        let b = PadicScalar::from_integer(&p, 3 + 2 * 5, 4);
        assert!(b.integer_part().agrees_with(&PadicScalar::from_integer(&p, 3, 4)));

        // 2/5 + 1 + 4*5
        let c = PadicScalar::from_digits(&p, -1, &[2, 1, 4, 0]).unwrap();
        let ip = c.integer_part();
        assert_eq!(ip.digits(), [2, 1, 0, 0]);
        let tail = &c - &ip;
        assert_eq!(tail.valuation(), Valuation::Finite(1));
        assert!((&ip + &tail).agrees_with(&c));
    }

    #[test]
    fn valuation_examples() {
        let p = p5();
        assert_eq!(
            PadicScalar::from_integer(&p, 0, 3).valuation(),
            Valuation::Infinite
        );
        assert_eq!(
            PadicScalar::from_rational(&p, 1, 2, 3).unwrap().valuation(),
            Valuation::Finite(0)
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            PadicScalar::from_rational(&p5(), 1, 0, 3),
            Err(PadicError::ZeroDenominator)
        );
        assert!(matches!(Prime::new(9), Err(PadicError::InvalidPrime(9))));
        assert!(matches!(Prime::new(3), Err(PadicError::InvalidPrime(3))));
        let a = PadicScalar::one(&p5(), 3);
        let b = PadicScalar::one(&Prime::new(7).unwrap(), 3);
        assert_eq!(a.checked_add(&b), Err(PadicError::PrimeMismatch(5, 7)));
        assert!(matches!(
            PadicScalar::from_digits(&p5(), 0, &[0, 1]),
            Err(PadicError::LeadingZeroDigit)
        ));
        assert!(matches!(
            PadicScalar::from_digits(&p5(), 0, &[5]),
            Err(PadicError::DigitOutOfRange { digit: 5, prime: 5 })
        ));
    }

    #[test]
    fn display() {
        let half = PadicScalar::from_rational(&p5(), 1, 2, 3).unwrap();
        assert_eq!(alloc::format!("{half}"), "3 + 2*5 + 2*5^2 + O(5^3)");
    }
}
