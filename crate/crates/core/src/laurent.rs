//! Truncated Laurent series over `Q_p`.
//!
//! A [`LaurentSeries`] stores a window of `W` coefficients `c_k .. c_{k+W-1}`
//! starting at its t-order `k`. Results are re-anchored at their true t-order;
//! coefficients that fall past the window are dropped and, when the leading
//! coefficient cancels, the freed slot at the top of the window is filled
//! with `O(p^R)`.
//!
//! The series-level p-adic size is the Gauss valuation: the minimum of the
//! coefficient valuations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::padic::{PadicError, PadicScalar, Prime, Valuation};

/// Iteration cap for [`newton_root`].
pub const NEWTON_MAX_ITERATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("series use different primes ({0} vs {1})")]
    PrimeMismatch(u32, u32),
    #[error("series use different precision policies")]
    PolicyMismatch,
    #[error("precision policy needs window >= 2 and digits >= 4 (got {window}, {digits})")]
    InvalidPolicy { window: usize, digits: u32 },
    #[error("the zero series is not invertible")]
    NotInvertible,
    #[error("coefficient at t^0 is not a p-adic integer")]
    NotIntegral,
    #[error("seed {0} is not a simple root modulo p")]
    NotSimpleRoot(u32),
    #[error("Newton iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("empty polynomial")]
    EmptyPolynomial,
}

/// Window size `W` (t-coefficients) and relative p-adic digits `R` per coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionPolicy {
    window: usize,
    digits: u32,
}

impl PrecisionPolicy {
    pub const DEFAULT: PrecisionPolicy = PrecisionPolicy {
        window: 8,
        digits: 32,
    };

    pub fn new(window: usize, digits: u32) -> Result<Self, SeriesError> {
        if window < 2 || digits < 4 {
            return Err(SeriesError::InvalidPolicy { window, digits });
        }
        Ok(PrecisionPolicy { window, digits })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    prime: Prime,
    policy: PrecisionPolicy,
    t_order: i64,
    /// Empty for the canonical zero series, otherwise exactly `W` entries
    /// with a nonzero first entry.
    coeffs: Vec<PadicScalar>,
}

impl LaurentSeries {
    pub fn zero(prime: &Prime, policy: PrecisionPolicy) -> Self {
        LaurentSeries {
            prime: prime.clone(),
            policy,
            t_order: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one(prime: &Prime, policy: PrecisionPolicy) -> Self {
        Self::from_integers(prime, policy, 0, &[1])
    }

    /// The monomial `t^k`.
    pub fn monomial(prime: &Prime, policy: PrecisionPolicy, k: i64) -> Self {
        Self::from_integers(prime, policy, k, &[1])
    }

    pub fn constant(c: PadicScalar, policy: PrecisionPolicy) -> Self {
        let prime = c.prime().clone();
        Self::from_coefficients(&prime, policy, 0, vec![c]).expect("single prime")
    }

    /// `sum(values[i] * t^(t_order + i))` with integer coefficients at the policy precision.
    pub fn from_integers(prime: &Prime, policy: PrecisionPolicy, t_order: i64, values: &[i64]) -> Self {
        let coeffs = values
            .iter()
            .map(|&v| PadicScalar::from_integer(prime, v, policy.digits))
            .collect();
        Self::from_coefficients(prime, policy, t_order, coeffs).expect("single prime")
    }

    /// Builds a series from coefficients starting at `t^t_order`. Missing
    /// coefficients up to the window are `O(p^R)`; extra ones are dropped.
    pub fn from_coefficients(
        prime: &Prime,
        policy: PrecisionPolicy,
        t_order: i64,
        mut coeffs: Vec<PadicScalar>,
    ) -> Result<Self, SeriesError> {
        if let Some(c) = coeffs.iter().find(|c| c.prime() != prime) {
            return Err(SeriesError::PrimeMismatch(prime.get(), c.prime().get()));
        }
        coeffs.truncate(policy.window);
        while coeffs.len() < policy.window {
            coeffs.push(PadicScalar::zero(prime, i64::from(policy.digits)));
        }
        Ok(Self::normalize(prime, policy, t_order, coeffs))
    }

    fn normalize(prime: &Prime, policy: PrecisionPolicy, t_order: i64, coeffs: Vec<PadicScalar>) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Self::zero(prime, policy),
            Some(0) => LaurentSeries {
                prime: prime.clone(),
                policy,
                t_order,
                coeffs,
            },
            Some(k) => {
                let mut shifted: Vec<PadicScalar> = coeffs.into_iter().skip(k).collect();
                while shifted.len() < policy.window {
                    shifted.push(PadicScalar::zero(prime, i64::from(policy.digits)));
                }
                LaurentSeries {
                    prime: prime.clone(),
                    policy,
                    t_order: t_order + k as i64,
                    coeffs: shifted,
                }
            }
        }
    }

    pub fn prime(&self) -> &Prime {
        &self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest stored t-exponent; `None` for the zero series.
    pub fn t_order(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.t_order)
    }

    /// Stored coefficients, lowest t-exponent first. Empty for zero.
    pub fn coefficients(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    /// The coefficient of `t^exponent`, or `None` past the stored window.
    pub fn coefficient(&self, exponent: i64) -> Option<PadicScalar> {
        if self.is_zero() || exponent < self.t_order {
            let absolute = i64::from(self.policy.digits);
            return Some(PadicScalar::zero(&self.prime, absolute));
        }
        self.coeffs.get((exponent - self.t_order) as usize).cloned()
    }

    /// Minimum coefficient valuation; infinite for the zero series.
    pub fn gauss_valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .map(PadicScalar::valuation)
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// Smallest absolute precision among the stored coefficients.
    pub fn absolute_precision(&self) -> Option<i64> {
        self.coeffs.iter().map(PadicScalar::absolute_precision).min()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.prime != other.prime {
            return Err(SeriesError::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        if self.policy != other.policy {
            return Err(SeriesError::PolicyMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let (low, high) = if self.t_order <= other.t_order {
            (self, other)
        } else {
            (other, self)
        };
        let offset = (high.t_order - low.t_order) as usize;
        let coeffs = low
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| match i.checked_sub(offset) {
                Some(j) => c + &high.coeffs[j],
                None => c.clone(),
            })
            .collect();
        Ok(Self::normalize(&self.prime, self.policy, low.t_order, coeffs))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.prime, self.policy));
        }
        let w = self.policy.window;
        let mut coeffs = Vec::with_capacity(w);
        for n in 0..w {
            let terms = (0..=n).map(|i| (&self.coeffs[i], &other.coeffs[n - i]));
            coeffs.push(PadicScalar::dot(terms));
        }
        Ok(Self::normalize(
            &self.prime,
            self.policy,
            self.t_order + other.t_order,
            coeffs,
        ))
    }

    /// Multiplicative inverse by the geometric-series recurrence
    /// `b_0 = 1/c_0`, `b_n = -(sum_{i=1..n} c_i b_{n-i}) / c_0`.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let lead_inv = self.coeffs[0].inv()?;
        let w = self.policy.window;
        let mut out: Vec<PadicScalar> = Vec::with_capacity(w);
        out.push(lead_inv.clone());
        for n in 1..w {
            let acc = PadicScalar::dot((1..=n).map(|i| (&self.coeffs[i], &out[n - i])));
            out.push(-(&acc * &lead_inv));
        }
        Ok(Self::normalize(&self.prime, self.policy, -self.t_order, out))
    }

    /// Long division: `q_n = (a_n - sum_{i=1..n} b_i q_{n-i}) / b_0`. Cheaper
    /// than multiplying by the inverse when `other` has short mantissas.
    pub fn checked_div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if other.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        if self.is_zero() {
            return Ok(Self::zero(&self.prime, self.policy));
        }
        let lead_inv = other.coeffs[0].inv()?;
        let w = self.policy.window;
        let mut out: Vec<PadicScalar> = Vec::with_capacity(w);
        for n in 0..w {
            let mut acc = self.coeffs[n].clone();
            if n > 0 {
                acc = &acc - &PadicScalar::dot((1..=n).map(|i| (&other.coeffs[i], &out[n - i])));
            }
            out.push(&acc * &lead_inv);
        }
        Ok(Self::normalize(&self.prime, self.policy, self.t_order - other.t_order, out))
    }

    /// Coefficient-wise multiplication by a scalar.
    pub fn scale(&self, c: &PadicScalar) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self::normalize(&self.prime, self.policy, self.t_order, coeffs)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let c = PadicScalar::from_integer(&self.prime, k, self.policy.digits);
        self.scale(&c)
    }

    /// Coefficient-wise multiplication by `p^k`.
    /// Drops every digit at or above `p^absolute`, coefficient by
    /// coefficient. Returns the series unchanged when that would zero the
    /// leading coefficient.
    pub(crate) fn truncated(&self, absolute: i64) -> Self {
        match self.coeffs.first() {
            Some(c) if c.valuation() < Valuation::Finite(absolute) => LaurentSeries {
                coeffs: self.coeffs.iter().map(|c| c.truncate_absolute(absolute)).collect(),
                ..self.clone()
            },
            _ => self.clone(),
        }
    }

    /// Applies `f` to every coefficient, keeping the shape. `f` must not
    /// zero the leading coefficient.
    pub(crate) fn map_coefficients(&self, f: impl Fn(&PadicScalar) -> PadicScalar) -> Self {
        LaurentSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
            ..self.clone()
        }
    }

    pub fn shift_valuation(&self, k: i64) -> Self {
        LaurentSeries {
            coeffs: self.coeffs.iter().map(|c| c.shift(k)).collect(),
            ..self.clone()
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.prime, self.policy);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// True when the difference is zero at the available precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.checked_add(&-other).is_ok_and(|d| d.is_zero())
    }

    /// The residue of the `t^0` coefficient modulo p.
    pub fn residue_at_origin(&self) -> Result<u32, SeriesError> {
        if self.is_zero() || self.t_order > 0 {
            return Ok(0);
        }
        if self.t_order < 0 {
            return Err(SeriesError::NotIntegral);
        }
        self.coeffs[0].residue().ok_or(SeriesError::NotIntegral)
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;

    /// Panics on incompatible operands; see [`LaurentSeries::checked_add`].
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.checked_add(rhs).expect("compatible series")
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;

    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.checked_add(&-rhs).expect("compatible series")
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;

    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.checked_mul(rhs).expect("compatible series")
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;

    fn neg(self) -> LaurentSeries {
        LaurentSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})*t^{}", self.t_order + i as i64)?;
        }
        write!(f, " + O(t^{})", self.t_order + self.coeffs.len() as i64)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Evaluates `sum(poly[i] * x^i)` by Horner's rule.
pub fn evaluate(poly: &[LaurentSeries], x: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
    let (last, rest) = poly.split_last().ok_or(SeriesError::EmptyPolynomial)?;
    let mut acc = last.clone();
    for c in rest.iter().rev() {
        acc = acc.checked_mul(x)?.checked_add(c)?;
    }
    Ok(acc)
}

/// Formal derivative of a polynomial given low degree first.
pub fn derivative(poly: &[LaurentSeries]) -> Vec<LaurentSeries> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_int(i as i64))
        .collect()
}

/// Result of [`newton_root_traced`].
#[derive(Debug, Clone)]
pub struct NewtonTrace {
    pub root: LaurentSeries,
    /// Gauss valuation of each applied correction `F(X)/F'(X)`.
    pub corrections: Vec<Valuation>,
}

/// Lifts a simple root `seed` of `F mod (p, t)` to a root of `F` in the
/// series ring, where `poly` lists the coefficients of `F`, lowest degree first.
pub fn newton_root(poly: &[LaurentSeries], seed: u32) -> Result<LaurentSeries, SeriesError> {
    newton_root_traced(poly, seed).map(|t| t.root)
}

pub fn newton_root_traced(poly: &[LaurentSeries], seed: u32) -> Result<NewtonTrace, SeriesError> {
    let first = poly.first().ok_or(SeriesError::EmptyPolynomial)?;
    let prime = first.prime().clone();
    let policy = first.policy();
    for c in poly {
        first.check_compatible(c)?;
    }
    let p = u64::from(prime.get());
    let seed = u64::from(seed) % p;

    let residues = poly
        .iter()
        .map(LaurentSeries::residue_at_origin)
        .collect::<Result<Vec<_>, _>>()?;
    let value = residues
        .iter()
        .rev()
        .fold(0u64, |acc, &r| (acc * seed + u64::from(r)) % p);
    let slope = residues
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0u64, |acc, (i, &r)| (acc * seed + (i as u64 % p) * u64::from(r)) % p);
    if value != 0 || slope == 0 {
        return Err(SeriesError::NotSimpleRoot(seed as u32));
    }

    let dpoly = derivative(poly);
    let cap = i64::from(policy.digits());
    let mut x = LaurentSeries::from_integers(&prime, policy, 0, &[seed as i64]);
    let mut corrections = Vec::new();
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let fx = evaluate(poly, &x)?;
        if fx.is_zero() {
            return Ok(NewtonTrace { root: x, corrections });
        }
        let correction = fx.checked_div(&evaluate(&dpoly, &x)?)?;
        let size = correction.gauss_valuation();
        corrections.push(size);
        x = &x - &correction;
        if size > Valuation::Finite(cap) {
            return Ok(NewtonTrace { root: x, corrections });
        }
    }
    Err(SeriesError::NoConvergence(NEWTON_MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: u32) -> (Prime, PrecisionPolicy) {
        (Prime::new(p).unwrap(), PrecisionPolicy::new(6, 12).unwrap())
    }

    #[test]
    fn monomials() {
        let (p, pol) = setup(7);
        let t = LaurentSeries::monomial(&p, pol, 1);
        let tinv = LaurentSeries::monomial(&p, pol, -1);
        assert!((&t * &tinv).agrees_with(&LaurentSeries::one(&p, pol)));
        let t2 = LaurentSeries::monomial(&p, pol, 2);
        assert_eq!(t2.inv().unwrap(), LaurentSeries::monomial(&p, pol, -2));
        let zero = LaurentSeries::zero(&p, pol);
        assert_eq!(&t + &zero, t);
    }

    #[test]
    fn conjugate_product() {
        let (p, pol) = setup(7);
        let a = LaurentSeries::from_integers(&p, pol, 0, &[1, 7]);
        let b = LaurentSeries::from_integers(&p, pol, 0, &[1, -7]);
        let expect = LaurentSeries::from_integers(&p, pol, 0, &[1, 0, -49]);
        assert!((&a * &b).agrees_with(&expect));
    }

    #[test]
    fn geometric_inverse() {
        let (p, pol) = setup(7);
        let f = LaurentSeries::from_integers(&p, pol, 0, &[1, 7]);
        let g = f.inv().unwrap();
        for (n, c) in g.coefficients().iter().enumerate() {
            assert_eq!(c.valuation(), Valuation::Finite(n as i64));
        }
        assert!((&f * &g).agrees_with(&LaurentSeries::one(&p, pol)));
        assert_eq!(
            LaurentSeries::zero(&p, pol).inv(),
            Err(SeriesError::NotInvertible)
        );
    }

    #[test]
    fn gauss_valuation_examples() {
        let (p, pol) = setup(7);
        let a = LaurentSeries::from_integers(&p, pol, 0, &[1, 7]);
        assert_eq!(a.gauss_valuation(), Valuation::Finite(0));
        let b = LaurentSeries::from_integers(&p, pol, 0, &[7, 7]);
        assert_eq!(b.gauss_valuation(), Valuation::Finite(1));
        let c = LaurentSeries::from_integers(&p, pol, 1, &[7, 343]);
        assert_eq!(c.gauss_valuation(), Valuation::Finite(1));
        assert_eq!(
            LaurentSeries::zero(&p, pol).gauss_valuation(),
            Valuation::Infinite
        );
    }

    #[test]
    fn newton_square_roots() {
        let (p, pol) = setup(7);
        let minus_one = LaurentSeries::from_integers(&p, pol, 0, &[-1]);
        let zero = LaurentSeries::zero(&p, pol);
        let one = LaurentSeries::one(&p, pol);
        let root = newton_root(&[minus_one, zero.clone(), one.clone()], 1).unwrap();
        assert!(root.agrees_with(&one));

        let target = LaurentSeries::from_integers(&p, pol, 0, &[1, 7]);
        let root = newton_root(&[-&target, zero, one], 1).unwrap();
        assert!((&root * &root).agrees_with(&target));
    }

    #[test]
    fn newton_rejects_bad_seeds() {
        let (p, pol) = setup(7);
        let c = LaurentSeries::from_integers(&p, pol, 0, &[-2]);
        let zero = LaurentSeries::zero(&p, pol);
        let one = LaurentSeries::one(&p, pol);
        // 2 is not a square root of 2 mod 7 (3 and 4 are).
        assert_eq!(
            newton_root(&[c.clone(), zero.clone(), one.clone()], 2),
            Err(SeriesError::NotSimpleRoot(2))
        );
        assert!(newton_root(&[c, zero, one], 3).is_ok());
        // x^2 has a double root at 0.
        let sq = [
            LaurentSeries::zero(&p, pol),
            LaurentSeries::zero(&p, pol),
            LaurentSeries::one(&p, pol),
        ];
        assert_eq!(newton_root(&sq, 0), Err(SeriesError::NotSimpleRoot(0)));
    }

    #[test]
    fn policy_bounds() {
        assert!(PrecisionPolicy::new(1, 8).is_err());
        assert!(PrecisionPolicy::new(2, 3).is_err());
        assert!(PrecisionPolicy::new(2, 4).is_ok());
    }

    #[test]
    fn mismatched_operands() {
        let (p, pol) = setup(7);
        let q = Prime::new(11).unwrap();
        let a = LaurentSeries::one(&p, pol);
        assert_eq!(
            a.checked_add(&LaurentSeries::one(&q, pol)),
            Err(SeriesError::PrimeMismatch(7, 11))
        );
        let other = PrecisionPolicy::new(4, 12).unwrap();
        assert_eq!(
            a.checked_mul(&LaurentSeries::one(&p, other)),
            Err(SeriesError::PolicyMismatch)
        );
    }
}
