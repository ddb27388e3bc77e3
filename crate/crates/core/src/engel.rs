//! Engel expansions of Laurent series.
//!
//! A nonzero series `f` with `f(0)` of minimal valuation is written as
//! `f = sum_n 1/(a_1 * ... * a_n)` where each digit `a_i = p^(-s_i) * u_i(t)`
//! has an integral power series `u_i` with unit constant term. Digits are
//! produced greedily by the residual recursion
//!
//! ```text
//! x_1 = f,   a_k = leading_part(1 / x_k),   x_{k+1} = a_k * x_k - 1
//! ```
//!
//! and every step raises the Gauss valuation of the residual by at least one.
//! Residual precision shrinks by the residual valuation at every step, so
//! `k` digits need roughly `k^2 / 2` p-adic digits of working precision.

use alloc::vec::Vec;
use core::fmt;

use crate::laurent::{LaurentSeries, PrecisionPolicy, SeriesError};
use crate::padic::{Prime, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngelError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("leading part of the zero series")]
    ZeroSeries,
    #[error("series has terms below t^0")]
    NotPowerSeries,
    #[error("digit unit has a coefficient of negative valuation")]
    NonIntegral,
    #[error("digit unit has a non-unit constant term")]
    NonUnitConstant,
    #[error("coefficient known only to p^{0}, digit at p^0 undetermined")]
    InsufficientPrecision(i64),
    #[error("series is outside the encodable domain: {0}")]
    Domain(&'static str),
    #[error("expansions use different parameters")]
    ParameterMismatch,
    #[error("need at least {need} digits, have {have}")]
    InsufficientDigits { have: usize, need: usize },
    #[error("the zero expansion has no inverse")]
    NotInvertible,
}

/// One Engel digit `p^(-scale) * unit(t)`.
#[derive(Clone, PartialEq, Eq)]
pub struct EngelDigit {
    scale: u32,
    unit: LaurentSeries,
}

impl EngelDigit {
    pub fn new(scale: u32, unit: LaurentSeries) -> Result<Self, EngelError> {
        if unit.t_order() != Some(0) {
            return Err(if unit.t_order().is_some_and(|k| k < 0) {
                EngelError::NotPowerSeries
            } else {
                EngelError::NonUnitConstant
            });
        }
        if unit.gauss_valuation() < Valuation::Finite(0) {
            return Err(EngelError::NonIntegral);
        }
        if unit.coefficients()[0].valuation() != Valuation::Finite(0) {
            return Err(EngelError::NonUnitConstant);
        }
        Ok(EngelDigit { scale, unit })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn unit(&self) -> &LaurentSeries {
        &self.unit
    }

    /// The digit as a series, `p^(-scale) * unit`.
    pub fn value(&self) -> LaurentSeries {
        self.unit.shift_valuation(-i64::from(self.scale))
    }

    /// Same scale and units equal at the available precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.scale == other.scale && self.unit.agrees_with(&other.unit)
    }
}

impl fmt::Debug for EngelDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p^-{} * [{}]", self.scale, self.unit)
    }
}

/// Why an encoding run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// The residual cancelled to zero at full working precision.
    ExactZero,
    /// The residual's Gauss valuation passed the working precision.
    ValuationCap,
    /// The requested number of digits was produced.
    DepthLimit,
    /// Too few residual digits were left to determine the next digit.
    PrecisionExhausted,
    /// The residual lost its minimal-valuation constant term, so the next
    /// digit would not be a unit series.
    Degenerate,
}

impl Termination {
    pub fn code(self) -> u8 {
        match self {
            Termination::ExactZero => 0,
            Termination::ValuationCap => 1,
            Termination::DepthLimit => 2,
            Termination::PrecisionExhausted => 3,
            Termination::Degenerate => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Termination::ExactZero,
            1 => Termination::ValuationCap,
            2 => Termination::DepthLimit,
            3 => Termination::PrecisionExhausted,
            4 => Termination::Degenerate,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Termination::ExactZero => "exact-zero",
            Termination::ValuationCap => "valuation-cap",
            Termination::DepthLimit => "depth-limit",
            Termination::PrecisionExhausted => "precision-exhausted",
            Termination::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngelExpansion {
    prime: Prime,
    policy: PrecisionPolicy,
    max_depth: usize,
    digits: Vec<EngelDigit>,
    /// Gauss valuations of the residuals `x_1 .. x_{n+1}`.
    residual_valuations: Vec<Valuation>,
    termination: Termination,
}

impl EngelExpansion {
    pub fn empty(prime: &Prime, policy: PrecisionPolicy, max_depth: usize) -> Self {
        EngelExpansion {
            prime: prime.clone(),
            policy,
            max_depth,
            digits: Vec::new(),
            residual_valuations: alloc::vec![Valuation::Infinite],
            termination: Termination::ExactZero,
        }
    }

    /// Wraps a digit list without running the encoder, e.g. after decoding
    /// from the wire. Residual valuations are unknown and left empty.
    pub fn from_digits(
        prime: &Prime,
        policy: PrecisionPolicy,
        max_depth: usize,
        digits: Vec<EngelDigit>,
        termination: Termination,
    ) -> Result<Self, EngelError> {
        if digits.len() > max_depth {
            return Err(EngelError::Domain("more digits than the depth limit"));
        }
        for d in &digits {
            if d.unit.prime() != prime || d.unit.policy() != policy {
                return Err(EngelError::ParameterMismatch);
            }
        }
        Ok(EngelExpansion {
            prime: prime.clone(),
            policy,
            max_depth,
            digits,
            residual_valuations: Vec::new(),
            termination,
        })
    }

    pub fn prime(&self) -> &Prime {
        &self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn digits(&self) -> &[EngelDigit] {
        &self.digits
    }

    pub fn residual_valuations(&self) -> &[Valuation] {
        &self.residual_valuations
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// True when a residual hit exact zero.
    pub fn terminated(&self) -> bool {
        self.termination == Termination::ExactZero
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), EngelError> {
        if self.prime != other.prime
            || self.policy != other.policy
            || self.max_depth != other.max_depth
        {
            return Err(EngelError::ParameterMismatch);
        }
        Ok(())
    }
}

/// Coefficient-wise integer part of `g`: the digits at `p^0` and below,
/// rescaled to `p^(-s) * unit` with `s = max(0, -gauss(g))`.
pub fn leading_part(g: &LaurentSeries) -> Result<EngelDigit, EngelError> {
    let t_order = g.t_order().ok_or(EngelError::ZeroSeries)?;
    if t_order < 0 {
        return Err(EngelError::NotPowerSeries);
    }
    let gauss = g.gauss_valuation().finite().ok_or(EngelError::ZeroSeries)?;
    let s = (-gauss).max(0);
    let mut coeffs = Vec::with_capacity(g.coefficients().len());
    for c in g.coefficients() {
        let precision = c.absolute_precision();
        if precision < 1 {
            return Err(EngelError::InsufficientPrecision(precision));
        }
        coeffs.push(c.integer_part().shift(s));
    }
    let unit = LaurentSeries::from_coefficients(g.prime(), g.policy(), t_order, coeffs)?;
    EngelDigit::new(s as u32, unit)
}

/// `leading_part(1/x)` for a normal `x`. The integer part of `1/x` only
/// depends on `x` modulo `p^(2v+1)`, so the inverse is taken of `x` cut to
/// that many digits. The digit itself is exact; it is given the precision
/// `1/x` would have carried, `A - v` for `x` known to `p^A`.
fn next_digit(x: &LaurentSeries) -> Result<EngelDigit, EngelError> {
    let v = x.gauss_valuation().finite().ok_or(EngelError::ZeroSeries)?;
    let known = x.absolute_precision().ok_or(EngelError::ZeroSeries)?;
    let need = 2 * v + 1;
    if known < need {
        return Err(EngelError::InsufficientPrecision(known - 2 * v));
    }
    let digit = leading_part(&x.truncated(need).inv()?)?;
    let unit = digit.unit.map_coefficients(|c| c.with_absolute_precision(known - v));
    EngelDigit::new(digit.scale, unit)
}

/// Power series whose constant term attains the Gauss valuation.
fn is_normal(x: &LaurentSeries) -> bool {
    x.t_order() == Some(0) && x.coefficients()[0].valuation() == x.gauss_valuation()
}

/// Greedy Engel encoding of `f` to at most `max_depth` digits.
pub fn engel_encode(f: &LaurentSeries, max_depth: usize) -> Result<EngelExpansion, EngelError> {
    let prime = f.prime().clone();
    let policy = f.policy();
    if f.is_zero() {
        return Ok(EngelExpansion::empty(&prime, policy, max_depth));
    }
    if f.t_order() != Some(0) {
        return Err(EngelError::Domain("series must start at t^0"));
    }
    if f.gauss_valuation() < Valuation::Finite(0) {
        return Err(EngelError::Domain("negative Gauss valuation"));
    }
    if !is_normal(f) {
        return Err(EngelError::Domain("constant term must attain the Gauss valuation"));
    }

    let cap = Valuation::Finite(i64::from(policy.digits()));
    let working = i64::from(policy.digits());
    let one = LaurentSeries::one(&prime, policy);
    let mut digits = Vec::new();
    let mut valuations = alloc::vec![f.gauss_valuation()];
    let mut x = f.clone();
    let termination = loop {
        if digits.len() >= max_depth {
            break Termination::DepthLimit;
        }
        let digit = match next_digit(&x) {
            Ok(d) => d,
            Err(EngelError::InsufficientPrecision(_)) => break Termination::PrecisionExhausted,
            Err(EngelError::NonUnitConstant | EngelError::NotPowerSeries) => {
                break Termination::Degenerate
            }
            Err(e) => return Err(e),
        };
        let product = digit.value().checked_mul(&x)?;
        let known = product.absolute_precision().unwrap_or(working);
        x = product.checked_add(&-&one)?;
        digits.push(digit);
        valuations.push(x.gauss_valuation());
        if x.is_zero() {
            break if known >= working {
                Termination::ExactZero
            } else {
                Termination::PrecisionExhausted
            };
        }
        if x.gauss_valuation() > cap {
            break Termination::ValuationCap;
        }
        if !is_normal(&x) {
            break Termination::Degenerate;
        }
    };
    Ok(EngelExpansion {
        prime,
        policy,
        max_depth,
        digits,
        residual_valuations: valuations,
        termination,
    })
}

/// Partial sum `sum_n 1/(a_1 * ... * a_n)` over all digits.
pub fn engel_decode(e: &EngelExpansion) -> Result<LaurentSeries, EngelError> {
    let mut sum = LaurentSeries::zero(&e.prime, e.policy);
    let mut term = LaurentSeries::one(&e.prime, e.policy);
    for digit in &e.digits {
        term = term.checked_div(&digit.value())?;
        sum = sum.checked_add(&term)?;
    }
    Ok(sum)
}

/// Decodes, adds and re-encodes.
pub fn engel_add(e1: &EngelExpansion, e2: &EngelExpansion) -> Result<EngelExpansion, EngelError> {
    e1.check_compatible(e2)?;
    let sum = engel_decode(e1)?.checked_add(&engel_decode(e2)?)?;
    engel_encode(&sum, e1.max_depth)
}

pub fn engel_mul(e1: &EngelExpansion, e2: &EngelExpansion) -> Result<EngelExpansion, EngelError> {
    e1.check_compatible(e2)?;
    let product = engel_decode(e1)?.checked_mul(&engel_decode(e2)?)?;
    engel_encode(&product, e1.max_depth)
}

pub fn engel_inv(e: &EngelExpansion) -> Result<EngelExpansion, EngelError> {
    let value = engel_decode(e)?;
    if value.is_zero() {
        return Err(EngelError::NotInvertible);
    }
    engel_encode(&value.inv()?, e.max_depth)
}

/// Smallest `r <= max_period` for which the digit sequence is `r`-periodic
/// over its whole observed length.
pub fn digit_period_check(e: &EngelExpansion, max_period: usize) -> Result<Option<usize>, EngelError> {
    let digits = &e.digits;
    let need = 2 * max_period;
    if digits.len() < need {
        return Err(EngelError::InsufficientDigits {
            have: digits.len(),
            need,
        });
    }
    Ok((1..=max_period).find(|&r| (r..digits.len()).all(|i| digits[i].agrees_with(&digits[i - r]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;

    fn setup() -> (Prime, PrecisionPolicy) {
        (Prime::new(5).unwrap(), PrecisionPolicy::new(4, 24).unwrap())
    }

    #[test]
    fn one_terminates_after_one_digit() {
        let (p, pol) = setup();
        let e = engel_encode(&LaurentSeries::one(&p, pol), 8).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.terminated());
        assert_eq!(e.digits()[0].scale(), 0);
        assert!(e.digits()[0].unit().agrees_with(&LaurentSeries::one(&p, pol)));
        assert_eq!(
            e.residual_valuations(),
            &[Valuation::Finite(0), Valuation::Infinite]
        );
    }

    #[test]
    fn decode_of_two_is_a_half() {
        let (p, pol) = setup();
        let two = EngelDigit::new(0, LaurentSeries::from_integers(&p, pol, 0, &[2])).unwrap();
        let e = EngelExpansion::from_digits(&p, pol, 4, alloc::vec![two], Termination::ExactZero).unwrap();
        let half = engel_decode(&e).unwrap();
        assert_eq!(half.coefficients()[0].digits()[..4], [3, 2, 2, 2]);
    }

    #[test]
    fn leading_part_examples() {
        let (p, pol) = setup();
        let g = LaurentSeries::from_integers(&p, pol, 0, &[1, 5]);
        let a = leading_part(&g).unwrap();
        assert_eq!(a.scale(), 0);
        assert!(a.unit().agrees_with(&LaurentSeries::one(&p, pol)));

        let u = PadicScalar::from_integer(&p, 7, 24).shift(-1);
        let a = leading_part(&LaurentSeries::constant(u, pol)).unwrap();
        assert_eq!(a.scale(), 1);

        let g = LaurentSeries::from_integers(&p, pol, 0, &[5, 25]);
        assert_eq!(leading_part(&g), Err(EngelError::NonUnitConstant));
        assert_eq!(
            leading_part(&LaurentSeries::zero(&p, pol)),
            Err(EngelError::ZeroSeries)
        );
    }

    #[test]
    fn domain_checks() {
        let (p, pol) = setup();
        let f = LaurentSeries::from_integers(&p, pol, 1, &[1]);
        assert!(matches!(engel_encode(&f, 4), Err(EngelError::Domain(_))));
        let f = LaurentSeries::from_integers(&p, pol, 0, &[5, 1]);
        assert!(matches!(engel_encode(&f, 4), Err(EngelError::Domain(_))));
        let zero = engel_encode(&LaurentSeries::zero(&p, pol), 4).unwrap();
        assert!(zero.is_empty() && zero.terminated());
        assert!(engel_decode(&zero).unwrap().is_zero());
    }

    #[test]
    fn residuals_grow() {
        let (p, pol) = setup();
        let f = LaurentSeries::from_integers(&p, pol, 0, &[3, 1, 4, 1]);
        let e = engel_encode(&f, 5).unwrap();
        let v = e.residual_valuations();
        assert!(v.windows(2).all(|w| w[0] < w[1]), "{v:?}");
        let back = engel_decode(&e).unwrap();
        let err = (&f - &back).gauss_valuation();
        assert!(err >= *v.last().unwrap() || err.is_infinite());
    }

    #[test]
    fn periods() {
        let (p, pol) = setup();
        let a = EngelDigit::new(1, LaurentSeries::from_integers(&p, pol, 0, &[1, 2])).unwrap();
        let b = EngelDigit::new(2, LaurentSeries::from_integers(&p, pol, 0, &[3])).unwrap();
        let mk = |ds: Vec<EngelDigit>| {
            EngelExpansion::from_digits(&p, pol, 8, ds, Termination::DepthLimit).unwrap()
        };
        let constant = mk(alloc::vec![a.clone(), a.clone(), a.clone(), a.clone()]);
        assert_eq!(digit_period_check(&constant, 2).unwrap(), Some(1));
        let alternating = mk(alloc::vec![a.clone(), b.clone(), a.clone(), b.clone()]);
        assert_eq!(digit_period_check(&alternating, 2).unwrap(), Some(2));
        let short = mk(alloc::vec![a, b]);
        assert!(digit_period_check(&short, 2).is_err());
    }
}
