//! Short Weierstrass curves `y^2 = x^3 + A(t) x + B(t)` over `Q_p((t))` and
//! their 2-isogenies.

use alloc::vec;
use alloc::vec::Vec;

use crate::laurent::{newton_root, LaurentSeries, PrecisionPolicy, SeriesError};
use crate::padic::{PadicScalar, Prime, Valuation};

/// Largest prime accepted by [`count_points_fp`].
pub const MAX_COUNT_PRIME: u32 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("prime {0} is not allowed here")]
    BadPrime(u32),
    #[error("discriminant vanishes at working precision")]
    Singular,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("x-coordinate is not a root of the 2-division cubic")]
    NotTorsion,
    #[error("point lies in the isogeny kernel")]
    KernelPoint,
    #[error("the fiber cubic has no simple root modulo {0}")]
    NoSimpleFiberRoot(u32),
    #[error("a chain needs at least one step")]
    ZeroSteps,
    #[error("curve coefficient is not integral at t = 0")]
    NonIntegralFiber,
    #[error("reduced curve over F_{0} is singular")]
    SingularReduction(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveParams {
    a: LaurentSeries,
    b: LaurentSeries,
}

impl CurveParams {
    pub fn new(a: LaurentSeries, b: LaurentSeries) -> Result<Self, CurveError> {
        let curve = CurveParams { a, b };
        // Also rejects mismatched primes or policies.
        if curve.discriminant()?.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(curve)
    }

    pub fn a(&self) -> &LaurentSeries {
        &self.a
    }

    pub fn b(&self) -> &LaurentSeries {
        &self.b
    }

    pub fn prime(&self) -> &Prime {
        self.a.prime()
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.a.policy()
    }

    /// `4A^3 + 27B^2`.
    fn core_discriminant(&self) -> Result<LaurentSeries, SeriesError> {
        let a3 = self.a.checked_mul(&self.a)?.checked_mul(&self.a)?;
        let b2 = self.b.checked_mul(&self.b)?;
        a3.mul_int(4).checked_add(&b2.mul_int(27))
    }

    /// `-16 (4A^3 + 27B^2)`.
    pub fn discriminant(&self) -> Result<LaurentSeries, CurveError> {
        Ok(self.core_discriminant()?.mul_int(-16))
    }

    /// `x^3 + A x + B`.
    pub fn rhs(&self, x: &LaurentSeries) -> Result<LaurentSeries, CurveError> {
        let x2 = x.checked_mul(x)?;
        let x3 = x2.checked_mul(x)?;
        Ok(x3.checked_add(&self.a.checked_mul(x)?)?.checked_add(&self.b)?)
    }

    pub fn contains(&self, point: &AffinePoint) -> bool {
        match (self.rhs(&point.x), point.y.checked_mul(&point.y)) {
            (Ok(rhs), Ok(y2)) => rhs.agrees_with(&y2),
            _ => false,
        }
    }
}

/// A point `(alpha, 0)` of order two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionPoint {
    pub x: LaurentSeries,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePoint {
    pub x: LaurentSeries,
    pub y: LaurentSeries,
}

impl AffinePoint {
    pub fn new(x: LaurentSeries, y: LaurentSeries) -> Self {
        AffinePoint { x, y }
    }
}

/// The 2-isogeny with kernel generated by `(alpha, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsogenyStep {
    pub alpha: LaurentSeries,
    /// `3 alpha^2 + A`.
    pub c: LaurentSeries,
    pub codomain: CurveParams,
}

/// `y^2 = x^3 + (1 + p t)`.
pub fn base_curve(prime: &Prime, policy: PrecisionPolicy) -> Result<CurveParams, CurveError> {
    let p = prime.get();
    if p <= 3 {
        return Err(CurveError::BadPrime(p));
    }
    let a = LaurentSeries::zero(prime, policy);
    let b = LaurentSeries::from_integers(prime, policy, 0, &[1, i64::from(p)]);
    CurveParams::new(a, b)
}

/// Hensel-lifts a simple root `seed` of the fiber cubic to a root of
/// `X^3 + A X + B`.
pub fn two_torsion_lift(curve: &CurveParams, seed: u32) -> Result<TorsionPoint, CurveError> {
    let prime = curve.prime();
    let policy = curve.policy();
    let zero = LaurentSeries::zero(prime, policy);
    let one = LaurentSeries::one(prime, policy);
    let cubic = [curve.b.clone(), curve.a.clone(), zero, one];
    let x = newton_root(&cubic, seed)?;
    if !curve.rhs(&x)?.is_zero() {
        return Err(CurveError::NotTorsion);
    }
    Ok(TorsionPoint { x })
}

pub fn velu_step(curve: &CurveParams, point: &TorsionPoint) -> Result<IsogenyStep, CurveError> {
    let alpha = point.x.clone();
    if !curve.rhs(&alpha)?.is_zero() {
        return Err(CurveError::NotTorsion);
    }
    let c = alpha.checked_mul(&alpha)?.mul_int(3).checked_add(&curve.a)?;
    let a = curve.a.checked_add(&c.mul_int(-5))?;
    let b = curve.b.checked_add(&c.checked_mul(&alpha)?.mul_int(-7))?;
    let codomain = CurveParams::new(a, b)?;
    Ok(IsogenyStep { alpha, c, codomain })
}

/// `(x, y) -> (x + c/(x - alpha), y (1 - c/(x - alpha)^2))`.
pub fn velu_eval(step: &IsogenyStep, point: &AffinePoint) -> Result<AffinePoint, CurveError> {
    let d = point.x.checked_add(&-&step.alpha)?;
    if d.is_zero() {
        return Err(CurveError::KernelPoint);
    }
    let u = step.c.checked_div(&d)?;
    let x = point.x.checked_add(&u)?;
    let one = LaurentSeries::one(point.x.prime(), point.x.policy());
    let factor = one.checked_add(&-&u.checked_div(&d)?)?;
    let y = point.y.checked_mul(&factor)?;
    Ok(AffinePoint { x, y })
}

/// Residues `r` in `[0, p)` with `r^3 + a r + b = 0` and `3 r^2 + a != 0` mod p.
pub fn fiber_simple_roots(a: u32, b: u32, p: u32) -> Vec<u32> {
    let p64 = u64::from(p);
    let (a, b) = (u64::from(a) % p64, u64::from(b) % p64);
    (0..p64)
        .filter(|&r| {
            let r2 = r * r % p64;
            (r2 * r + a * r + b) % p64 == 0 && (3 * r2 + a) % p64 != 0
        })
        .map(|r| r as u32)
        .collect()
}

/// One deterministic chain step: the isogeny whose kernel is the lift of the
/// smallest simple root of the fiber cubic.
pub fn chain_step(curve: &CurveParams) -> Result<IsogenyStep, CurveError> {
    let point = kernel_point(curve)?;
    velu_step(curve, &point)
}

/// The 2-torsion point [`chain_step`] would use as kernel.
pub fn kernel_point(curve: &CurveParams) -> Result<TorsionPoint, CurveError> {
    let p = curve.prime().get();
    let (a, b) = reduce_fiber(curve)?;
    let seed = *fiber_simple_roots(a, b, p)
        .first()
        .ok_or(CurveError::NoSimpleFiberRoot(p))?;
    two_torsion_lift(curve, seed)
}

/// Applies `steps` deterministic 2-isogenies.
pub fn chain(curve: &CurveParams, steps: usize) -> Result<CurveParams, CurveError> {
    if steps == 0 {
        return Err(CurveError::ZeroSteps);
    }
    let mut current = curve.clone();
    for _ in 0..steps {
        current = chain_step(&current)?.codomain;
    }
    Ok(current)
}

/// `1728 * 4A^3 / (4A^3 + 27B^2)`.
pub fn j_invariant(curve: &CurveParams) -> Result<LaurentSeries, CurveError> {
    let denominator = curve.core_discriminant()?;
    if denominator.is_zero() {
        return Err(CurveError::Singular);
    }
    if curve.a.is_zero() {
        return Ok(LaurentSeries::zero(curve.prime(), curve.policy()));
    }
    let a3 = curve.a.checked_mul(&curve.a)?.checked_mul(&curve.a)?;
    Ok(a3.mul_int(4 * 1728).checked_div(&denominator)?)
}

/// Residues of the constant terms of A and B.
pub fn reduce_fiber(curve: &CurveParams) -> Result<(u32, u32), CurveError> {
    let residue = |s: &LaurentSeries| {
        s.residue_at_origin()
            .map_err(|_| CurveError::NonIntegralFiber)
    };
    Ok((residue(&curve.a)?, residue(&curve.b)?))
}

/// `#E(F_p)` for `y^2 = x^3 + a x + b`, point at infinity included, by
/// exhaustive enumeration.
pub fn count_points_fp(a: u32, b: u32, p: u32) -> Result<u64, CurveError> {
    if p > MAX_COUNT_PRIME || p <= 3 || !crate::padic::is_prime(u64::from(p)) {
        return Err(CurveError::BadPrime(p));
    }
    let p64 = u64::from(p);
    let (a, b) = (u64::from(a) % p64, u64::from(b) % p64);
    let disc = (4 * a % p64 * a % p64 * a + 27 * b % p64 * b) % p64;
    if disc == 0 {
        return Err(CurveError::SingularReduction(p));
    }
    let mut roots = vec![0u64; p as usize];
    for y in 0..p64 {
        roots[(y * y % p64) as usize] += 1;
    }
    let affine: u64 = (0..p64)
        .map(|x| roots[((x * x % p64 * x + a * x + b) % p64) as usize])
        .sum();
    Ok(affine + 1)
}

/// A point on `curve` with the given x, when the right-hand side is a
/// nonzero square at `t = 0`. The square root is chosen from `root_seed`'s
/// parity: the smaller residue root when even.
pub fn lift_point(
    curve: &CurveParams,
    x: &LaurentSeries,
    root_seed: bool,
) -> Result<Option<AffinePoint>, CurveError> {
    let rhs = curve.rhs(x)?;
    if rhs.t_order() != Some(0) || rhs.coefficients()[0].valuation() != Valuation::Finite(0) {
        return Ok(None);
    }
    let p = curve.prime().get();
    let r = rhs.residue_at_origin()?;
    let p64 = u64::from(p);
    let Some(s) = (1..p64).find(|&s| s * s % p64 == u64::from(r)) else {
        return Ok(None);
    };
    let seed = if root_seed { p64 - s } else { s };
    let policy = curve.policy();
    let zero = LaurentSeries::zero(curve.prime(), policy);
    let one = LaurentSeries::one(curve.prime(), policy);
    let y = newton_root(&[-&rhs, zero, one], seed as u32)?;
    Ok(Some(AffinePoint { x: x.clone(), y }))
}

/// `c` as a constant series at the policy precision.
pub fn constant_series(prime: &Prime, policy: PrecisionPolicy, c: i64) -> LaurentSeries {
    LaurentSeries::constant(PadicScalar::from_integer(prime, c, policy.digits()), policy)
}
