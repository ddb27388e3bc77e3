//! Wire formats for series, Engel expansions, keys and ciphertexts.
//!
//! Integers are little-endian; packed bit fields are most significant bit
//! first. Every object starts with a 17-byte [`WireHeader`].
//!
//! Public-key body, exactly `M*d*lambda + ell_e_log` bits:
//!
//! ```text
//! M digit slots of d*lambda bits     unit coefficient residues mod p, lambda bits each
//! ell_e_log bits                     count u8 | termination u8 | M scales u16
//!                                    | j_len u32 | j bytes (truncated) | zero padding
//! ```

use alloc::vec::Vec;

use bitvec::prelude::*;
use num_bigint::BigUint;

use crate::engel::{EngelDigit, EngelExpansion, Termination};
use crate::kem::{Ciphertext, PublicKey, SecretKey};
use crate::laurent::{LaurentSeries, PrecisionPolicy};
use crate::padic::{PadicScalar, Prime, Valuation};
use crate::params::{select_prime, ParamError, ParamSet, Preset};

pub const MAGIC: [u8; 4] = *b"EPIK";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 17;
/// Valuation field value marking a coefficient that is zero at its precision.
pub const ZERO_TAG: i16 = i16::MAX;
/// Bytes of the zero series.
pub const ZERO_SERIES_LEN: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("input ends early")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("header does not match a consistent parameter set: {0}")]
    HeaderMismatch(&'static str),
    #[error("series window or precision differs from the parameter set")]
    PolicyMismatch,
    #[error("malformed input: {0}")]
    Malformed(&'static str),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("value does not fit its field: {0}")]
    Overflow(&'static str),
}

/// Byte cursor over an input slice.
struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.bytes.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.array::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn i16(&mut self) -> Result<i16, CodecError> {
        Ok(i16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn i32(&mut self) -> Result<i32, CodecError> {
        Ok(i32::from_le_bytes(self.array()?))
    }

    fn finish(self) -> Result<(), CodecError> {
        match self.bytes.len() {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireHeader {
    pub version: u8,
    pub preset_id: u8,
    pub prime: u32,
    pub lambda: u8,
    pub d: u8,
    pub m: u8,
    pub ell_e_log: u32,
}

impl WireHeader {
    pub fn for_params(params: &ParamSet) -> Self {
        WireHeader {
            version: VERSION,
            preset_id: params.preset_id(),
            prime: params.prime().get(),
            lambda: params.lambda(),
            d: params.d(),
            m: params.m(),
            ell_e_log: params.ell_e_log(),
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.version;
        out[5] = self.preset_id;
        out[6..10].copy_from_slice(&self.prime.to_le_bytes());
        out[10] = self.lambda;
        out[11] = self.d;
        out[12] = self.m;
        out[13..17].copy_from_slice(&self.ell_e_log.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        Self::read(&mut Reader::new(bytes))
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        if r.array::<4>()? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        Ok(WireHeader {
            version,
            preset_id: r.u8()?,
            prime: r.u32()?,
            lambda: r.u8()?,
            d: r.u8()?,
            m: r.u8()?,
            ell_e_log: r.u32()?,
        })
    }

    /// The parameter set named by the header, after consistency checks.
    pub fn params(&self) -> Result<ParamSet, CodecError> {
        if self.preset_id != 0 {
            let preset = Preset::from_id(self.preset_id)?;
            if preset.knobs() != (self.lambda, self.d, self.m, self.ell_e_log) {
                return Err(CodecError::HeaderMismatch("fields differ from the preset"));
            }
        }
        let params = ParamSet::new(self.lambda, self.d, self.m, self.ell_e_log)?;
        if params.preset_id() != self.preset_id {
            return Err(CodecError::HeaderMismatch("custom set tagged as preset"));
        }
        if select_prime(self.lambda)? != self.prime {
            return Err(CodecError::HeaderMismatch("prime"));
        }
        Ok(params)
    }
}

fn read_header(r: &mut Reader<'_>) -> Result<ParamSet, CodecError> {
    WireHeader::read(r)?.params()
}

/// Bytes used for a mantissa below `p^digits`.
pub fn mantissa_width(prime: &Prime, digits: u32) -> usize {
    let max = prime.pow(digits).into_owned() - 1u32;
    (max.bits() as usize).div_ceil(8).max(1)
}

fn write_coefficient(out: &mut Vec<u8>, c: &PadicScalar, width: usize) -> Result<(), CodecError> {
    let (valuation, precision) = match c.valuation() {
        Valuation::Infinite => {
            let absolute = i16::try_from(c.absolute_precision())
                .map_err(|_| CodecError::Overflow("absolute precision"))?;
            (ZERO_TAG, absolute.to_le_bytes())
        }
        Valuation::Finite(v) => {
            let v = i16::try_from(v)
                .ok()
                .filter(|&v| v != ZERO_TAG)
                .ok_or(CodecError::Overflow("valuation"))?;
            let r = u16::try_from(c.relative_precision())
                .map_err(|_| CodecError::Overflow("relative precision"))?;
            (v, r.to_le_bytes())
        }
    };
    out.extend_from_slice(&valuation.to_le_bytes());
    out.extend_from_slice(&precision);
    let mantissa = c.mantissa().map(BigUint::to_bytes_be).unwrap_or_default();
    let mantissa = if mantissa == [0] { Vec::new() } else { mantissa };
    if mantissa.len() > width {
        return Err(CodecError::Overflow("mantissa"));
    }
    out.resize(out.len() + width - mantissa.len(), 0);
    out.extend_from_slice(&mantissa);
    Ok(())
}

fn read_coefficient(r: &mut Reader<'_>, prime: &Prime, width: usize) -> Result<PadicScalar, CodecError> {
    let valuation = r.i16()?;
    let precision = r.array::<2>()?;
    let mantissa = BigUint::from_bytes_be(r.take(width)?);
    if valuation == ZERO_TAG {
        return Ok(PadicScalar::zero(prime, i64::from(i16::from_le_bytes(precision))));
    }
    let precision = u32::from(u16::from_le_bytes(precision));
    if precision == 0 {
        return Err(CodecError::Malformed("nonzero coefficient without digits"));
    }
    Ok(PadicScalar::from_mantissa(prime, i64::from(valuation), precision, mantissa))
}

fn write_series(out: &mut Vec<u8>, f: &LaurentSeries) -> Result<(), CodecError> {
    let policy = f.policy();
    let t_order = i32::try_from(f.t_order().unwrap_or(0)).map_err(|_| CodecError::Overflow("t-order"))?;
    let window = u16::try_from(policy.window()).map_err(|_| CodecError::Overflow("window"))?;
    let digits = u16::try_from(policy.digits()).map_err(|_| CodecError::Overflow("digits"))?;
    out.extend_from_slice(&t_order.to_le_bytes());
    out.extend_from_slice(&window.to_le_bytes());
    out.extend_from_slice(&digits.to_le_bytes());
    out.push(u8::from(!f.is_zero()));
    let width = mantissa_width(f.prime(), policy.digits());
    for c in f.coefficients() {
        write_coefficient(out, c, width)?;
    }
    Ok(())
}

/// Canonical serialization: t-order i32, window u16, digits u16, nonzero
/// flag u8, then per coefficient valuation i16, precision u16 and a
/// big-endian mantissa of fixed width.
///
/// Panics only when a field overflows its width, which needs windows or
/// precisions far beyond any parameter set.
pub fn encode_series(f: &LaurentSeries) -> Vec<u8> {
    let mut out = Vec::new();
    write_series(&mut out, f).expect("series fits the wire format");
    out
}

fn read_series(r: &mut Reader<'_>, prime: &Prime, policy: PrecisionPolicy) -> Result<LaurentSeries, CodecError> {
    let start = r.bytes;
    let t_order = r.i32()?;
    let window = usize::from(r.u16()?);
    let digits = u32::from(r.u16()?);
    if window != policy.window() || digits != policy.digits() {
        return Err(CodecError::PolicyMismatch);
    }
    let series = match r.u8()? {
        0 => LaurentSeries::zero(prime, policy),
        1 => {
            let width = mantissa_width(prime, digits);
            let coeffs = (0..window)
                .map(|_| read_coefficient(r, prime, width))
                .collect::<Result<Vec<_>, _>>()?;
            LaurentSeries::from_coefficients(prime, policy, i64::from(t_order), coeffs)
                .map_err(|_| CodecError::Malformed("coefficient prime"))?
        }
        _ => return Err(CodecError::Malformed("series flag")),
    };
    let used = start.len() - r.bytes.len();
    if encode_series(&series) != start[..used] {
        return Err(CodecError::Malformed("non-canonical series"));
    }
    Ok(series)
}

pub fn decode_series(bytes: &[u8], prime: &Prime, policy: PrecisionPolicy) -> Result<LaurentSeries, CodecError> {
    let mut r = Reader::new(bytes);
    let series = read_series(&mut r, prime, policy)?;
    r.finish()?;
    Ok(series)
}

/// Count u16, termination u8, then per digit its scale u16 and unit series.
pub fn encode_expansion(e: &EngelExpansion) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(e.len() as u16).to_le_bytes());
    out.push(e.termination().code());
    for digit in e.digits() {
        out.extend_from_slice(&(digit.scale() as u16).to_le_bytes());
        write_series(&mut out, digit.unit()).expect("series fits the wire format");
    }
    out
}

pub fn decode_expansion(
    bytes: &[u8],
    prime: &Prime,
    policy: PrecisionPolicy,
    max_depth: usize,
) -> Result<EngelExpansion, CodecError> {
    let mut r = Reader::new(bytes);
    let count = usize::from(r.u16()?);
    let termination = Termination::from_code(r.u8()?).ok_or(CodecError::Malformed("termination"))?;
    let mut digits = Vec::with_capacity(count.min(max_depth));
    for _ in 0..count {
        let scale = u32::from(r.u16()?);
        let unit = read_series(&mut r, prime, policy)?;
        digits.push(EngelDigit::new(scale, unit).map_err(|_| CodecError::Malformed("digit"))?);
    }
    r.finish()?;
    EngelExpansion::from_digits(prime, policy, max_depth, digits, termination)
        .map_err(|_| CodecError::Malformed("expansion"))
}

fn check_shape(d: u8, lambda: u8) -> Result<(), CodecError> {
    if !(4..=16).contains(&d) {
        return Err(CodecError::Param(ParamError::Digits(d)));
    }
    if !(8..=16).contains(&lambda) {
        return Err(CodecError::Param(ParamError::Lambda(lambda)));
    }
    Ok(())
}

/// The first `d` unit coefficients of `digit`, reduced mod p, as `lambda`-bit
/// fields. The scale is not part of the digit bits.
pub fn encode_digit(digit: &EngelDigit, d: u8, lambda: u8) -> Result<BitVec<u8, Msb0>, CodecError> {
    check_shape(d, lambda)?;
    let mut bits = BitVec::with_capacity(usize::from(d) * usize::from(lambda));
    for i in 0..i64::from(d) {
        let residue = digit
            .unit()
            .coefficient(i)
            .and_then(|c| c.residue())
            .unwrap_or(0);
        if residue >> lambda != 0 {
            return Err(CodecError::Overflow("coefficient residue"));
        }
        let start = bits.len();
        bits.resize(start + usize::from(lambda), false);
        bits[start..].store_be(residue);
    }
    Ok(bits)
}

/// Inverse of [`encode_digit`] on truncated digits: residues become
/// integers at the working precision of `params`.
pub fn decode_digit(bits: &BitSlice<u8, Msb0>, scale: u32, params: &ParamSet) -> Result<EngelDigit, CodecError> {
    let (d, lambda) = (usize::from(params.d()), usize::from(params.lambda()));
    if bits.len() != d * lambda {
        return Err(CodecError::Malformed("digit length"));
    }
    let p = params.prime().get();
    let residues = bits
        .chunks(lambda)
        .map(|chunk| {
            let v: u32 = chunk.load_be();
            if v >= p {
                Err(CodecError::Malformed("residue not below p"))
            } else {
                Ok(i64::from(v))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let unit = LaurentSeries::from_integers(params.prime(), params.policy(), 0, &residues);
    EngelDigit::new(scale, unit).map_err(|_| CodecError::Malformed("digit constant term"))
}

/// [`decode_digit`] after [`encode_digit`].
pub fn truncate_digit(digit: &EngelDigit, params: &ParamSet) -> Result<EngelDigit, CodecError> {
    let bits = encode_digit(digit, params.d(), params.lambda())?;
    decode_digit(&bits, digit.scale(), params)
}

fn side_table_fixed_len(params: &ParamSet) -> usize {
    2 + 2 * usize::from(params.m()) + 4
}

/// Bytes of the j serialization that fit in the public key.
pub fn j_capacity(params: &ParamSet) -> usize {
    (params.ell_e_log() as usize / 8).saturating_sub(side_table_fixed_len(params))
}

/// The public-key body as a bit string of exactly `pk_size_bits` bits.
pub fn encode_pk_body(pk: &PublicKey) -> Result<BitVec<u8, Msb0>, CodecError> {
    let params = pk.params();
    let m = usize::from(params.m());
    if pk.digits().len() > m {
        return Err(CodecError::Malformed("more digits than M"));
    }
    let slot = usize::from(params.d()) * usize::from(params.lambda());
    let mut bits: BitVec<u8, Msb0> = BitVec::with_capacity(params.pk_size_bits() as usize);
    for digit in pk.digits() {
        bits.extend_from_bitslice(&encode_digit(digit, params.d(), params.lambda())?);
    }
    bits.resize(m * slot, false);

    let mut side = Vec::new();
    side.push(pk.digits().len() as u8);
    side.push(pk.termination().code());
    for i in 0..m {
        let scale = pk.digits().get(i).map_or(0, EngelDigit::scale);
        let scale = u16::try_from(scale).map_err(|_| CodecError::Overflow("digit scale"))?;
        side.extend_from_slice(&scale.to_le_bytes());
    }
    side.extend_from_slice(&pk.j_len().to_le_bytes());
    if pk.j_prefix().len() > j_capacity(params) {
        return Err(CodecError::Overflow("j serialization"));
    }
    side.extend_from_slice(pk.j_prefix());
    let side_bits = params.ell_e_log() as usize;
    let mut tail = BitVec::<u8, Msb0>::from_vec(side);
    tail.resize(side_bits, false);
    bits.extend_from_bitslice(&tail);
    debug_assert_eq!(bits.len() as u64, params.pk_size_bits());
    Ok(bits)
}

pub fn decode_pk_body(bits: &BitSlice<u8, Msb0>, params: &ParamSet) -> Result<PublicKey, CodecError> {
    if bits.len() as u64 != params.pk_size_bits() {
        return Err(CodecError::Malformed("body length"));
    }
    let m = usize::from(params.m());
    let slot = usize::from(params.d()) * usize::from(params.lambda());
    let (digit_bits, side_bits) = bits.split_at(m * slot);
    let mut side_vec = side_bits.to_bitvec();
    side_vec.resize(side_bits.len().div_ceil(8) * 8, false);
    let side = side_vec.into_vec();
    let mut r = Reader::new(&side);
    let count = usize::from(r.u8()?);
    if count > m {
        return Err(CodecError::Malformed("digit count"));
    }
    let termination = Termination::from_code(r.u8()?).ok_or(CodecError::Malformed("termination"))?;
    let scales = (0..m).map(|_| r.u16()).collect::<Result<Vec<_>, _>>()?;
    let j_len = r.u32()?;
    let j_prefix = r.take((j_len as usize).min(j_capacity(params)))?.to_vec();

    let digits = digit_bits
        .chunks(slot)
        .zip(&scales)
        .take(count)
        .map(|(chunk, &scale)| decode_digit(chunk, u32::from(scale), params))
        .collect::<Result<Vec<_>, _>>()?;
    let pk = PublicKey::from_parts(params.clone(), digits, termination, j_len, j_prefix);
    if encode_pk_body(&pk)? != bits {
        return Err(CodecError::Malformed("non-canonical public key"));
    }
    Ok(pk)
}

pub fn encode_pk(pk: &PublicKey) -> Result<Vec<u8>, CodecError> {
    let mut out = WireHeader::for_params(pk.params()).to_bytes().to_vec();
    out.extend_from_slice(encode_pk_body(pk)?.as_raw_slice());
    Ok(out)
}

pub fn decode_pk(bytes: &[u8]) -> Result<PublicKey, CodecError> {
    let mut r = Reader::new(bytes);
    let params = read_header(&mut r)?;
    let bits = params.pk_size_bits() as usize;
    let body = r.take(bits.div_ceil(8))?;
    r.finish()?;
    decode_pk_body(&body.view_bits::<Msb0>()[..bits], &params)
}

pub fn encode_sk(sk: &SecretKey) -> Vec<u8> {
    let mut out = WireHeader::for_params(sk.params()).to_bytes().to_vec();
    out.push(sk.n());
    out
}

pub fn decode_sk(bytes: &[u8]) -> Result<SecretKey, CodecError> {
    let mut r = Reader::new(bytes);
    let params = read_header(&mut r)?;
    let n = r.u8()?;
    r.finish()?;
    if n == 0 {
        return Err(CodecError::Malformed("secret chain length 0"));
    }
    Ok(SecretKey::new(params, n))
}

pub fn encode_ct(ct: &Ciphertext) -> Result<Vec<u8>, CodecError> {
    let mut out = WireHeader::for_params(ct.params()).to_bytes().to_vec();
    let (a, b) = ct.curve_coefficients();
    write_series(&mut out, a)?;
    write_series(&mut out, b)?;
    let len = u32::try_from(ct.payload().len()).map_err(|_| CodecError::Overflow("payload"))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(ct.payload());
    Ok(out)
}

pub fn decode_ct(bytes: &[u8]) -> Result<Ciphertext, CodecError> {
    let mut r = Reader::new(bytes);
    let params = read_header(&mut r)?;
    let a = read_series(&mut r, params.prime(), params.policy())?;
    let b = read_series(&mut r, params.prime(), params.policy())?;
    let len = r.u32()? as usize;
    let payload = r.take(len)?.to_vec();
    r.finish()?;
    Ok(Ciphertext::new(params, a, b, payload))
}
