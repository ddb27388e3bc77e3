//! Key encapsulation over deterministic 2-isogeny chains.
//!
//! Secret keys are chain lengths `n` in `[1, n_max]`. The public key carries
//! the truncated Engel digits of the kernel x-series of `E^(n) = chain(base, n)`
//! and a truncated serialization of `j(E^(n))`. Both parties end on
//! `E^(n+r)` and hash its j-invariant.
//!
//! The key space is tiny: with the default `n_max = 2` anyone can recover
//! `n` by trying both values ([`Kem::brute_force_recover_n`]), and the
//! encapsulator does exactly that, because the published digits are lossy
//! and do not determine the curve on their own. The curves in a chain are
//! also isotrivial (their j-invariants are constant series), so only a
//! handful of distinct shared keys exist per parameter set. This is a
//! research toy, not a secure KEM.

use alloc::vec::Vec;
use core::fmt;

use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::codec::{self, CodecError};
use crate::curve::{base_curve, chain, j_invariant, kernel_point, CurveError, CurveParams};
use crate::engel::{engel_encode, EngelDigit, EngelError, Termination};
use crate::laurent::LaurentSeries;
use crate::params::ParamSet;

pub const SHARED_KEY_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KemError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Engel(#[from] EngelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("object was made for a different parameter set")]
    ParameterMismatch,
    #[error("public key does not match any chain length in [1, {0}]")]
    UnknownPublicKey(u8),
    #[error("secret key n = {n} outside [1, {n_max}]")]
    SecretOutOfRange { n: u8, n_max: u8 },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedKey([u8; SHARED_KEY_LEN]);

impl SharedKey {
    pub fn from_bytes(bytes: [u8; SHARED_KEY_LEN]) -> Self {
        SharedKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SHARED_KEY_LEN] {
        &self.0
    }
}

impl fmt::Debug for SharedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedKey(")?;
        for b in &self.0[..4] {
            write!(f, "{b:02x}")?;
        }
        f.write_str("..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    params: ParamSet,
    n: u8,
}

impl SecretKey {
    pub fn new(params: ParamSet, n: u8) -> Self {
        SecretKey { params, n }
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn n(&self) -> u8 {
        self.n
    }
}

/// Public data in its wire-level (truncated) form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    params: ParamSet,
    /// Digits with units cut to `d` coefficients, one base-p digit each.
    digits: Vec<EngelDigit>,
    termination: Termination,
    /// Length of the full canonical j serialization.
    j_len: u32,
    /// The part of it that fits in the key.
    j_prefix: Vec<u8>,
}

impl PublicKey {
    pub(crate) fn from_parts(
        params: ParamSet,
        digits: Vec<EngelDigit>,
        termination: Termination,
        j_len: u32,
        j_prefix: Vec<u8>,
    ) -> Self {
        PublicKey {
            params,
            digits,
            termination,
            j_len,
            j_prefix,
        }
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn digits(&self) -> &[EngelDigit] {
        &self.digits
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn j_len(&self) -> u32 {
        self.j_len
    }

    pub fn j_prefix(&self) -> &[u8] {
        &self.j_prefix
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    params: ParamSet,
    a: LaurentSeries,
    b: LaurentSeries,
    payload: Vec<u8>,
}

impl Ciphertext {
    pub fn new(params: ParamSet, a: LaurentSeries, b: LaurentSeries, payload: Vec<u8>) -> Self {
        Ciphertext {
            params,
            a,
            b,
            payload,
        }
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// The published curve `E^(r)`.
    pub fn curve_coefficients(&self) -> (&LaurentSeries, &LaurentSeries) {
        (&self.a, &self.b)
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }
}

/// Builds the public key of the curve `E^(n)`.
pub fn public_key_for(params: &ParamSet, curve: &CurveParams) -> Result<PublicKey, KemError> {
    let kernel = kernel_point(curve)?;
    let expansion = engel_encode(&kernel.x, usize::from(params.m()))?;
    let digits = expansion
        .digits()
        .iter()
        .map(|digit| codec::truncate_digit(digit, params))
        .collect::<Result<Vec<_>, _>>()?;
    let j = codec::encode_series(&j_invariant(curve)?);
    let capacity = codec::j_capacity(params);
    let j_prefix = j[..j.len().min(capacity)].to_vec();
    Ok(PublicKey {
        params: params.clone(),
        digits,
        termination: expansion.termination(),
        j_len: j.len() as u32,
        j_prefix,
    })
}

/// SHA-256 over the canonical serialization of `j`.
pub fn derive_key(j: &LaurentSeries) -> SharedKey {
    SharedKey(Sha256::digest(codec::encode_series(j)).into())
}

/// XORs `data` with the keystream `SHA-256(key || counter)`, counter as
/// little-endian u64 starting at 0. Its own inverse.
pub fn apply_mask(key: &SharedKey, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (counter, chunk) in data.chunks(32).enumerate() {
        let block = Sha256::new()
            .chain_update(key.0)
            .chain_update((counter as u64).to_le_bytes())
            .finalize();
        out.extend(chunk.iter().zip(block.iter()).map(|(m, k)| m ^ k));
    }
    out
}

/// Uniform integer in `[1, bound]`.
fn sample_count<R: RngCore + CryptoRng>(rng: &mut R, bound: u8) -> u8 {
    let bound = u32::from(bound);
    let zone = u32::MAX - (u32::MAX % bound);
    loop {
        let v = rng.next_u32();
        if v < zone {
            return (v % bound) as u8 + 1;
        }
    }
}

/// A parameter set with its base curve and the curves `chain(base, k)`,
/// `k = 1..=n_max`, together with their public keys. Every key of the
/// parameter set is one of these, so they are computed once.
#[derive(Debug, Clone)]
pub struct Kem {
    params: ParamSet,
    base: CurveParams,
    curves: Vec<CurveParams>,
    public_keys: Vec<PublicKey>,
}

impl Kem {
    pub fn new(params: ParamSet) -> Result<Self, KemError> {
        let base = base_curve(params.prime(), params.policy())?;
        let mut curves = Vec::with_capacity(usize::from(params.n_max()));
        let mut public_keys = Vec::with_capacity(curves.capacity());
        let mut current = base.clone();
        for _ in 0..params.n_max() {
            current = chain(&current, 1)?;
            public_keys.push(public_key_for(&params, &current)?);
            curves.push(current.clone());
        }
        Ok(Kem {
            params,
            base,
            curves,
            public_keys,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn base(&self) -> &CurveParams {
        &self.base
    }

    /// `chain(base, n)` for `n` in `[1, n_max]`.
    pub fn curve(&self, n: u8) -> Option<&CurveParams> {
        self.curves.get(usize::from(n).checked_sub(1)?)
    }

    fn check_n(&self, n: u8) -> Result<(), KemError> {
        if n == 0 || n > self.params.n_max() {
            return Err(KemError::SecretOutOfRange {
                n,
                n_max: self.params.n_max(),
            });
        }
        Ok(())
    }

    fn check_params(&self, other: &ParamSet) -> Result<(), KemError> {
        if codec::WireHeader::for_params(other) != codec::WireHeader::for_params(&self.params) {
            return Err(KemError::ParameterMismatch);
        }
        Ok(())
    }

    pub fn keygen<R: RngCore + CryptoRng>(&self, rng: &mut R) -> (PublicKey, SecretKey) {
        let n = sample_count(rng, self.params.n_max());
        self.keygen_with(n).expect("sampled n is in range")
    }

    /// Key pair for a chosen secret.
    pub fn keygen_with(&self, n: u8) -> Result<(PublicKey, SecretKey), KemError> {
        self.check_n(n)?;
        let pk = self.public_keys[usize::from(n) - 1].clone();
        Ok((pk, SecretKey::new(self.params.clone(), n)))
    }

    /// Finds the chain length whose public data equals `pk`.
    pub fn brute_force_recover_n(&self, pk: &PublicKey) -> Result<u8, KemError> {
        self.check_params(pk.params())?;
        self.public_keys
            .iter()
            .position(|candidate| candidate.digits == pk.digits
                && candidate.termination == pk.termination
                && candidate.j_len == pk.j_len
                && candidate.j_prefix == pk.j_prefix)
            .map(|i| i as u8 + 1)
            .ok_or(KemError::UnknownPublicKey(self.params.n_max()))
    }

    pub fn encap<R: RngCore + CryptoRng>(
        &self,
        pk: &PublicKey,
        rng: &mut R,
    ) -> Result<(Ciphertext, SharedKey), KemError> {
        let r = sample_count(rng, self.params.n_max());
        self.encap_with(pk, r)
    }

    /// Encapsulation with a chosen ephemeral chain length `r`.
    pub fn encap_with(&self, pk: &PublicKey, r: u8) -> Result<(Ciphertext, SharedKey), KemError> {
        self.check_n(r)?;
        let n = self.brute_force_recover_n(pk)?;
        let published = &self.curves[usize::from(r) - 1];
        let shared = chain(&self.curves[usize::from(n) - 1], usize::from(r))?;
        let key = derive_key(&j_invariant(&shared)?);
        let ct = Ciphertext::new(
            self.params.clone(),
            published.a().clone(),
            published.b().clone(),
            Vec::new(),
        );
        Ok((ct, key))
    }

    pub fn decap(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<SharedKey, KemError> {
        self.check_params(sk.params())?;
        self.check_params(ct.params())?;
        self.check_n(sk.n())?;
        let published = CurveParams::new(ct.a.clone(), ct.b.clone())?;
        let shared = chain(&published, usize::from(sk.n()))?;
        Ok(derive_key(&j_invariant(&shared)?))
    }

    pub fn pke_encrypt<R: RngCore + CryptoRng>(
        &self,
        pk: &PublicKey,
        message: &[u8],
        rng: &mut R,
    ) -> Result<Ciphertext, KemError> {
        let (mut ct, key) = self.encap(pk, rng)?;
        ct.payload = apply_mask(&key, message);
        Ok(ct)
    }

    pub fn pke_decrypt(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<Vec<u8>, KemError> {
        let key = self.decap(sk, ct)?;
        Ok(apply_mask(&key, &ct.payload))
    }
}
