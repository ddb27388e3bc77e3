//! Parameter sets: prime size, Engel digit shape, depth, and the size knob
//! of the public-key encoding.

use core::fmt;

use crate::laurent::PrecisionPolicy;
use crate::padic::{is_prime, Prime};

pub const LAMBDA_RANGE: (u8, u8) = (8, 16);
pub const D_RANGE: (u8, u8) = (4, 16);
pub const M_RANGE: (u8, u8) = (4, 32);
pub const ELL_E_LOG_RANGE: (u32, u32) = (1024, 32768);
pub const DEFAULT_N_MAX: u8 = 2;
/// Floor for the working precision of every preset.
pub const MIN_DIGITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("lambda = {0} outside [8, 16]")]
    Lambda(u8),
    #[error("d = {0} outside [4, 16]")]
    Digits(u8),
    #[error("M = {0} outside [4, 32]")]
    Depth(u8),
    #[error("ell_e_log = {0} outside [1024, 32768]")]
    EllELog(u32),
    #[error("n_max must be at least 1")]
    NMax,
    #[error("no {0}-bit prime congruent to 2 mod 3")]
    NoPrime(u8),
    #[error("unknown preset {0:?}")]
    UnknownPreset(alloc::string::String),
    #[error("unknown preset id {0}")]
    UnknownPresetId(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Iot,
    Sec128,
    High,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Iot, Preset::Sec128, Preset::High];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Iot => "iot",
            Preset::Sec128 => "sec128",
            Preset::High => "high",
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Preset::Iot => 1,
            Preset::Sec128 => 2,
            Preset::High => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self, ParamError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.id() == id)
            .ok_or(ParamError::UnknownPresetId(id))
    }

    /// `(lambda, d, M, ell_e_log)`.
    pub fn knobs(self) -> (u8, u8, u8, u32) {
        match self {
            Preset::Iot => (8, 4, 4, 1024),
            Preset::Sec128 => (8, 8, 8, 16384),
            Preset::High => (16, 16, 16, 32768),
        }
    }
}

impl core::str::FromStr for Preset {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ParamError::UnknownPreset(s.into()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ParamSet {
    preset: Option<Preset>,
    lambda: u8,
    d: u8,
    m: u8,
    ell_e_log: u32,
    n_max: u8,
    prime: Prime,
    policy: PrecisionPolicy,
}

impl ParamSet {
    pub fn new(lambda: u8, d: u8, m: u8, ell_e_log: u32) -> Result<Self, ParamError> {
        let in_range = |v: u8, (lo, hi): (u8, u8)| (lo..=hi).contains(&v);
        if !in_range(lambda, LAMBDA_RANGE) {
            return Err(ParamError::Lambda(lambda));
        }
        if !in_range(d, D_RANGE) {
            return Err(ParamError::Digits(d));
        }
        if !in_range(m, M_RANGE) {
            return Err(ParamError::Depth(m));
        }
        if !(ELL_E_LOG_RANGE.0..=ELL_E_LOG_RANGE.1).contains(&ell_e_log) {
            return Err(ParamError::EllELog(ell_e_log));
        }
        let p = select_prime(lambda)?;
        let digits = working_digits(m);
        let prime = Prime::with_power_table(p, 2 * digits + 8).expect("selected prime is valid");
        let policy = PrecisionPolicy::new(usize::from(d), digits).expect("d >= 4 and digits >= 32");
        let preset = Preset::ALL
            .into_iter()
            .find(|p| p.knobs() == (lambda, d, m, ell_e_log));
        Ok(ParamSet {
            preset,
            lambda,
            d,
            m,
            ell_e_log,
            n_max: DEFAULT_N_MAX,
            prime,
            policy,
        })
    }

    pub fn preset(preset: Preset) -> Self {
        let (lambda, d, m, ell_e_log) = preset.knobs();
        Self::new(lambda, d, m, ell_e_log).expect("presets are in range")
    }

    pub fn with_n_max(mut self, n_max: u8) -> Result<Self, ParamError> {
        if n_max == 0 {
            return Err(ParamError::NMax);
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    /// Wire id: the preset id, or 0 for a custom set.
    pub fn preset_id(&self) -> u8 {
        self.preset.map_or(0, Preset::id)
    }

    pub fn lambda(&self) -> u8 {
        self.lambda
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn ell_e_log(&self) -> u32 {
        self.ell_e_log
    }

    pub fn n_max(&self) -> u8 {
        self.n_max
    }

    pub fn prime(&self) -> &Prime {
        &self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    /// `M * d * lambda + ell_e_log`.
    pub fn pk_size_bits(&self) -> u64 {
        pk_size_bits(self.lambda, self.d, self.m, self.ell_e_log)
    }
}

impl fmt::Debug for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSet")
            .field("preset", &self.preset)
            .field("lambda", &self.lambda)
            .field("d", &self.d)
            .field("m", &self.m)
            .field("ell_e_log", &self.ell_e_log)
            .field("n_max", &self.n_max)
            .field("prime", &self.prime.get())
            .field("policy", &self.policy)
            .finish()
    }
}

pub fn pk_size_bits(lambda: u8, d: u8, m: u8, ell_e_log: u32) -> u64 {
    u64::from(m) * u64::from(d) * u64::from(lambda) + u64::from(ell_e_log)
}

/// The largest `lambda`-bit prime congruent to 2 mod 3.
pub fn select_prime(lambda: u8) -> Result<u32, ParamError> {
    if !(2..=31).contains(&lambda) {
        return Err(ParamError::NoPrime(lambda));
    }
    let top = (1u32 << lambda) - 1;
    let bottom = 1u32 << (lambda - 1);
    (bottom..=top)
        .rev()
        .find(|&n| n > 3 && n % 3 == 2 && is_prime(u64::from(n)))
        .ok_or(ParamError::NoPrime(lambda))
}

/// Working precision that lets an Engel run reach depth `m`: residual `k`
/// has valuation about `k - 1` and each step spends that many digits, plus
/// room to determine the last digit and a small margin.
pub fn working_digits(m: u8) -> u32 {
    let m = u32::from(m);
    let spent = (m - 1) * (m - 2) / 2;
    let last = 2 * (m - 1) + 1;
    (spent + last + 8).max(MIN_DIGITS)
}
