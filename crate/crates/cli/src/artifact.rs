//! Reading and writing keys, ciphertexts and shared secrets.
//!
//! Artifacts are written either as raw bytes or as one line of lowercase
//! hex. On read, input starting with the wire magic is taken as binary and
//! anything else as hex text.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use epik_core::codec::{CodecError, MAGIC};
use epik_core::kem::{SharedKey, SHARED_KEY_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Binary,
    Hex,
}

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: not valid hex")]
    BadHex { path: PathBuf },
    #[error("{path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: CodecError,
    },
    #[error("{path}: shared key must be {SHARED_KEY_LEN} bytes or {} hex digits", 2 * SHARED_KEY_LEN)]
    KeyLength { path: PathBuf },
}

fn io_error(path: &Path, source: io::Error) -> ArtifactError {
    ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_raw(path: &Path) -> Result<Vec<u8>, ArtifactError> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn decode_hex_text(path: &Path, bytes: &[u8]) -> Result<Vec<u8>, ArtifactError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ArtifactError::BadHex { path: path.to_path_buf() })?;
    let compact: String = text.split_whitespace().collect();
    hex::decode(compact).map_err(|_| ArtifactError::BadHex { path: path.to_path_buf() })
}

/// Wire bytes of an artifact file in either format.
pub fn read_artifact(path: &Path) -> Result<Vec<u8>, ArtifactError> {
    let bytes = read_raw(path)?;
    if bytes.starts_with(&MAGIC) {
        Ok(bytes)
    } else {
        decode_hex_text(path, &bytes)
    }
}

/// Decodes an artifact file with a wire decoder, tagging errors with the path.
pub fn load<T>(path: &Path, decode: impl FnOnce(&[u8]) -> Result<T, CodecError>) -> Result<T, ArtifactError> {
    let bytes = read_artifact(path)?;
    decode(&bytes).map_err(|source| ArtifactError::Codec {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_artifact(path: &Path, bytes: &[u8], format: Format) -> Result<(), ArtifactError> {
    let result = match format {
        Format::Binary => fs::write(path, bytes),
        Format::Hex => fs::write(path, hex::encode(bytes) + "\n"),
    };
    result.map_err(|e| io_error(path, e))
}

/// A shared key file: exactly 32 raw bytes, or 64 hex digits.
pub fn read_key(path: &Path) -> Result<SharedKey, ArtifactError> {
    let bytes = read_raw(path)?;
    let raw = if bytes.len() == SHARED_KEY_LEN {
        bytes
    } else {
        decode_hex_text(path, &bytes)?
    };
    let array: [u8; SHARED_KEY_LEN] = raw
        .try_into()
        .map_err(|_| ArtifactError::KeyLength { path: path.to_path_buf() })?;
    Ok(SharedKey::from_bytes(array))
}

pub fn write_key(path: &Path, key: &SharedKey, format: Format) -> Result<(), ArtifactError> {
    write_artifact(path, key.as_bytes(), format)
}
