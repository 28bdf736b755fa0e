//! Additively homomorphic public-key encryption.
//!
//! Two backends implement [`EncryptionBackend`]: exponent ElGamal over the
//! Ristretto group ([`GroupBackend`]) and a transparent [`MockBackend`] whose
//! ciphertexts carry the plaintext, used to test the protocol logic quickly.

mod group;
mod mock;

pub use group::GroupBackend;
pub use mock::MockBackend;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("plaintext {m} outside 0..={max}")]
    OutOfRange { m: u64, max: u64 },
    #[error("ciphertext does not decrypt to a value in 0..={0}")]
    Undecodable(u64),
    #[error("ciphertext or key does not belong to this key pair")]
    KeyMismatch,
    #[error("malformed {0}")]
    Malformed(&'static str),
    #[error("length mismatch: {0} ciphertexts, {1} plaintexts")]
    LengthMismatch(usize, usize),
}

/// Backend-specific ciphertext bytes of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(pub Vec<u8>);

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext({})", hex_prefix(&self.0))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey(pub Vec<u8>);

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", hex_prefix(&self.0))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(pub Vec<u8>);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Debug, Clone)]
pub struct KeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

fn hex_prefix(b: &[u8]) -> String {
    b.iter().take(8).map(|x| format!("{x:02x}")).collect::<String>() + ".."
}

pub trait EncryptionBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn ciphertext_len(&self) -> usize;

    /// Largest plaintext `decrypt_small` recovers.
    fn max_plain(&self) -> u64;

    fn keygen(&self, rng: &mut dyn RngCore) -> KeyPair;

    fn validate_public_key(&self, pk: &PublicKey) -> Result<(), CryptoError>;

    /// Randomized encryption of `m`; `m` must not exceed `max_plain`.
    fn encrypt(&self, pk: &PublicKey, m: u64, rng: &mut dyn RngCore)
        -> Result<Ciphertext, CryptoError>;

    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError>;

    fn add_plain(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError>;

    fn scalar_mul(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError>;

    fn decrypt_small(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<u64, CryptoError>;

    /// Deterministic encryption of 0 under `pk`.
    fn identity(&self, pk: &PublicKey) -> Result<Ciphertext, CryptoError>;

    /// Encryption of `Σ plains[i] · Dec(cts[i])`. Overflow past `max_plain`
    /// is the caller's problem.
    fn dot_product(
        &self,
        pk: &PublicKey,
        cts: &[Ciphertext],
        plains: &[u64],
    ) -> Result<Ciphertext, CryptoError> {
        if cts.len() != plains.len() {
            return Err(CryptoError::LengthMismatch(cts.len(), plains.len()));
        }
        let mut acc = self.identity(pk)?;
        for (ct, &k) in cts.iter().zip(plains) {
            if k != 0 {
                acc = self.add(&acc, &self.scalar_mul(ct, k)?)?;
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Mock,
    Group,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Mock => "mock",
            BackendKind::Group => "group",
        }
    }

    pub fn build(self, max_plain: u64) -> Arc<dyn EncryptionBackend> {
        match self {
            BackendKind::Mock => Arc::new(MockBackend::new(max_plain)),
            BackendKind::Group => Arc::new(GroupBackend::new(max_plain)),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "group" => Ok(BackendKind::Group),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}
