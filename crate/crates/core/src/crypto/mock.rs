use rand::RngCore;

use super::{Ciphertext, CryptoError, EncryptionBackend, KeyPair, PublicKey, SecretKey};

/// Transparent backend. A key is a random tag; a ciphertext is
/// `m ‖ tag ‖ noise`, three little-endian u64 words. Not secure.
#[derive(Debug, Clone)]
pub struct MockBackend {
    max_plain: u64,
}

impl MockBackend {
    pub fn new(max_plain: u64) -> Self {
        MockBackend { max_plain }
    }
}

fn tag_of(bytes: &[u8]) -> Result<u64, CryptoError> {
    Ok(u64::from_le_bytes(
        bytes.try_into().map_err(|_| CryptoError::Malformed("mock key"))?,
    ))
}

fn unpack(ct: &Ciphertext) -> Result<[u64; 3], CryptoError> {
    if ct.0.len() != 24 {
        return Err(CryptoError::Malformed("mock ciphertext"));
    }
    let w = |i: usize| u64::from_le_bytes(ct.0[i * 8..i * 8 + 8].try_into().unwrap());
    Ok([w(0), w(1), w(2)])
}

fn pack(m: u64, tag: u64, noise: u64) -> Ciphertext {
    let mut v = Vec::with_capacity(24);
    v.extend_from_slice(&m.to_le_bytes());
    v.extend_from_slice(&tag.to_le_bytes());
    v.extend_from_slice(&noise.to_le_bytes());
    Ciphertext(v)
}

impl EncryptionBackend for MockBackend {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn ciphertext_len(&self) -> usize {
        24
    }

    fn max_plain(&self) -> u64 {
        self.max_plain
    }

    fn keygen(&self, rng: &mut dyn RngCore) -> KeyPair {
        let tag = rng.next_u64().to_le_bytes().to_vec();
        KeyPair {
            public: PublicKey(tag.clone()),
            secret: SecretKey(tag),
        }
    }

    fn validate_public_key(&self, pk: &PublicKey) -> Result<(), CryptoError> {
        tag_of(&pk.0).map(drop)
    }

    fn encrypt(
        &self,
        pk: &PublicKey,
        m: u64,
        rng: &mut dyn RngCore,
    ) -> Result<Ciphertext, CryptoError> {
        if m > self.max_plain {
            return Err(CryptoError::OutOfRange { m, max: self.max_plain });
        }
        Ok(pack(m, tag_of(&pk.0)?, rng.next_u64()))
    }

    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        let [ma, ta, na] = unpack(a)?;
        let [mb, tb, nb] = unpack(b)?;
        if ta != tb {
            return Err(CryptoError::KeyMismatch);
        }
        Ok(pack(ma.wrapping_add(mb), ta, na.wrapping_add(nb)))
    }

    fn add_plain(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError> {
        let [m, t, n] = unpack(ct)?;
        Ok(pack(m.wrapping_add(k), t, n))
    }

    fn scalar_mul(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError> {
        let [m, t, n] = unpack(ct)?;
        Ok(pack(m.wrapping_mul(k), t, n.wrapping_mul(k)))
    }

    fn decrypt_small(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<u64, CryptoError> {
        let [m, t, _] = unpack(ct)?;
        if t != tag_of(&sk.0)? {
            return Err(CryptoError::KeyMismatch);
        }
        if m > self.max_plain {
            return Err(CryptoError::Undecodable(self.max_plain));
        }
        Ok(m)
    }

    fn identity(&self, pk: &PublicKey) -> Result<Ciphertext, CryptoError> {
        Ok(pack(0, tag_of(&pk.0)?, 0))
    }
}
