use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoBasepointTable, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};
use rand::RngCore;

use super::{Ciphertext, CryptoError, EncryptionBackend, KeyPair, PublicKey, SecretKey};

/// Exponent ElGamal over Ristretto255: `Enc(m) = (r·G, m·G + r·P)`.
///
/// Decryption recovers `m·G` and looks it up in a table of the first
/// `max_plain + 1` multiples of `G`, built on first use.
pub struct GroupBackend {
    max_plain: u64,
    dlog: OnceLock<HashMap<[u8; 32], u64>>,
    // fixed-base table for the last public key seen by `encrypt`
    pk_table: Mutex<Option<(Vec<u8>, Arc<RistrettoBasepointTable>)>>,
}

impl GroupBackend {
    pub fn new(max_plain: u64) -> Self {
        GroupBackend {
            max_plain,
            dlog: OnceLock::new(),
            pk_table: Mutex::new(None),
        }
    }

    fn table(&self) -> &HashMap<[u8; 32], u64> {
        self.dlog.get_or_init(|| {
            let mut map = HashMap::with_capacity(self.max_plain as usize + 1);
            let mut p = RistrettoPoint::identity();
            for m in 0..=self.max_plain {
                map.insert(p.compress().to_bytes(), m);
                p += RISTRETTO_BASEPOINT_POINT;
            }
            map
        })
    }

    fn pk_table(&self, pk: &PublicKey) -> Result<Arc<RistrettoBasepointTable>, CryptoError> {
        let mut slot = self.pk_table.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((bytes, table)) = slot.as_ref() {
            if *bytes == pk.0 {
                return Ok(table.clone());
            }
        }
        let table = Arc::new(RistrettoBasepointTable::create(&point(&pk.0)?));
        *slot = Some((pk.0.clone(), table.clone()));
        Ok(table)
    }
}

impl std::fmt::Debug for GroupBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupBackend")
            .field("max_plain", &self.max_plain)
            .finish()
    }
}

fn point(bytes: &[u8]) -> Result<RistrettoPoint, CryptoError> {
    CompressedRistretto::from_slice(bytes)
        .map_err(|_| CryptoError::Malformed("group element"))?
        .decompress()
        .ok_or(CryptoError::Malformed("group element"))
}

fn unpack(ct: &Ciphertext) -> Result<(RistrettoPoint, RistrettoPoint), CryptoError> {
    if ct.0.len() != 64 {
        return Err(CryptoError::Malformed("group ciphertext"));
    }
    Ok((point(&ct.0[..32])?, point(&ct.0[32..])?))
}

fn pack(a: RistrettoPoint, b: RistrettoPoint) -> Ciphertext {
    let mut v = Vec::with_capacity(64);
    v.extend_from_slice(a.compress().as_bytes());
    v.extend_from_slice(b.compress().as_bytes());
    Ciphertext(v)
}

fn random_scalar(rng: &mut dyn RngCore) -> Scalar {
    let mut wide = [0u8; 64];
    rng.fill_bytes(&mut wide);
    Scalar::from_bytes_mod_order_wide(&wide)
}

fn secret(sk: &SecretKey) -> Result<Scalar, CryptoError> {
    let bytes: [u8; 32] = sk.0.as_slice().try_into().map_err(|_| CryptoError::Malformed("secret key"))?;
    Option::from(Scalar::from_canonical_bytes(bytes)).ok_or(CryptoError::Malformed("secret key"))
}

impl EncryptionBackend for GroupBackend {
    fn name(&self) -> &'static str {
        "group"
    }

    fn ciphertext_len(&self) -> usize {
        64
    }

    fn max_plain(&self) -> u64 {
        self.max_plain
    }

    fn keygen(&self, rng: &mut dyn RngCore) -> KeyPair {
        let x = random_scalar(rng);
        let p = &x * RISTRETTO_BASEPOINT_TABLE;
        KeyPair {
            public: PublicKey(p.compress().to_bytes().to_vec()),
            secret: SecretKey(x.to_bytes().to_vec()),
        }
    }

    fn validate_public_key(&self, pk: &PublicKey) -> Result<(), CryptoError> {
        let p = point(&pk.0)?;
        if p == RistrettoPoint::identity() {
            return Err(CryptoError::Malformed("public key is the identity"));
        }
        Ok(())
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
        let table = self.pk_table(pk)?;
        let r = random_scalar(rng);
        let c1 = &r * RISTRETTO_BASEPOINT_TABLE;
        let mut c2 = &r * &*table;
        match m {
            0 => {}
            1 => c2 += RISTRETTO_BASEPOINT_POINT,
            _ => c2 += &Scalar::from(m) * RISTRETTO_BASEPOINT_TABLE,
        }
        Ok(pack(c1, c2))
    }

    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        let (a1, a2) = unpack(a)?;
        let (b1, b2) = unpack(b)?;
        Ok(pack(a1 + b1, a2 + b2))
    }

    fn add_plain(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError> {
        let (c1, c2) = unpack(ct)?;
        Ok(pack(c1, c2 + &Scalar::from(k) * RISTRETTO_BASEPOINT_TABLE))
    }

    fn scalar_mul(&self, ct: &Ciphertext, k: u64) -> Result<Ciphertext, CryptoError> {
        let (c1, c2) = unpack(ct)?;
        let k = Scalar::from(k);
        Ok(pack(c1 * k, c2 * k))
    }

    fn decrypt_small(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<u64, CryptoError> {
        let x = secret(sk)?;
        let (c1, c2) = unpack(ct)?;
        let mg = (c2 - c1 * x).compress();
        self.table()
            .get(mg.as_bytes())
            .copied()
            .ok_or(CryptoError::Undecodable(self.max_plain))
    }

    fn identity(&self, pk: &PublicKey) -> Result<Ciphertext, CryptoError> {
        self.validate_public_key(pk)?;
        Ok(pack(RistrettoPoint::identity(), RistrettoPoint::identity()))
    }

    /// One multiscalar multiplication per component. Variable time in the
    /// plaintext weights.
    fn dot_product(
        &self,
        _pk: &PublicKey,
        cts: &[Ciphertext],
        plains: &[u64],
    ) -> Result<Ciphertext, CryptoError> {
        if cts.len() != plains.len() {
            return Err(CryptoError::LengthMismatch(cts.len(), plains.len()));
        }
        let mut scalars = Vec::with_capacity(cts.len());
        let mut firsts = Vec::with_capacity(cts.len());
        let mut seconds = Vec::with_capacity(cts.len());
        for (ct, &k) in cts.iter().zip(plains) {
            if k == 0 {
                continue;
            }
            let (c1, c2) = unpack(ct)?;
            scalars.push(Scalar::from(k));
            firsts.push(c1);
            seconds.push(c2);
        }
        let c1 = RistrettoPoint::vartime_multiscalar_mul(&scalars, &firsts);
        let c2 = RistrettoPoint::vartime_multiscalar_mul(&scalars, &seconds);
        Ok(pack(c1, c2))
    }
}
