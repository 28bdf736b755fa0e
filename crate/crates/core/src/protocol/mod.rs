//! Secure backward search.
//!
//! The client holds the trace and a key pair, the server holds the index.
//! For every symbol of `trace ‖ ;`, last first, and every bit row `r` of
//! the wavelet matrix, the client sends its interval endpoints as encrypted
//! one-hot vectors of length 2M (M = |T|+1; the hot slot is `bit·M + index`).
//! The server answers with the dot product against the row's `0-rank ‖
//! 1-srank` table, shifted by a fresh random offset R, and the client keeps
//! working with the shifted positions modulo M. An empty interval after the
//! last row of a symbol makes the symbol a log move: the client goes back to
//! the positions it had before the symbol and the server to the matching R.

mod client;
mod server;
mod transport;

pub use client::{ClientSession, RowStep};
pub use server::{server_init, ServerConfig, ServerIndex, ServerSession};
pub use transport::{LocalTransport, RecordingTransport, Transport};

use thiserror::Error;

use crate::crypto::{Ciphertext, CryptoError, EncryptionBackend, PublicKey};
use crate::index::Budget;

pub const PROTOCOL_VERSION: u8 = 1;

/// Session parameters the server discloses after the handshake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    /// |T| + 1
    pub m: u64,
    pub width: u8,
    pub alphabet: Vec<String>,
    pub ciphertext_len: u32,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello {
        version: u8,
        backend: String,
        public_key: PublicKey,
    },
    InitAck(SessionConfig),
    PlfRequest {
        row: u8,
        undo: bool,
        vf: Vec<Ciphertext>,
        vg: Vec<Ciphertext>,
    },
    PlfResponse {
        f: Ciphertext,
        g: Ciphertext,
    },
    Abort(String),
    Bye,
    /// Log move on the last symbol, which has no following request to
    /// carry the undo flag.
    Undo,
    UndoAck,
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "HELLO",
            Message::InitAck(_) => "INIT_ACK",
            Message::PlfRequest { .. } => "PLF_REQ",
            Message::PlfResponse { .. } => "PLF_RESP",
            Message::Abort(_) => "ABORT",
            Message::Bye => "BYE",
            Message::Undo => "UNDO",
            Message::UndoAck => "UNDO_ACK",
        }
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("server aborted: {0}")]
    Aborted(String),
    #[error("unexpected {got} while waiting for {expected}")]
    Unexpected {
        expected: &'static str,
        got: &'static str,
    },
    #[error("label `{0}` is not in the server alphabet")]
    UnknownLabel(String),
    #[error("session already used for a trace")]
    SessionUsed,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("transport: {0}")]
    Transport(#[from] std::io::Error),
}

/// Fresh encryption of the one-hot vector with its 1 at `bit·M + index`.
pub fn pack(
    backend: &dyn EncryptionBackend,
    pk: &PublicKey,
    index: u64,
    bit: u32,
    m: u64,
    rng: &mut dyn rand::RngCore,
) -> Result<Vec<Ciphertext>, CryptoError> {
    if index >= m || bit > 1 {
        return Err(CryptoError::OutOfRange { m: index, max: m - 1 });
    }
    let hot = u64::from(bit) * m + index;
    (0..2 * m)
        .map(|slot| backend.encrypt(pk, u64::from(slot == hot), rng))
        .collect()
}

/// Emptiness of an interval whose endpoints carry the same offset modulo `m`.
pub fn emptiness_check(f_obf: u64, g_obf: u64, m: u64) -> bool {
    (g_obf + m - f_obf).is_multiple_of(m)
}

/// Largest value the client must be able to decrypt for index size `m`.
pub fn required_max_plain(m: u64) -> u64 {
    3 * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::BackendKind;
    use rand::SeedableRng;

    #[test]
    fn pack_hot_slot() {
        let be = BackendKind::Mock.build(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let kp = be.keygen(&mut rng);
        let dec = |v: &[Ciphertext]| -> Vec<u64> {
            v.iter().map(|c| be.decrypt_small(&kp.secret, c).unwrap()).collect()
        };
        let v = dec(&pack(&*be, &kp.public, 7, 0, 12, &mut rng).unwrap());
        assert_eq!(v.len(), 24);
        assert_eq!(v.iter().position(|&x| x == 1), Some(7));
        assert_eq!(v.iter().sum::<u64>(), 1);
        let v = dec(&pack(&*be, &kp.public, 0, 1, 12, &mut rng).unwrap());
        assert_eq!(v.iter().position(|&x| x == 1), Some(12));
        assert!(pack(&*be, &kp.public, 12, 0, 12, &mut rng).is_err());
    }

    #[test]
    fn pack_group_sweep() {
        let be = BackendKind::Group.build(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let kp = be.keygen(&mut rng);
        let v = pack(&*be, &kp.public, 3, 1, 5, &mut rng).unwrap();
        let plain: Vec<u64> = v.iter().map(|c| be.decrypt_small(&kp.secret, c).unwrap()).collect();
        assert_eq!(plain, vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn emptiness_examples() {
        assert!(emptiness_check(5, 5, 12));
        // ⟦3,6⦆ shifted by 9 modulo 12
        assert!(!emptiness_check(0, 3, 12));
    }

    #[test]
    fn emptiness_exhaustive() {
        for m in 2..=16u64 {
            for f in 0..m {
                for g in f..m {
                    for r in 0..m {
                        assert_eq!(emptiness_check((f + r) % m, (g + r) % m, m), f == g);
                    }
                }
            }
        }
    }
}
