use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{required_max_plain, Message, SessionConfig, PROTOCOL_VERSION};
use crate::crypto::{BackendKind, Ciphertext, EncryptionBackend, PublicKey};
use crate::index::{Budget, FmIndex, IndexError};
use crate::model::{Alphabet, RunsText};

/// Read-only server state shared by every session.
#[derive(Debug)]
pub struct ServerIndex {
    index: FmIndex,
    ranks01: Vec<Vec<u64>>,
    m: u64,
}

impl ServerIndex {
    pub fn new(index: FmIndex) -> Self {
        let wm = index.wavelet();
        let ranks01 = (0..wm.width() as usize).map(|r| wm.ranks01(r)).collect();
        let m = index.text_len() as u64 + 1;
        ServerIndex { index, ranks01, m }
    }

    pub fn index(&self) -> &FmIndex {
        &self.index
    }

    /// |T| + 1
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn width(&self) -> u32 {
        self.index.wavelet().width()
    }

    pub fn ranks01(&self, row: usize) -> &[u64] {
        &self.ranks01[row]
    }
}

/// Build the index once; the returned size M is what clients are told.
pub fn server_init(text: &RunsText, alphabet: &Alphabet) -> Result<(Arc<ServerIndex>, u64), IndexError> {
    let shared = Arc::new(ServerIndex::new(FmIndex::build(text, alphabet)?));
    let m = shared.m();
    Ok((shared, m))
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub budget: Budget,
    pub backends: Vec<BackendKind>,
    /// Seed for the offsets; fresh entropy when `None`.
    pub seed: Option<u64>,
    /// When false every offset is 0. For tests only.
    pub obfuscate: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            budget: Budget::Limited(8),
            backends: vec![BackendKind::Mock, BackendKind::Group],
            seed: None,
            obfuscate: true,
        }
    }
}

struct Ready {
    backend: Arc<dyn EncryptionBackend>,
    pk: PublicKey,
}

/// One client's session. Owns the offsets and the budget.
pub struct ServerSession {
    shared: Arc<ServerIndex>,
    config: ServerConfig,
    ready: Option<Ready>,
    closed: bool,
    rng: ChaCha20Rng,
    r: u64,
    old_r: u64,
    next_row: u32,
    undos: usize,
    offsets: Option<Vec<u64>>,
}

impl ServerSession {
    pub fn new(shared: Arc<ServerIndex>, config: ServerConfig) -> Self {
        let rng = match config.seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_entropy(),
        };
        ServerSession {
            shared,
            config,
            ready: None,
            closed: false,
            rng,
            r: 0,
            old_r: 0,
            next_row: 0,
            undos: 0,
            offsets: None,
        }
    }

    /// Record every offset drawn from now on.
    pub fn record_offsets(&mut self) {
        self.offsets = Some(Vec::new());
    }

    pub fn offsets(&self) -> &[u64] {
        self.offsets.as_deref().unwrap_or(&[])
    }

    pub fn undos(&self) -> usize {
        self.undos
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Process one client message. `None` means no reply is due.
    pub fn handle(&mut self, msg: Message) -> Option<Message> {
        if self.closed {
            return Some(Message::Abort("session closed".into()));
        }
        let reply = match msg {
            Message::Hello {
                version,
                backend,
                public_key,
            } => self.hello(version, &backend, public_key),
            Message::PlfRequest { row, undo, vf, vg } => self.plf(row, undo, &vf, &vg),
            Message::Undo => self.undo().map(|_| Message::UndoAck),
            Message::Bye => {
                self.closed = true;
                return None;
            }
            other => Err(format!("unexpected {}", other.kind())),
        };
        Some(reply.unwrap_or_else(|reason| {
            self.closed = true;
            Message::Abort(reason)
        }))
    }

    fn hello(&mut self, version: u8, backend: &str, pk: PublicKey) -> Result<Message, String> {
        if self.ready.is_some() {
            return Err("duplicate HELLO".into());
        }
        if version != PROTOCOL_VERSION {
            return Err(format!("protocol version {version}, expected {PROTOCOL_VERSION}"));
        }
        let kind: BackendKind = backend.parse()?;
        if !self.config.backends.contains(&kind) {
            return Err(format!("backend `{backend}` not enabled"));
        }
        let backend = kind.build(required_max_plain(self.shared.m()));
        backend.validate_public_key(&pk).map_err(|e| e.to_string())?;
        let cfg = SessionConfig {
            m: self.shared.m(),
            width: self.shared.width() as u8,
            alphabet: self.shared.index().alphabet().labels().to_vec(),
            ciphertext_len: backend.ciphertext_len() as u32,
            budget: self.config.budget,
        };
        self.ready = Some(Ready { backend, pk });
        Ok(Message::InitAck(cfg))
    }

    fn undo(&mut self) -> Result<(), String> {
        if self.ready.is_none() {
            return Err("UNDO before HELLO".into());
        }
        if self.next_row != 0 {
            return Err(format!("undo in the middle of a symbol (row {})", self.next_row));
        }
        self.r = self.old_r;
        self.undos += 1;
        if !self.config.budget.allows(self.undos) {
            return Err(format!("log-move budget {} exhausted", self.config.budget));
        }
        Ok(())
    }

    fn plf(&mut self, row: u8, undo: bool, vf: &[Ciphertext], vg: &[Ciphertext]) -> Result<Message, String> {
        if self.ready.is_none() {
            return Err("PLF_REQ before HELLO".into());
        }
        if u32::from(row) != self.next_row {
            return Err(format!("row {row} out of order, expected {}", self.next_row));
        }
        if undo {
            self.undo()?;
        } else if row == 0 {
            self.old_r = self.r;
        }
        let m = self.shared.m();
        if vf.len() as u64 != 2 * m || vg.len() as u64 != 2 * m {
            return Err(format!("vector length {} / {}, expected {}", vf.len(), vg.len(), 2 * m));
        }

        // Undo the current offset by rotating each half of the row.
        let ranks = self.shared.ranks01(row as usize);
        let mu = m as usize;
        let shift = self.r as usize;
        let mut derot = vec![0u64; 2 * mu];
        for h in 0..2 {
            for j in 0..mu {
                derot[h * mu + j] = ranks[h * mu + (j + mu - shift) % mu];
            }
        }

        let next_r = if self.config.obfuscate {
            self.rng.gen_range(0..m)
        } else {
            0
        };
        let Ready { backend, pk } = self.ready.as_ref().expect("checked above");
        let reply = |v: &[Ciphertext]| -> Result<Ciphertext, String> {
            let d = backend.dot_product(pk, v, &derot).map_err(|e| e.to_string())?;
            backend.add_plain(&d, next_r).map_err(|e| e.to_string())
        };
        let f = reply(vf)?;
        let g = reply(vg)?;

        self.r = next_r;
        if let Some(log) = self.offsets.as_mut() {
            log.push(next_r);
        }
        self.next_row = (self.next_row + 1) % self.shared.width();
        Ok(Message::PlfResponse { f, g })
    }
}
