use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{
    emptiness_check, pack, required_max_plain, Message, ProtocolError, SessionConfig, Transport,
    PROTOCOL_VERSION,
};
use crate::crypto::{BackendKind, Ciphertext, EncryptionBackend, KeyPair};
use crate::index::{Alignment, Move};
use crate::model::Alphabet;

/// Decrypted server answers for one bit row, before reduction modulo M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowStep {
    pub symbol: u32,
    pub row: u8,
    pub undo: bool,
    pub f_raw: u64,
    pub g_raw: u64,
}

struct Agreed {
    config: SessionConfig,
    alphabet: Alphabet,
    backend: Arc<dyn EncryptionBackend>,
}

/// Client side of one session: handshake, then exactly one trace.
pub struct ClientSession {
    kind: BackendKind,
    keys: KeyPair,
    rng: ChaCha20Rng,
    agreed: Option<Agreed>,
    used: bool,
    steps: Vec<RowStep>,
}

impl ClientSession {
    /// Fresh key pair; `seed` makes the key and every encryption reproducible.
    pub fn new(kind: BackendKind, seed: Option<u64>) -> Self {
        let mut rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_entropy(),
        };
        let keys = kind.build(0).keygen(&mut rng);
        ClientSession {
            kind,
            keys,
            rng,
            agreed: None,
            used: false,
            steps: Vec::new(),
        }
    }

    pub fn hello(&self) -> Message {
        Message::Hello {
            version: PROTOCOL_VERSION,
            backend: self.kind.name().to_owned(),
            public_key: self.keys.public.clone(),
        }
    }

    /// Validate the server's INIT_ACK (or surface its ABORT).
    pub fn accept(&mut self, reply: Message) -> Result<&SessionConfig, ProtocolError> {
        let config = match reply {
            Message::InitAck(c) => c,
            Message::Abort(reason) => return Err(ProtocolError::Aborted(reason)),
            other => {
                return Err(ProtocolError::Unexpected {
                    expected: "INIT_ACK",
                    got: other.kind(),
                })
            }
        };
        let bad = |what: &str| ProtocolError::Aborted(format!("invalid INIT_ACK: {what}"));
        if config.m < 2 {
            return Err(bad("M < 2"));
        }
        let alphabet = Alphabet::from_labels(config.alphabet.clone()).map_err(|_| bad("alphabet"))?;
        if alphabet.labels() != config.alphabet.as_slice() {
            return Err(bad("alphabet order"));
        }
        if u32::from(config.width) != alphabet.width() {
            return Err(bad("width"));
        }
        let backend = self.kind.build(required_max_plain(config.m));
        if config.ciphertext_len as usize != backend.ciphertext_len() {
            return Err(bad("ciphertext length"));
        }
        self.agreed = Some(Agreed {
            config,
            alphabet,
            backend,
        });
        Ok(&self.agreed.as_ref().unwrap().config)
    }

    pub fn handshake<T: Transport>(&mut self, t: &mut T) -> Result<&SessionConfig, ProtocolError> {
        let reply = t.exchange(self.hello())?;
        self.accept(reply)
    }

    pub fn config(&self) -> Option<&SessionConfig> {
        self.agreed.as_ref().map(|a| &a.config)
    }

    /// Every decrypted answer of the last check, in order.
    pub fn steps(&self) -> &[RowStep] {
        &self.steps
    }

    /// Align `trace` against the server's model. Ends the session.
    pub fn check<T: Transport, S: AsRef<str>>(
        &mut self,
        t: &mut T,
        trace: &[S],
    ) -> Result<Alignment, ProtocolError> {
        if self.used {
            return Err(ProtocolError::SessionUsed);
        }
        let Some(agreed) = self.agreed.as_ref() else {
            return Err(ProtocolError::Unexpected {
                expected: "INIT_ACK",
                got: "nothing",
            });
        };
        self.used = true;
        let alphabet = &agreed.alphabet;
        let backend = agreed.backend.clone();
        let m = agreed.config.m;
        let width = agreed.config.width;

        let mut query = Vec::with_capacity(trace.len() + 1);
        for l in trace {
            let l = l.as_ref();
            query.push(alphabet.code(l).ok_or_else(|| ProtocolError::UnknownLabel(l.to_owned()))?);
        }
        query.push(alphabet.separator());

        let (mut f, mut g) = (0u64, m - 1);
        let mut undo = false;
        let mut moves = Vec::with_capacity(query.len());
        for &c in query.iter().rev() {
            let saved = (f, g);
            for row in 0..width {
                let bit = (c >> row) & 1;
                let vf = pack(&*backend, &self.keys.public, f, bit, m, &mut self.rng)?;
                let vg = pack(&*backend, &self.keys.public, g, bit, m, &mut self.rng)?;
                let flag = undo && row == 0;
                let (cf, cg) = expect_plf(t.exchange(Message::PlfRequest {
                    row,
                    undo: flag,
                    vf,
                    vg,
                })?)?;
                undo = false;
                let f_raw = backend.decrypt_small(&self.keys.secret, &cf)?;
                let g_raw = backend.decrypt_small(&self.keys.secret, &cg)?;
                self.steps.push(RowStep {
                    symbol: c,
                    row,
                    undo: flag,
                    f_raw,
                    g_raw,
                });
                f = f_raw % m;
                g = g_raw % m;
            }
            let label = alphabet.label(c).expect("encoded above").to_owned();
            if emptiness_check(f, g, m) {
                (f, g) = saved;
                undo = true;
                moves.push(Move::Log(label));
            } else {
                moves.push(Move::Sync(label));
            }
        }
        if undo {
            match t.exchange(Message::Undo)? {
                Message::UndoAck => {}
                Message::Abort(reason) => return Err(ProtocolError::Aborted(reason)),
                other => {
                    return Err(ProtocolError::Unexpected {
                        expected: "UNDO_ACK",
                        got: other.kind(),
                    })
                }
            }
        }
        t.send(Message::Bye)?;
        moves.reverse();
        Ok(Alignment::from_moves(moves))
    }
}

fn expect_plf(reply: Message) -> Result<(Ciphertext, Ciphertext), ProtocolError> {
    match reply {
        Message::PlfResponse { f, g } => Ok((f, g)),
        Message::Abort(reason) => Err(ProtocolError::Aborted(reason)),
        other => Err(ProtocolError::Unexpected {
            expected: "PLF_RESP",
            got: other.kind(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{align_with_log_moves, Budget, Interval};
    use crate::protocol::{server_init, LocalTransport, RecordingTransport, ServerConfig, ServerSession};

    fn chars(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    fn running() -> (Alphabet, Arc<crate::protocol::ServerIndex>) {
        let a = Alphabet::from_labels(["a", "b", "c", "d"]).unwrap();
        let t = crate::model::RunsText::from_codes(a.encode_chars("abd;abcbd;$").unwrap(), &a).unwrap();
        let (shared, m) = server_init(&t, &a).unwrap();
        assert_eq!(m, 12);
        (a, shared)
    }

    fn session(
        shared: &Arc<crate::protocol::ServerIndex>,
        kind: BackendKind,
        budget: Budget,
        obfuscate: bool,
    ) -> (ClientSession, LocalTransport) {
        let cfg = ServerConfig {
            budget,
            seed: Some(11),
            obfuscate,
            ..ServerConfig::default()
        };
        let mut t = LocalTransport::new(ServerSession::new(shared.clone(), cfg));
        t.server.record_offsets();
        let mut c = ClientSession::new(kind, Some(5));
        c.handshake(&mut t).unwrap();
        (c, t)
    }

    #[test]
    fn init_sizes() {
        let (_, shared) = running();
        for r in 0..3 {
            assert_eq!(shared.ranks01(r).len(), 24);
        }
        let a = Alphabet::from_labels(["x"]).unwrap();
        let t = crate::model::RunsText::from_codes(vec![0], &a).unwrap();
        assert_eq!(server_init(&t, &a).unwrap().1, 2);
    }

    #[test]
    fn fitting_and_deviating_traces_match_plaintext() {
        let (_, shared) = running();
        for kind in [BackendKind::Mock, BackendKind::Group] {
            for trace in ["abd", "acbd", "abcbd", "", "dd", "ca"] {
                let (mut c, mut t) = session(&shared, kind, Budget::Unlimited, true);
                let got = c.check(&mut t, &chars(trace)).unwrap();
                let want = align_with_log_moves(shared.index(), &chars(trace), Budget::Unlimited).unwrap();
                assert_eq!(got, want, "{kind} {trace}");
            }
        }
    }

    #[test]
    fn b_over_everything_without_offsets() {
        let (a, shared) = running();
        let (mut c, mut t) = session(&shared, BackendKind::Group, Budget::Unlimited, false);
        // the query is "b;", so the first symbol is ;
        c.check(&mut t, &chars("b")).unwrap();
        let steps = c.steps();
        assert_eq!(steps.len(), 6);
        let sep = shared.index().lf_interval(a.separator(), Interval::new(0, 11));
        let b = shared.index().wavelet().lf_steps(2, sep);
        for (k, iv) in b.iter().enumerate() {
            assert_eq!((steps[3 + k].f_raw, steps[3 + k].g_raw), (iv.f as u64, iv.g as u64));
        }
    }

    #[test]
    fn b_from_full_interval_gives_3_6() {
        let (_, shared) = running();
        // one symbol from ⟦0,11⦆, driven by hand
        let mut server = ServerSession::new(
            shared.clone(),
            ServerConfig {
                obfuscate: false,
                ..ServerConfig::default()
            },
        );
        let mut client = ClientSession::new(BackendKind::Mock, Some(1));
        let hello = client.hello();
        client.accept(server.handle(hello).unwrap()).unwrap();
        let be = client.agreed.as_ref().unwrap().backend.clone();
        let (mut f, mut g) = (0u64, 11u64);
        let mut seen = Vec::new();
        for row in 0..3u8 {
            let bit = (2u32 >> row) & 1;
            let vf = pack(&*be, &client.keys.public, f, bit, 12, &mut client.rng).unwrap();
            let vg = pack(&*be, &client.keys.public, g, bit, 12, &mut client.rng).unwrap();
            let (cf, cg) = expect_plf(
                server
                    .handle(Message::PlfRequest { row, undo: false, vf, vg })
                    .unwrap(),
            )
            .unwrap();
            f = be.decrypt_small(&client.keys.secret, &cf).unwrap();
            g = be.decrypt_small(&client.keys.secret, &cg).unwrap();
            seen.push((f, g));
        }
        assert_eq!(seen, vec![(0, 6), (7, 10), (3, 6)]);
    }

    #[test]
    fn transcript_carries_only_rows_flags_and_ciphertexts() {
        let (_, shared) = running();
        let (mut c, t) = session(&shared, BackendKind::Group, Budget::Unlimited, true);
        let mut rec = RecordingTransport::new(t);
        c.check(&mut rec, &chars("acbd")).unwrap();
        for msg in &rec.sent {
            match msg {
                Message::PlfRequest { row, vf, vg, .. } => {
                    assert!(*row < 3);
                    assert!(vf.iter().chain(vg).all(|ct| ct.0.len() == 64));
                }
                Message::Undo | Message::Bye => {}
                other => panic!("unexpected {}", other.kind()),
            }
        }
        // 15 rows, the trailing undo for a, BYE
        assert_eq!(rec.sent.len(), 5 * 3 + 2);
        assert!(matches!(rec.sent[15], Message::Undo));
    }

    #[test]
    fn one_trace_per_session() {
        let (_, shared) = running();
        let (mut c, mut t) = session(&shared, BackendKind::Mock, Budget::Unlimited, true);
        c.check(&mut t, &chars("abd")).unwrap();
        assert!(matches!(c.check(&mut t, &chars("abd")), Err(ProtocolError::SessionUsed)));
    }

    #[test]
    fn unknown_label_is_rejected_before_sending() {
        let (_, shared) = running();
        let (mut c, mut t) = session(&shared, BackendKind::Mock, Budget::Unlimited, true);
        assert!(matches!(
            c.check(&mut t, &chars("az")),
            Err(ProtocolError::UnknownLabel(l)) if l == "z"
        ));
    }

    #[test]
    fn unknown_backend_is_refused() {
        let (_, shared) = running();
        let mut server = ServerSession::new(shared, ServerConfig::default());
        let reply = server.handle(Message::Hello {
            version: PROTOCOL_VERSION,
            backend: "paillier".into(),
            public_key: crate::crypto::PublicKey(vec![0; 8]),
        });
        assert!(matches!(reply, Some(Message::Abort(r)) if r.contains("paillier")));
        let mut server2 = ServerSession::new(running().1, ServerConfig::default());
        let reply = server2.handle(Message::Hello {
            version: 9,
            backend: "mock".into(),
            public_key: crate::crypto::PublicKey(vec![0; 8]),
        });
        assert!(matches!(reply, Some(Message::Abort(_))));
    }

    #[test]
    fn rows_out_of_order_abort() {
        let (_, shared) = running();
        let mut server = ServerSession::new(shared, ServerConfig::default());
        let client = ClientSession::new(BackendKind::Mock, Some(2));
        assert!(matches!(server.handle(client.hello()), Some(Message::InitAck(_))));
        let v = vec![Ciphertext(vec![0; 24]); 24];
        let reply = server.handle(Message::PlfRequest {
            row: 1,
            undo: false,
            vf: v.clone(),
            vg: v,
        });
        assert!(matches!(reply, Some(Message::Abort(r)) if r.contains("out of order")));
        assert!(server.is_closed());
    }

    #[test]
    fn budget_aborts_on_the_next_undo() {
        let (_, shared) = running();
        for b in [0usize, 1, 3] {
            // every d after the first is a log move: dd...d; gives n-1 undos
            let trace = chars(&"d".repeat(b + 2));
            let (mut c, mut t) = session(&shared, BackendKind::Mock, Budget::Limited(b), true);
            let err = c.check(&mut t, &trace).unwrap_err();
            assert!(matches!(err, ProtocolError::Aborted(ref r) if r.contains("budget")), "{err}");
            assert_eq!(t.server.undos(), b + 1);

            let trace = chars(&"d".repeat(b + 1));
            let (mut c, mut t) = session(&shared, BackendKind::Mock, Budget::Limited(b), true);
            assert_eq!(c.check(&mut t, &trace).unwrap().cost, b);
        }
    }
}
