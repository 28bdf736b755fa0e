//! Length-prefixed framing and TCP sessions.
//!
//! A frame is a 4-byte big-endian length counting the type byte and the
//! payload, then the type byte, then the payload. Integers inside payloads
//! are big-endian too.
//!
//! | type | message  | payload |
//! |------|----------|---------|
//! | 0x01 | HELLO    | version u8, backend (u16 len + UTF-8), public key (u32 len + bytes) |
//! | 0x02 | INIT_ACK | M u64, width u8, label count u32, labels (u32 len + UTF-8), ciphertext_len u32, budget flag u8 (0 limited, 1 unlimited), budget u64 |
//! | 0x03 | PLF_REQ  | row u8, undo u8, vf then vg, 2M ciphertexts each |
//! | 0x04 | PLF_RESP | f ciphertext, g ciphertext |
//! | 0x05 | ABORT    | reason, UTF-8 |
//! | 0x06 | BYE      | empty |
//! | 0x07 | UNDO     | empty |
//! | 0x08 | UNDO_ACK | empty |

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;

use thiserror::Error;

use crate::crypto::{BackendKind, Ciphertext, PublicKey};
use crate::index::Budget;
use crate::protocol::{
    ClientSession, Message, ProtocolError, ServerConfig, ServerIndex, ServerSession,
    SessionConfig, Transport,
};

pub const DEFAULT_MAX_FRAME: usize = 64 << 20;
/// Overrides the listen address given to [`listen_addr`].
pub const LISTEN_ADDR_ENV: &str = "FMCC_LISTEN_ADDR";

pub const T_HELLO: u8 = 0x01;
pub const T_INIT_ACK: u8 = 0x02;
pub const T_PLF_REQ: u8 = 0x03;
pub const T_PLF_RESP: u8 = 0x04;
pub const T_ABORT: u8 = 0x05;
pub const T_BYE: u8 = 0x06;
pub const T_UNDO: u8 = 0x07;
pub const T_UNDO_ACK: u8 = 0x08;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("truncated frame")]
    Truncated,
    #[error("frame of {0} bytes exceeds the limit of {1}")]
    Oversize(usize, usize),
    #[error("unknown message type 0x{0:02x}")]
    BadType(u8),
    #[error("malformed {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<NetError> for io::Error {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Io(e) => e,
            other => io::Error::new(io::ErrorKind::InvalidData, other),
        }
    }
}

pub fn encode_frame(msg: &Message) -> Vec<u8> {
    let mut p = Vec::new();
    let ty = match msg {
        Message::Hello {
            version,
            backend,
            public_key,
        } => {
            p.push(*version);
            p.extend_from_slice(&(backend.len() as u16).to_be_bytes());
            p.extend_from_slice(backend.as_bytes());
            p.extend_from_slice(&(public_key.0.len() as u32).to_be_bytes());
            p.extend_from_slice(&public_key.0);
            T_HELLO
        }
        Message::InitAck(c) => {
            p.extend_from_slice(&c.m.to_be_bytes());
            p.push(c.width);
            p.extend_from_slice(&(c.alphabet.len() as u32).to_be_bytes());
            for l in &c.alphabet {
                p.extend_from_slice(&(l.len() as u32).to_be_bytes());
                p.extend_from_slice(l.as_bytes());
            }
            p.extend_from_slice(&c.ciphertext_len.to_be_bytes());
            let (flag, b) = match c.budget {
                Budget::Limited(b) => (0u8, b as u64),
                Budget::Unlimited => (1, 0),
            };
            p.push(flag);
            p.extend_from_slice(&b.to_be_bytes());
            T_INIT_ACK
        }
        Message::PlfRequest { row, undo, vf, vg } => {
            p.push(*row);
            p.push(u8::from(*undo));
            for ct in vf.iter().chain(vg) {
                p.extend_from_slice(&ct.0);
            }
            T_PLF_REQ
        }
        Message::PlfResponse { f, g } => {
            p.extend_from_slice(&f.0);
            p.extend_from_slice(&g.0);
            T_PLF_RESP
        }
        Message::Abort(reason) => {
            p.extend_from_slice(reason.as_bytes());
            T_ABORT
        }
        Message::Bye => T_BYE,
        Message::Undo => T_UNDO,
        Message::UndoAck => T_UNDO_ACK,
    };
    let mut out = Vec::with_capacity(5 + p.len());
    out.extend_from_slice(&(p.len() as u32 + 1).to_be_bytes());
    out.push(ty);
    out.extend_from_slice(&p);
    out
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        if self.0.len() < n {
            return Err(NetError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, NetError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, NetError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NetError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self, n: usize) -> Result<String, NetError> {
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| NetError::Malformed("UTF-8 string"))
    }

    fn done(&self) -> Result<(), NetError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(NetError::Malformed("trailing bytes"))
        }
    }
}

/// Decode the type byte and payload of one frame. Ciphertext-carrying
/// messages need `ciphertext_len`.
pub fn decode_body(ty: u8, payload: &[u8], ciphertext_len: Option<usize>) -> Result<Message, NetError> {
    let mut c = Cursor(payload);
    let ct_len = || ciphertext_len.filter(|&n| n > 0).ok_or(NetError::Malformed("ciphertext before handshake"));
    let msg = match ty {
        T_HELLO => {
            let version = c.u8()?;
            let n = c.u16()? as usize;
            let backend = c.string(n)?;
            let n = c.u32()? as usize;
            let public_key = PublicKey(c.take(n)?.to_vec());
            Message::Hello {
                version,
                backend,
                public_key,
            }
        }
        T_INIT_ACK => {
            let m = c.u64()?;
            let width = c.u8()?;
            let count = c.u32()? as usize;
            if count > payload.len() {
                return Err(NetError::Malformed("label count"));
            }
            let mut alphabet = Vec::with_capacity(count);
            for _ in 0..count {
                let n = c.u32()? as usize;
                alphabet.push(c.string(n)?);
            }
            let ciphertext_len = c.u32()?;
            let budget = match (c.u8()?, c.u64()?) {
                (0, b) => Budget::Limited(usize::try_from(b).map_err(|_| NetError::Malformed("budget"))?),
                (1, _) => Budget::Unlimited,
                _ => return Err(NetError::Malformed("budget flag")),
            };
            Message::InitAck(SessionConfig {
                m,
                width,
                alphabet,
                ciphertext_len,
                budget,
            })
        }
        T_PLF_REQ => {
            let n = ct_len()?;
            let row = c.u8()?;
            let undo = match c.u8()? {
                0 => false,
                1 => true,
                _ => return Err(NetError::Malformed("undo flag")),
            };
            let body = c.take(c.0.len())?;
            if body.len() % (2 * n) != 0 {
                return Err(NetError::Malformed("ciphertext vectors"));
            }
            let mut cts: Vec<Ciphertext> = body.chunks_exact(n).map(|b| Ciphertext(b.to_vec())).collect();
            let vg = cts.split_off(cts.len() / 2);
            Message::PlfRequest {
                row,
                undo,
                vf: cts,
                vg,
            }
        }
        T_PLF_RESP => {
            let n = ct_len()?;
            let f = Ciphertext(c.take(n)?.to_vec());
            let g = Ciphertext(c.take(n)?.to_vec());
            Message::PlfResponse { f, g }
        }
        T_ABORT => Message::Abort(c.string(payload.len())?),
        T_BYE => Message::Bye,
        T_UNDO => Message::Undo,
        T_UNDO_ACK => Message::UndoAck,
        other => return Err(NetError::BadType(other)),
    };
    c.done()?;
    Ok(msg)
}

/// Decode one complete frame from the front of `bytes`, returning the
/// message and the number of bytes used.
pub fn decode_frame(
    bytes: &[u8],
    ciphertext_len: Option<usize>,
    max_frame: usize,
) -> Result<(Message, usize), NetError> {
    if bytes.len() < 4 {
        return Err(NetError::Truncated);
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if len > max_frame {
        return Err(NetError::Oversize(len, max_frame));
    }
    if len == 0 {
        return Err(NetError::Malformed("empty frame"));
    }
    if bytes.len() < 4 + len {
        return Err(NetError::Truncated);
    }
    let msg = decode_body(bytes[4], &bytes[5..4 + len], ciphertext_len)?;
    Ok((msg, 4 + len))
}

/// Read one frame. The length is checked before the payload is allocated.
/// `Ok(None)` on a clean end of stream.
pub fn read_message<R: Read>(
    r: &mut R,
    ciphertext_len: Option<usize>,
    max_frame: usize,
) -> Result<Option<Message>, NetError> {
    let mut head = [0u8; 4];
    match r.read_exact(&mut head) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(head) as usize;
    if len > max_frame {
        return Err(NetError::Oversize(len, max_frame));
    }
    if len == 0 {
        return Err(NetError::Malformed("empty frame"));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => NetError::Truncated,
        _ => NetError::Io(e),
    })?;
    decode_body(body[0], &body[1..], ciphertext_len).map(Some)
}

pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> io::Result<()> {
    w.write_all(&encode_frame(msg))?;
    w.flush()
}

/// `default`, unless the environment variable [`LISTEN_ADDR_ENV`] is set.
pub fn listen_addr(default: &str) -> String {
    std::env::var(LISTEN_ADDR_ENV).unwrap_or_else(|_| default.to_owned())
}

/// Client end of a TCP session.
pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    ciphertext_len: Option<usize>,
    max_frame: usize,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        Ok(TcpTransport {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
            ciphertext_len: None,
            max_frame: DEFAULT_MAX_FRAME,
        })
    }
}

impl Transport for TcpTransport {
    fn exchange(&mut self, msg: Message) -> io::Result<Message> {
        write_message(&mut self.writer, &msg)?;
        let reply = read_message(&mut self.reader, self.ciphertext_len, self.max_frame)?
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"))?;
        if let Message::InitAck(c) = &reply {
            self.ciphertext_len = Some(c.ciphertext_len as usize);
        }
        Ok(reply)
    }

    fn send(&mut self, msg: Message) -> io::Result<()> {
        write_message(&mut self.writer, &msg)
    }
}

/// Connect and run the handshake.
pub fn connect<A: ToSocketAddrs>(
    addr: A,
    backend: BackendKind,
    seed: Option<u64>,
) -> Result<(ClientSession, TcpTransport), ProtocolError> {
    let mut t = TcpTransport::new(TcpStream::connect(addr)?)?;
    let mut client = ClientSession::new(backend, seed);
    client.handshake(&mut t)?;
    Ok((client, t))
}

/// Run one server session over `stream` until BYE, abort or disconnect.
pub fn serve_connection(stream: TcpStream, mut session: ServerSession) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut ct_len = None;
    loop {
        let msg = match read_message(&mut reader, ct_len, DEFAULT_MAX_FRAME) {
            Ok(Some(m)) => m,
            Ok(None) => return Ok(()),
            Err(NetError::Io(e)) => return Err(e),
            Err(e) => {
                write_message(&mut writer, &Message::Abort(e.to_string()))?;
                return Ok(());
            }
        };
        let Some(reply) = session.handle(msg) else {
            return Ok(());
        };
        if let Message::InitAck(c) = &reply {
            ct_len = Some(c.ciphertext_len as usize);
        }
        write_message(&mut writer, &reply)?;
        if session.is_closed() {
            return Ok(());
        }
    }
}

/// Accept connections forever, one thread and one session each. With a
/// configured seed, connection k uses seed + k.
pub fn serve(listener: TcpListener, shared: Arc<ServerIndex>, config: ServerConfig) -> io::Result<()> {
    let counter = AtomicU64::new(0);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) if e.kind() == io::ErrorKind::ConnectionAborted => continue,
            Err(e) => return Err(e),
        };
        let k = counter.fetch_add(1, Ordering::Relaxed);
        let mut cfg = config.clone();
        cfg.seed = cfg.seed.map(|s| s.wrapping_add(k));
        let session = ServerSession::new(shared.clone(), cfg);
        thread::spawn(move || {
            // a failing connection only ends its own session
            let _ = serve_connection(stream, session);
        });
    }
    Ok(())
}

/// Bind `addr` and serve from a background thread; returns the bound address.
pub fn spawn_server<A: ToSocketAddrs>(
    addr: A,
    shared: Arc<ServerIndex>,
    config: ServerConfig,
) -> io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    thread::spawn(move || serve(listener, shared, config));
    Ok(local)
}
