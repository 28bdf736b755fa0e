use std::io;

use super::{Message, ServerSession};

/// Request/response channel from the client to one server session.
pub trait Transport {
    fn exchange(&mut self, msg: Message) -> io::Result<Message>;

    /// Send a message that gets no reply.
    fn send(&mut self, msg: Message) -> io::Result<()>;
}

/// Calls a server session directly, in process.
pub struct LocalTransport {
    pub server: ServerSession,
}

impl LocalTransport {
    pub fn new(server: ServerSession) -> Self {
        LocalTransport { server }
    }
}

impl Transport for LocalTransport {
    fn exchange(&mut self, msg: Message) -> io::Result<Message> {
        self.server
            .handle(msg)
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "no reply"))
    }

    fn send(&mut self, msg: Message) -> io::Result<()> {
        self.server.handle(msg);
        Ok(())
    }
}

/// Keeps a copy of everything that passes through `inner`.
pub struct RecordingTransport<T> {
    pub inner: T,
    pub sent: Vec<Message>,
    pub received: Vec<Message>,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport {
            inner,
            sent: Vec::new(),
            received: Vec::new(),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn exchange(&mut self, msg: Message) -> io::Result<Message> {
        self.sent.push(msg.clone());
        let reply = self.inner.exchange(msg)?;
        self.received.push(reply.clone());
        Ok(reply)
    }

    fn send(&mut self, msg: Message) -> io::Result<()> {
        self.sent.push(msg.clone());
        self.inner.send(msg)
    }
}
