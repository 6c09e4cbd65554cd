use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use tungstenite::{Message, WebSocket};

use super::session::SessionManager;
use super::wire::{read_frame, write_frame};

/// One message-oriented connection.
pub trait Channel: Send {
    /// Next message, or `None` once the peer has gone.
    fn recv(&mut self) -> io::Result<Option<String>>;
    fn send(&mut self, text: &str) -> io::Result<()>;
}

/// Length-prefixed frames over a raw socket.
pub struct FramedTcp {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl FramedTcp {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Self::new(TcpStream::connect(addr)?)
    }
}

impl Channel for FramedTcp {
    fn recv(&mut self) -> io::Result<Option<String>> {
        read_frame(&mut self.reader)
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        write_frame(&mut self.writer, text)
    }
}

/// One JSON message per WebSocket text frame.
pub struct WsChannel(pub WebSocket<TcpStream>);

fn ws_err(e: tungstenite::Error) -> io::Error {
    match e {
        tungstenite::Error::Io(e) => e,
        e => io::Error::other(e),
    }
}

impl Channel for WsChannel {
    fn recv(&mut self) -> io::Result<Option<String>> {
        loop {
            match self.0.read() {
                Ok(Message::Text(t)) => return Ok(Some(t.to_string())),
                Ok(Message::Binary(b)) => {
                    return String::from_utf8(b.to_vec())
                        .map(Some)
                        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
                }
                Ok(Message::Close(_)) => return Ok(None),
                Ok(_) => continue,
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(None),
                Err(e) => return Err(ws_err(e)),
            }
        }
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        self.0.send(Message::Text(text.into())).map_err(ws_err)
    }
}

/// Wraps an accepted socket, choosing WebSocket when the peer opens with an
/// HTTP `GET` and raw frames otherwise. A raw frame cannot start with
/// `GET ` since that length exceeds the frame limit.
pub fn accept_channel(stream: TcpStream) -> io::Result<Box<dyn Channel>> {
    let mut head = [0u8; 4];
    let n = loop {
        let n = stream.peek(&mut head)?;
        if n == 0 || n == head.len() {
            break n;
        }
        thread::yield_now();
    };
    if n == 4 && &head == b"GET " {
        stream.set_nodelay(true)?;
        let ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
        Ok(Box::new(WsChannel(ws)))
    } else {
        Ok(Box::new(FramedTcp::new(stream)?))
    }
}

/// Answers every message on `channel` with `handler` until the peer leaves.
pub fn serve_channel(channel: &mut dyn Channel, mut handler: impl FnMut(&str) -> String) -> io::Result<()> {
    while let Some(msg) = channel.recv()? {
        channel.send(&handler(&msg))?;
    }
    Ok(())
}

/// Accept loop that hands each connection to its own thread.
pub struct Listener {
    listener: TcpListener,
    stop: Arc<AtomicBool>,
}

impl Listener {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until stopped. `make` builds the handler for one connection.
    pub fn run<H>(self, make: impl Fn() -> H + Send + Sync + 'static) -> io::Result<()>
    where
        H: FnMut(&str) -> String + Send + 'static,
    {
        let make = Arc::new(make);
        for stream in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let make = make.clone();
            thread::spawn(move || {
                if let Ok(mut ch) = accept_channel(stream) {
                    let _ = serve_channel(ch.as_mut(), make());
                }
            });
        }
        Ok(())
    }

    /// Runs in a background thread.
    pub fn spawn<H>(self, make: impl Fn() -> H + Send + Sync + 'static) -> io::Result<ServerHandle>
    where
        H: FnMut(&str) -> String + Send + 'static,
    {
        let addr = self.local_addr()?;
        let stop = self.stop.clone();
        let join = thread::spawn(move || self.run(make));
        Ok(ServerHandle {
            addr,
            stop,
            join: Some(join),
        })
    }
}

/// Environment server over a shared [`SessionManager`].
pub struct Server {
    listener: Listener,
    manager: Arc<SessionManager>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, capacity: usize) -> io::Result<Self> {
        Ok(Self {
            listener: Listener::bind(addr)?,
            manager: Arc::new(SessionManager::new(capacity)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn manager(&self) -> Arc<SessionManager> {
        self.manager.clone()
    }

    pub fn run(self) -> io::Result<()> {
        let m = self.manager;
        self.listener.run(move || {
            let m = m.clone();
            move |text: &str| m.handle_text(text)
        })
    }

    pub fn spawn(self) -> io::Result<ServerHandle> {
        let m = self.manager;
        self.listener.spawn(move || {
            let m = m.clone();
            move |text: &str| m.handle_text(text)
        })
    }
}

/// A server running in the background. Dropping it stops the accept loop;
/// open connections finish on their own.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop_now()
    }

    fn stop_now(&mut self) -> io::Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        match self.join.take() {
            Some(j) => j.join().unwrap_or_else(|_| Err(io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_now();
    }
}
