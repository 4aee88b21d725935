//! Broker-less TCP messaging: publish/subscribe and request/reply.
//!
//! A [`Publisher`] binds and fans every frame out to all connected
//! subscribers; a [`Subscriber`] connects, reconnects after failures and
//! queues incoming frames. [`Replier`] and [`Requester`] carry one request
//! and one reply at a time.

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::wire::{encode, read_frame, write_frame, FrameError, Message};

const POLL: Duration = Duration::from_millis(10);
const RECONNECT: Duration = Duration::from_millis(50);
const WRITE_TIMEOUT: Duration = Duration::from_secs(5);

fn resolve(addr: &str) -> io::Result<SocketAddr> {
    addr.to_socket_addrs()?
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("cannot resolve {addr}")))
}

pub struct Publisher {
    addr: SocketAddr,
    subscribers: Arc<Mutex<Vec<TcpStream>>>,
    shutdown: Arc<AtomicBool>,
}

impl Publisher {
    pub fn bind(addr: &str) -> io::Result<Self> {
        let listener = TcpListener::bind(resolve(addr)?)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let subscribers = Arc::new(Mutex::new(Vec::new()));
        let shutdown = Arc::new(AtomicBool::new(false));
        let (subs, stop) = (subscribers.clone(), shutdown.clone());
        thread::spawn(move || {
            while !stop.load(Ordering::Relaxed) {
                match listener.accept() {
                    Ok((s, _)) => {
                        let ok = s.set_nonblocking(false).is_ok()
                            && s.set_nodelay(true).is_ok()
                            && s.set_write_timeout(Some(WRITE_TIMEOUT)).is_ok();
                        if ok {
                            subs.lock().unwrap().push(s);
                        }
                    }
                    Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
                    Err(_) => thread::sleep(POLL),
                }
            }
        });
        Ok(Self {
            addr,
            subscribers,
            shutdown,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn subscriber_count(&self) -> usize {
        self.subscribers.lock().unwrap().len()
    }

    pub fn wait_for_subscribers(&self, n: usize, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        while self.subscriber_count() < n {
            if Instant::now() >= deadline {
                return false;
            }
            thread::sleep(POLL);
        }
        true
    }

    /// Send to every subscriber; subscribers whose connection fails are dropped.
    pub fn publish(&self, msg: &Message) {
        let bytes = encode(msg);
        let mut subs = self.subscribers.lock().unwrap();
        subs.retain_mut(|s| io::Write::write_all(s, &bytes).is_ok());
    }
}

impl Drop for Publisher {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::Relaxed);
        for s in self.subscribers.lock().unwrap().drain(..) {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
    }
}

/// Connecting end of a publish/subscribe link. Frames are queued in arrival
/// order; connection losses are retried until the subscriber is dropped.
pub struct Subscriber {
    rx: Receiver<Message>,
    connected: Arc<AtomicBool>,
    shutdown: Arc<AtomicBool>,
    stream: Arc<Mutex<Option<TcpStream>>>,
}

impl Subscriber {
    pub fn connect(addr: &str) -> Self {
        let (tx, rx) = mpsc::channel();
        let connected = Arc::new(AtomicBool::new(false));
        let shutdown = Arc::new(AtomicBool::new(false));
        let stream: Arc<Mutex<Option<TcpStream>>> = Arc::new(Mutex::new(None));
        let (addr, conn, stop, slot) = (addr.to_string(), connected.clone(), shutdown.clone(), stream.clone());
        thread::spawn(move || {
            while !stop.load(Ordering::Relaxed) {
                let Ok(mut s) = resolve(&addr).and_then(|a| TcpStream::connect_timeout(&a, Duration::from_secs(1))) else {
                    thread::sleep(RECONNECT);
                    continue;
                };
                let _ = s.set_nodelay(true);
                if let Ok(clone) = s.try_clone() {
                    *slot.lock().unwrap() = Some(clone);
                }
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                conn.store(true, Ordering::Relaxed);
                loop {
                    match read_frame(&mut s) {
                        Ok(m) => {
                            if tx.send(m).is_err() {
                                return;
                            }
                        }
                        Err(_) => break,
                    }
                }
                conn.store(false, Ordering::Relaxed);
                *slot.lock().unwrap() = None;
                thread::sleep(RECONNECT);
            }
        });
        Self {
            rx,
            connected,
            shutdown,
            stream,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.connected.load(Ordering::Relaxed)
    }

    pub fn wait_connected(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        while !self.is_connected() {
            if Instant::now() >= deadline {
                return false;
            }
            thread::sleep(POLL);
        }
        true
    }

    pub fn recv(&self) -> Option<Message> {
        self.rx.recv().ok()
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Result<Message, RecvTimeoutError> {
        self.rx.recv_timeout(timeout)
    }

    pub fn try_recv(&self) -> Result<Message, TryRecvError> {
        self.rx.try_recv()
    }
}

impl Drop for Subscriber {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::Relaxed);
        if let Some(s) = self.stream.lock().unwrap().take() {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
    }
}

/// Reply end of a request/reply link.
pub struct Replier {
    listener: TcpListener,
}

impl Replier {
    pub fn bind(addr: &str) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(resolve(addr)?)?,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn accept(&self) -> io::Result<Connection> {
        let (stream, _) = self.listener.accept()?;
        stream.set_nodelay(true)?;
        Ok(Connection { stream })
    }
}

pub struct Connection {
    stream: TcpStream,
}

impl Connection {
    pub fn recv(&mut self) -> Result<Message, FrameError> {
        read_frame(&mut self.stream)
    }

    pub fn send(&mut self, msg: &Message) -> io::Result<()> {
        write_frame(&mut self.stream, msg)
    }
}

/// Request end. The connection is opened lazily and discarded after any
/// transport error, so the next request reconnects.
pub struct Requester {
    addr: String,
    timeout: Duration,
    stream: Option<TcpStream>,
}

impl Requester {
    pub fn new(addr: &str, timeout: Duration) -> Self {
        Self {
            addr: addr.to_string(),
            timeout,
            stream: None,
        }
    }

    fn stream(&mut self) -> io::Result<&mut TcpStream> {
        if self.stream.is_none() {
            let s = TcpStream::connect_timeout(&resolve(&self.addr)?, self.timeout)?;
            s.set_nodelay(true)?;
            s.set_read_timeout(Some(self.timeout))?;
            s.set_write_timeout(Some(self.timeout))?;
            self.stream = Some(s);
        }
        Ok(self.stream.as_mut().unwrap())
    }

    pub fn request(&mut self, msg: &Message) -> Result<Message, FrameError> {
        let result = self.stream().map_err(FrameError::from).and_then(|s| {
            write_frame(s, msg)?;
            read_frame(s)
        });
        if result.is_err() {
            self.stream = None;
        }
        result
    }
}
