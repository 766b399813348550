//! Client for generators hosted outside the process.
//!
//! Requests and responses are newline-delimited JSON over a child process's
//! stdin/stdout or a TCP connection. Every request carries an `id`; responses
//! may come back in any order and are routed by that id, so one client can
//! serve many concurrent decode sessions.
//!
//! ```text
//! step request   {"id": "r1", "input": "...", "prefix": ["[S]"], "allowed": ["a", "[S]", ...]}
//! step response  {"id": "r1", "scores": {"a": 0.1, "[S]": 2.5, ...}}
//! free request   {"id": "r2", "input": "..."}
//! free response  {"id": "r2", "output": "[S] a [O] b ..."}
//! ```

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{AllowedSet, DecodeError, DecodeMode, FreeGenerator, Generator, Scores};

pub type GenerationMode = DecodeMode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `tcp://host:port`
    Tcp(String),
    /// A command line; the child speaks the protocol on stdin/stdout.
    Process(Vec<String>),
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(addr) = s.strip_prefix("tcp://") {
            return Ok(Endpoint::Tcp(addr.to_string()));
        }
        let cmd = s.strip_prefix("exec:").unwrap_or(s);
        let argv: Vec<String> = cmd.split_whitespace().map(String::from).collect();
        if argv.is_empty() {
            return Err("empty endpoint".into());
        }
        Ok(Endpoint::Process(argv))
    }
}

type Reply = Result<Value, DecodeError>;

struct Inner {
    writer: Mutex<Box<dyn Write + Send>>,
    pending: Mutex<HashMap<String, Sender<Reply>>>,
    closed: Mutex<Option<String>>,
    next_id: AtomicU64,
    timeout: Duration,
    child: Mutex<Option<Child>>,
    socket: Option<TcpStream>,
}

impl Drop for Inner {
    fn drop(&mut self) {
        if let Some(s) = &self.socket {
            let _ = s.shutdown(Shutdown::Both);
        }
        if let Ok(mut guard) = self.child.lock() {
            if let Some(mut c) = guard.take() {
                let _ = c.kill();
                let _ = c.wait();
            }
        }
    }
}

/// Shared connection to an external generator. Cheap to clone.
#[derive(Clone)]
pub struct ExternalClient {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for ExternalClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalClient")
            .field("timeout", &self.inner.timeout)
            .finish_non_exhaustive()
    }
}

impl ExternalClient {
    /// Connects, retrying a TCP endpoint until `timeout` elapses.
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, DecodeError> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let deadline = Instant::now() + timeout;
                let stream = loop {
                    let attempt = addr
                        .to_socket_addrs()
                        .map_err(|e| e.to_string())
                        .and_then(|mut it| it.next().ok_or_else(|| "no address".to_string()))
                        .and_then(|sa| {
                            let left = deadline.saturating_duration_since(Instant::now());
                            TcpStream::connect_timeout(&sa, left.max(Duration::from_millis(1)))
                                .map_err(|e| e.to_string())
                        });
                    match attempt {
                        Ok(s) => break s,
                        Err(_) if Instant::now() < deadline => {
                            thread::sleep(Duration::from_millis(25))
                        }
                        Err(_) => {
                            return Err(DecodeError::Timeout {
                                request_id: format!("connect {addr}"),
                                timeout,
                            })
                        }
                    }
                };
                let _ = stream.set_nodelay(true);
                let reader = stream
                    .try_clone()
                    .map_err(|e| DecodeError::Transport(e.to_string()))?;
                let writer = stream
                    .try_clone()
                    .map_err(|e| DecodeError::Transport(e.to_string()))?;
                Ok(Self::start(
                    Box::new(writer),
                    reader,
                    None,
                    Some(stream),
                    timeout,
                ))
            }
            Endpoint::Process(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| DecodeError::Transport(format!("spawn {:?}: {e}", argv[0])))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Self::start(
                    Box::new(stdin),
                    stdout,
                    Some(child),
                    None,
                    timeout,
                ))
            }
        }
    }

    fn start<R: Read + Send + 'static>(
        writer: Box<dyn Write + Send>,
        reader: R,
        child: Option<Child>,
        socket: Option<TcpStream>,
        timeout: Duration,
    ) -> Self {
        let inner = Arc::new(Inner {
            writer: Mutex::new(writer),
            pending: Mutex::new(HashMap::new()),
            closed: Mutex::new(None),
            next_id: AtomicU64::new(1),
            timeout,
            child: Mutex::new(child),
            socket,
        });
        let weak = Arc::downgrade(&inner);
        thread::spawn(move || {
            let reader = BufReader::new(reader);
            for line in reader.lines() {
                let Some(inner) = weak.upgrade() else { return };
                let line = match line {
                    Ok(l) => l,
                    Err(e) => {
                        fail_all(&inner, &format!("read failed: {e}"));
                        return;
                    }
                };
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Result<Value, _> = serde_json::from_str(&line);
                let id = parsed
                    .as_ref()
                    .ok()
                    .and_then(|v| v.get("id"))
                    .and_then(Value::as_str)
                    .map(String::from);
                match (parsed, id) {
                    (Ok(v), Some(id)) => {
                        let tx = inner.pending.lock().expect("pending lock").remove(&id);
                        if let Some(tx) = tx {
                            let _ = tx.send(Ok(v));
                        }
                    }
                    _ => {
                        let pending: Vec<(String, Sender<Reply>)> = inner
                            .pending
                            .lock()
                            .expect("pending lock")
                            .drain()
                            .collect();
                        for (id, tx) in pending {
                            let _ = tx.send(Err(DecodeError::Malformed {
                                request_id: id,
                                detail: format!("unroutable response line {line:?}"),
                            }));
                        }
                    }
                }
            }
            if let Some(inner) = weak.upgrade() {
                fail_all(&inner, "generator closed the connection");
            }
        });
        Self { inner }
    }

    pub fn timeout(&self) -> Duration {
        self.inner.timeout
    }

    fn next_id(&self) -> String {
        format!("r{}", self.inner.next_id.fetch_add(1, Ordering::Relaxed))
    }

    /// Sends one request (the `id` field is filled in) and waits for its reply.
    pub fn request(&self, mut body: Value) -> Result<(String, Value), DecodeError> {
        let id = self.next_id();
        body["id"] = Value::String(id.clone());
        let (tx, rx) = mpsc::channel();
        {
            if let Some(reason) = self.inner.closed.lock().expect("closed lock").clone() {
                return Err(DecodeError::Transport(reason));
            }
            self.inner
                .pending
                .lock()
                .expect("pending lock")
                .insert(id.clone(), tx);
        }
        let line = format!("{body}\n");
        let written = {
            let mut w = self.inner.writer.lock().expect("writer lock");
            w.write_all(line.as_bytes()).and_then(|_| w.flush())
        };
        if let Err(e) = written {
            self.inner.pending.lock().expect("pending lock").remove(&id);
            return Err(DecodeError::Transport(format!("write failed: {e}")));
        }
        match rx.recv_timeout(self.inner.timeout) {
            Ok(reply) => reply.map(|v| (id, v)),
            Err(RecvTimeoutError::Timeout) => {
                self.inner.pending.lock().expect("pending lock").remove(&id);
                Err(DecodeError::Timeout {
                    request_id: id,
                    timeout: self.inner.timeout,
                })
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(DecodeError::Transport("response channel closed".into()))
            }
        }
    }
}

fn fail_all(inner: &Inner, reason: &str) {
    *inner.closed.lock().expect("closed lock") = Some(reason.to_string());
    let pending: Vec<(String, Sender<Reply>)> = inner
        .pending
        .lock()
        .expect("pending lock")
        .drain()
        .collect();
    for (_, tx) in pending {
        let _ = tx.send(Err(DecodeError::Transport(reason.to_string())));
    }
}

/// A decode session backed by an [`ExternalClient`].
#[derive(Debug, Clone)]
pub struct ExternalGenerator {
    client: ExternalClient,
    pub mode: GenerationMode,
}

impl ExternalGenerator {
    pub fn new(client: ExternalClient, mode: GenerationMode) -> Self {
        Self { client, mode }
    }
}

impl Generator for ExternalGenerator {
    fn step(
        &mut self,
        input: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        let step = prefix.len();
        let (id, reply) = self.client.request(json!({
            "input": input,
            "prefix": prefix,
            "allowed": allowed.tokens(),
        }))?;
        let violation = |detail: String| DecodeError::ProtocolViolation {
            step,
            request_id: Some(id.clone()),
            detail,
        };
        let Some(obj) = reply.get("scores").and_then(Value::as_object) else {
            return Err(DecodeError::Malformed {
                request_id: id.clone(),
                detail: "missing \"scores\" object".into(),
            });
        };
        let mut scores = Scores::with_capacity(obj.len());
        for (tok, v) in obj {
            let s = v
                .as_f64()
                .ok_or_else(|| violation(format!("score for {tok:?} is not a number")))?;
            if !allowed.contains(tok) {
                return Err(violation(format!("score for disallowed token {tok:?}")));
            }
            scores.insert(tok.clone(), s);
        }
        if let Some(missing) = allowed.tokens().iter().find(|t| !scores.contains_key(*t)) {
            return Err(violation(format!("no score for allowed token {missing:?}")));
        }
        Ok(scores)
    }
}

impl FreeGenerator for ExternalGenerator {
    fn generate(&mut self, input: &str) -> Result<String, DecodeError> {
        let (id, reply) = self.client.request(json!({ "input": input }))?;
        reply
            .get("output")
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or(DecodeError::Malformed {
                request_id: id,
                detail: "missing \"output\" string".into(),
            })
    }
}
