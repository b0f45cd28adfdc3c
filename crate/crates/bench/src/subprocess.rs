//! Provider that talks to external processes over the line-delimited JSON
//! protocol in [`crate::protocol`].
//!
//! A fixed number of child processes is kept alive; each request checks one
//! out, so at most `instances` requests are in flight. A reply that does not
//! arrive within the request timeout yields a timeout record and the child is
//! reused (late replies are recognised by id and discarded). A child that
//! exits is restarted, up to `max_restarts` times over the provider's life.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use tartarus_core::objectives::{PropertyMap, Quantity};

use crate::protocol::{to_line, Handshake, Request, Response, ResponseStatus, PROTOCOL_VERSION};
use crate::provider::{check_units, Provider, ProviderFailure, ProviderOutput};

pub const PROVIDER_CMD_ENV: &str = "TARTARUS_PROVIDER_CMD";

#[derive(Debug, Clone, PartialEq)]
pub struct SubprocessConfig {
    /// Shell command line, run through `sh -c`.
    pub command: String,
    pub instances: usize,
    pub request_timeout: Duration,
    pub handshake_timeout: Duration,
    pub max_restarts: usize,
}

impl SubprocessConfig {
    pub fn new(command: impl Into<String>) -> SubprocessConfig {
        SubprocessConfig {
            command: command.into(),
            instances: 1,
            request_timeout: Duration::from_secs(600),
            handshake_timeout: Duration::from_secs(30),
            max_restarts: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SubprocessError {
    #[error("failed to start provider: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("provider handshake failed: {0}")]
    Handshake(String),
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Worker {
    fn spawn(cfg: &SubprocessConfig) -> Result<(Worker, Handshake), SubprocessError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&cfg.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut worker = Worker {
            child,
            stdin,
            lines: rx,
        };
        let line = match worker.lines.recv_timeout(cfg.handshake_timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => {
                worker.kill();
                return Err(SubprocessError::Handshake("no handshake before timeout".into()));
            }
            Err(RecvTimeoutError::Disconnected) => {
                worker.kill();
                return Err(SubprocessError::Handshake("provider exited before handshake".into()));
            }
        };
        let hs: Handshake = match serde_json::from_str(&line) {
            Ok(hs) => hs,
            Err(e) => {
                worker.kill();
                return Err(SubprocessError::Handshake(format!("malformed handshake: {e}")));
            }
        };
        if hs.protocol != PROTOCOL_VERSION {
            worker.kill();
            return Err(SubprocessError::Handshake(format!(
                "protocol {} not supported (expected {PROTOCOL_VERSION})",
                hs.protocol
            )));
        }
        Ok((worker, hs))
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum Exchange {
    Reply(Response),
    TimedOut,
    Died,
}

pub struct SubprocessProvider {
    cfg: SubprocessConfig,
    supported: Vec<String>,
    idle: Mutex<Vec<Option<Worker>>>,
    available: Condvar,
    next_id: AtomicU64,
    restarts: AtomicUsize,
}

impl SubprocessProvider {
    pub fn spawn(cfg: SubprocessConfig) -> Result<SubprocessProvider, SubprocessError> {
        let mut workers = Vec::new();
        let mut supported = Vec::new();
        for _ in 0..cfg.instances.max(1) {
            let (w, hs) = Worker::spawn(&cfg)?;
            supported = hs.props;
            workers.push(Some(w));
        }
        Ok(SubprocessProvider {
            cfg,
            supported,
            idle: Mutex::new(workers),
            available: Condvar::new(),
            next_id: AtomicU64::new(0),
            restarts: AtomicUsize::new(0),
        })
    }

    /// Properties announced in the handshake.
    pub fn supported(&self) -> &[String] {
        &self.supported
    }

    pub fn restarts(&self) -> usize {
        self.restarts.load(Ordering::SeqCst)
    }

    fn checkout(&self) -> Option<Worker> {
        let mut idle = self.idle.lock().expect("worker pool poisoned");
        loop {
            if let Some(w) = idle.pop() {
                return w;
            }
            idle = self.available.wait(idle).expect("worker pool poisoned");
        }
    }

    fn checkin(&self, w: Option<Worker>) {
        self.idle.lock().expect("worker pool poisoned").push(w);
        self.available.notify_one();
    }

    fn restart(&self, mut dead: Worker) -> Option<Worker> {
        dead.kill();
        let max = self.cfg.max_restarts;
        let Ok(used) = self
            .restarts
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| (n < max).then_some(n + 1))
        else {
            log::error!("provider restart limit ({max}) reached");
            return None;
        };
        match Worker::spawn(&self.cfg) {
            Ok((w, _)) => {
                log::warn!("provider process restarted ({} of {})", used + 1, self.cfg.max_restarts);
                Some(w)
            }
            Err(e) => {
                log::error!("provider restart failed: {e}");
                None
            }
        }
    }

    fn exchange(&self, w: &mut Worker, req: &Request) -> Exchange {
        let line = to_line(req);
        if writeln!(w.stdin, "{line}").and_then(|_| w.stdin.flush()).is_err() {
            return Exchange::Died;
        }
        let deadline = Instant::now() + self.cfg.request_timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match w.lines.recv_timeout(left) {
                Ok(line) => match serde_json::from_str::<Response>(&line) {
                    Ok(resp) if resp.id == req.id => return Exchange::Reply(resp),
                    Ok(resp) => log::debug!("discarding stale reply {}", resp.id),
                    Err(e) => log::warn!("unparseable provider line ({e}): {line}"),
                },
                Err(RecvTimeoutError::Timeout) => return Exchange::TimedOut,
                Err(RecvTimeoutError::Disconnected) => return Exchange::Died,
            }
        }
    }
}

fn convert(resp: Response, props: &[String]) -> Result<PropertyMap, ProviderFailure> {
    if resp.status == ResponseStatus::Error {
        return Err(ProviderFailure::Error(
            resp.error.unwrap_or_else(|| "unspecified provider error".into()),
        ));
    }
    let mut out = PropertyMap::new();
    for p in props {
        let v = resp
            .values
            .get(p)
            .ok_or_else(|| ProviderFailure::Error(format!("reply lacks '{p}'")))?;
        out.insert(p.clone(), Quantity::new(v.v, &v.u));
    }
    check_units(&out)?;
    Ok(out)
}

impl Provider for SubprocessProvider {
    fn name(&self) -> &str {
        "subprocess"
    }

    fn compute(&self, smiles: &str, props: &[String]) -> ProviderOutput {
        let start = Instant::now();
        let finish = |result| ProviderOutput {
            result,
            wall_seconds: start.elapsed().as_secs_f64().max(1e-9),
        };
        if let Some(p) = props.iter().find(|p| !self.supported.contains(p)) {
            return finish(Err(ProviderFailure::Error(format!("provider does not offer '{p}'"))));
        }
        let Some(mut worker) = self.checkout() else {
            self.checkin(None);
            return finish(Err(ProviderFailure::Error("provider unavailable".into())));
        };
        let req = Request {
            id: format!("r{}", self.next_id.fetch_add(1, Ordering::SeqCst)),
            smiles: smiles.to_string(),
            props: props.to_vec(),
        };
        let (result, back) = match self.exchange(&mut worker, &req) {
            Exchange::Reply(resp) => (convert(resp, props), Some(worker)),
            Exchange::TimedOut => (
                Err(ProviderFailure::Timeout(self.cfg.request_timeout.as_secs_f64())),
                Some(worker),
            ),
            Exchange::Died => (
                Err(ProviderFailure::Error("provider process exited".into())),
                self.restart(worker),
            ),
        };
        self.checkin(back);
        finish(result)
    }
}

impl Drop for SubprocessProvider {
    fn drop(&mut self) {
        if let Ok(idle) = self.idle.get_mut() {
            for w in idle.iter_mut().flatten() {
                w.kill();
            }
        }
    }
}
