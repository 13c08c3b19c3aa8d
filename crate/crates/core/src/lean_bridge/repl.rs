//! Client for a persistent Lean REPL process.
//!
//! Each request is one JSON object `{"cmd": ..., "env": ...}` on a single
//! line followed by a blank line; the reply is a JSON object
//! `{"env": n, "messages": [{"severity", "pos", "endPos", "data"}]}` that
//! may span several lines and is terminated by a blank line. The preamble
//! (imports) is elaborated once and every check starts from that
//! environment, so no state leaks between theorems.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    interpret, BridgeError, CheckRequest, CheckResult, Checker, Diagnostic, Position, Severity,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplConfig {
    /// Root of the Lean project providing the Peano development.
    pub project_root: PathBuf,
    /// Program and arguments that start the REPL inside `project_root`.
    pub command: Vec<String>,
    /// Source elaborated once at startup, e.g. imports and `open` lines.
    pub preamble: String,
    pub startup_timeout_secs: u64,
    pub check_timeout_secs: u64,
}

impl Default for ReplConfig {
    fn default() -> Self {
        ReplConfig {
            project_root: PathBuf::from("."),
            command: vec!["lake".into(), "env".into(), "repl".into()],
            preamble: "import Game.Levels.Tutorial\nopen MyNat".into(),
            startup_timeout_secs: 120,
            check_timeout_secs: 30,
        }
    }
}

#[derive(Serialize)]
struct ReplRequest<'a> {
    cmd: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    env: Option<u64>,
}

#[derive(Deserialize)]
struct ReplResponse {
    #[serde(default)]
    env: Option<u64>,
    #[serde(default)]
    messages: Vec<ReplMessage>,
    /// Set when the REPL itself rejects the request.
    #[serde(default)]
    message: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReplMessage {
    severity: String,
    #[serde(default)]
    pos: Option<Position>,
    #[serde(default)]
    end_pos: Option<Position>,
    data: String,
}

impl From<ReplMessage> for Diagnostic {
    fn from(m: ReplMessage) -> Self {
        let severity = match m.severity.as_str() {
            "error" => Severity::Error,
            "warning" => Severity::Warning,
            _ => Severity::Information,
        };
        Diagnostic {
            severity,
            pos: m.pos,
            end_pos: m.end_pos,
            text: m.data,
        }
    }
}

pub struct LeanRepl {
    child: Option<Child>,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    base_env: Option<u64>,
    check_timeout: Duration,
}

impl LeanRepl {
    /// Starts the REPL and elaborates the preamble.
    pub fn start(config: &ReplConfig) -> Result<Self, BridgeError> {
        let (program, args) = config
            .command
            .split_first()
            .ok_or_else(|| BridgeError::InvalidRequest("empty REPL command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .current_dir(&config.project_root)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BridgeError::BackendUnavailable(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut repl = LeanRepl {
            child: Some(child),
            stdin,
            lines: rx,
            base_env: None,
            check_timeout: Duration::from_secs(config.check_timeout_secs),
        };
        if !config.preamble.trim().is_empty() {
            let resp = repl.round_trip(
                &config.preamble,
                None,
                Duration::from_secs(config.startup_timeout_secs),
            )?;
            let diags: Vec<Diagnostic> = resp.messages.into_iter().map(Into::into).collect();
            if let Some(err) = diags.iter().find(|d| d.severity == Severity::Error) {
                repl.shutdown();
                return Err(BridgeError::BackendUnavailable(format!(
                    "preamble failed: {}",
                    err.text
                )));
            }
            repl.base_env = resp.env;
        }
        Ok(repl)
    }

    fn round_trip(
        &mut self,
        cmd: &str,
        env: Option<u64>,
        timeout: Duration,
    ) -> Result<ReplResponse, BridgeError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| BridgeError::BackendUnavailable("REPL process has exited".into()))?;
        let line = serde_json::to_string(&ReplRequest { cmd, env })
            .map_err(|e| BridgeError::Protocol(e.to_string()))?;
        let written = writeln!(stdin, "{line}\n").and_then(|_| stdin.flush());
        if let Err(e) = written {
            self.shutdown();
            return Err(BridgeError::BackendUnavailable(format!(
                "REPL write failed: {e}"
            )));
        }

        let deadline = Instant::now() + timeout;
        let mut buf = String::new();
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => {
                    if line.trim().is_empty() {
                        if buf.trim().is_empty() {
                            continue;
                        }
                    } else {
                        buf.push_str(&line);
                        buf.push('\n');
                    }
                    if let Ok(resp) = serde_json::from_str::<ReplResponse>(&buf) {
                        if let Some(msg) = resp.message {
                            return Err(BridgeError::Protocol(msg));
                        }
                        return Ok(resp);
                    }
                    if line.trim().is_empty() {
                        return Err(BridgeError::Protocol(format!("unparseable reply: {buf}")));
                    }
                }
                Ok(Err(e)) => {
                    self.shutdown();
                    return Err(BridgeError::BackendUnavailable(format!(
                        "REPL read failed: {e}"
                    )));
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.shutdown();
                    return Err(BridgeError::BackendUnavailable(format!(
                        "REPL did not answer within {timeout:?}"
                    )));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.shutdown();
                    return Err(BridgeError::BackendUnavailable(
                        "REPL process has exited".into(),
                    ));
                }
            }
        }
    }

    fn shutdown(&mut self) {
        self.stdin = None;
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Checker for LeanRepl {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError> {
        req.validate()?;
        let resp = self.round_trip(&req.command_text(), self.base_env, self.check_timeout)?;
        let diags: Vec<Diagnostic> = resp.messages.into_iter().map(Into::into).collect();
        interpret(&diags)
    }
}

impl Drop for LeanRepl {
    fn drop(&mut self) {
        self.shutdown();
    }
}
