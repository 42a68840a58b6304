//! Trials run as a shell command. Placeholders `{task}`, `{model}`,
//! `{seed}` and `{epochs}` in the template are replaced by shell-quoted
//! values, and the same values are exported as `BENCH_TASK`, `BENCH_MODEL`,
//! `BENCH_SEED` and `BENCH_EPOCHS`. The child prints one JSON object
//! `{"final_metric": <number>, "per_epoch": [..]?}` on stdout. If stdout
//! also carries log output, the last non-empty line must be the object.

use std::io::Read;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::executor::{TrialExecutor, TrialOutcome, TrialRequest};
use super::seeds::SeedStreams;
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone)]
pub struct ExternalExecutor {
    template: String,
    timeout: Duration,
}

#[derive(Deserialize)]
struct Reply {
    final_metric: f64,
    #[serde(default)]
    per_epoch: Option<Vec<f64>>,
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"-_./:=+,".contains(&b))
    {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

impl ExternalExecutor {
    pub fn new(template: impl Into<String>) -> Self {
        ExternalExecutor {
            template: template.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command_line(&self, request: &TrialRequest) -> String {
        self.template
            .replace("{task}", &shell_quote(&request.task.name))
            .replace("{model}", &shell_quote(&request.model.name))
            .replace("{seed}", &request.seed.to_string())
            .replace("{epochs}", &request.epochs.to_string())
    }

    fn fail(request: &TrialRequest, message: impl Into<String>) -> Error {
        Error::TrialFailed {
            task: request.task.name.clone(),
            model: request.model.name.clone(),
            seed: request.seed,
            message: message.into(),
        }
    }
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn parse_reply(stdout: &str) -> std::result::Result<Reply, String> {
    let text = stdout.trim();
    if let Ok(r) = serde_json::from_str::<Reply>(text) {
        return Ok(r);
    }
    let last = text
        .lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("");
    serde_json::from_str::<Reply>(last.trim()).map_err(|e| {
        format!("schema violation: expected {{\"final_metric\": number, \"per_epoch\"?: [number]}} on stdout ({e})")
    })
}

impl TrialExecutor for ExternalExecutor {
    fn execute(&self, request: &TrialRequest, _streams: &mut SeedStreams) -> Result<TrialOutcome> {
        let started = Instant::now();
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(self.command_line(request))
            .env("BENCH_TASK", &request.task.name)
            .env("BENCH_MODEL", &request.model.name)
            .env("BENCH_SEED", request.seed.to_string())
            .env("BENCH_EPOCHS", request.epochs.to_string())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        if let Some(ds) = request.data_seed {
            cmd.env("BENCH_DATA_SEED", ds.to_string());
        }
        let mut child = cmd
            .spawn()
            .map_err(|e| Self::fail(request, format!("could not spawn `sh`: {e}")))?;
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());

        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if started.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Self::fail(
                    request,
                    format!("timed out after {:.1} s", self.timeout.as_secs_f64()),
                ));
            }
            thread::sleep(Duration::from_millis(5));
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();

        if !status.success() {
            return Err(Self::fail(
                request,
                format!("command exited with {status}; stderr: {}", stderr.trim()),
            ));
        }
        let reply = parse_reply(&stdout).map_err(|m| Self::fail(request, m))?;
        if !reply.final_metric.is_finite() {
            return Err(Self::fail(request, "final_metric is not finite"));
        }
        Ok(TrialOutcome {
            final_metric: reply.final_metric,
            per_epoch: reply.per_epoch,
            wall_time: started.elapsed(),
        })
    }
}
