//! Adapters for existing detectors consulted on deferral.
//!
//! The contract is one real score in [0, 1] per text, higher = more
//! LLM-like; adapters normalize their detector's native scale. Two wire
//! protocols are supported: a subprocess reading the text on stdin and
//! printing one decimal score, and an HTTP endpoint taking `{"text": ...}`
//! and answering `{"score": ...}`.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An existing detector the pipeline defers undecidable inputs to.
pub trait FallbackDetector: Send + Sync {
    /// Scores the (normalized) input text; must land in [0, 1].
    fn score(&self, text: &str) -> Result<f64>;

    /// Human-readable adapter name for reports.
    fn name(&self) -> String;
}

/// Always answers the same score. Useful for wiring tests and as a neutral
/// stand-in (0.5) when no detector is configured.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFallback(pub f64);

impl FallbackDetector for ConstantFallback {
    fn score(&self, _text: &str) -> Result<f64> {
        Ok(self.0)
    }

    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// Runs `sh -c <command>`, writes the text to stdin, and parses a single
/// decimal score from stdout. A nonzero exit status is a failure.
pub struct SubprocessFallback {
    command: String,
}

impl SubprocessFallback {
    pub fn new(command: impl Into<String>) -> Self {
        SubprocessFallback {
            command: command.into(),
        }
    }
}

impl FallbackDetector for SubprocessFallback {
    fn score(&self, text: &str) -> Result<f64> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::FallbackUnavailable(format!("spawn {}: {e}", self.command)))?;
        // Feed stdin from a separate thread so a child that writes before
        // draining its input cannot deadlock the pipe.
        let mut stdin = child.stdin.take().expect("stdin was piped");
        let owned = text.to_string();
        let writer = std::thread::spawn(move || stdin.write_all(owned.as_bytes()));
        let output = child
            .wait_with_output()
            .map_err(|e| Error::FallbackUnavailable(format!("wait: {e}")))?;
        let write_result = writer
            .join()
            .map_err(|_| Error::FallbackUnavailable("stdin writer panicked".into()))?;
        if let Err(e) = write_result {
            // A child that decides without reading its input is fine.
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                return Err(Error::FallbackUnavailable(format!("write stdin: {e}")));
            }
        }
        if !output.status.success() {
            return Err(Error::FallbackUnavailable(format!(
                "{} exited with {}",
                self.command, output.status
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        stdout
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::FallbackUnavailable(format!("parse score {stdout:?}: {e}")))
    }

    fn name(&self) -> String {
        format!("subprocess:{}", self.command)
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

/// POSTs `{"text": ...}` to an endpoint answering `{"score": ...}`.
pub struct HttpFallback {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl HttpFallback {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpFallback {
            endpoint: endpoint.into(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(60))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl FallbackDetector for HttpFallback {
    fn score(&self, text: &str) -> Result<f64> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(&ScoreRequest { text })
            .send()
            .map_err(|e| Error::FallbackUnavailable(format!("fallback request: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::FallbackUnavailable(format!(
                "fallback endpoint returned {}",
                response.status()
            )));
        }
        let parsed: ScoreResponse = response
            .json()
            .map_err(|e| Error::FallbackUnavailable(format!("fallback response: {e}")))?;
        Ok(parsed.score)
    }

    fn name(&self) -> String {
        format!("http:{}", self.endpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subprocess_reads_stdin_and_emits_score() {
        // `wc -w` style check: emit 0.25 regardless of input, but require
        // the input to have flowed through.
        let fallback = SubprocessFallback::new("read line; echo 0.25");
        assert_eq!(fallback.score("hello there\n").unwrap(), 0.25);
    }

    #[test]
    fn subprocess_may_ignore_stdin() {
        let fallback = SubprocessFallback::new("echo 0.5");
        assert_eq!(fallback.score("unread input").unwrap(), 0.5);
    }

    #[test]
    fn subprocess_nonzero_exit_is_failure() {
        let fallback = SubprocessFallback::new("cat > /dev/null; exit 3");
        assert!(matches!(
            fallback.score("x"),
            Err(Error::FallbackUnavailable(_))
        ));
    }

    #[test]
    fn subprocess_garbage_output_is_failure() {
        let fallback = SubprocessFallback::new("cat > /dev/null; echo not-a-number");
        assert!(matches!(
            fallback.score("x"),
            Err(Error::FallbackUnavailable(_))
        ));
    }

    #[test]
    fn constant_reports_its_value() {
        assert_eq!(ConstantFallback(0.7).score("anything").unwrap(), 0.7);
    }
}
