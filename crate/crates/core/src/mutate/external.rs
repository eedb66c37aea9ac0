// SPDX-License-Identifier: Apache-2.0

//! Providers backed by an external program or an HTTP endpoint.
//!
//! Both send the same request body:
//! `{"v": 1, "prompt": "<rendered template>", "context": {...}}`.
//! A command answers with the reply text on stdout; an HTTP endpoint answers
//! with `{"reply": "<text>"}`.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use super::{proposal_from_reply, render_prompt, MutationContext, MutationError, Proposal, Provider};

pub const DEFAULT_TIMEOUT_S: u64 = 120;
pub const DEFAULT_TOKEN_ENV: &str = "ROUTEVOLVE_TOKEN";

fn request_body(template: &str, ctx: &MutationContext) -> String {
    json!({ "v": 1, "prompt": render_prompt(template, ctx), "context": ctx }).to_string()
}

/// Runs `command[0]` with the remaining arguments once per proposal.
#[derive(Clone, Debug)]
pub struct CommandProvider {
    pub command: Vec<String>,
    pub timeout_s: u64,
    pub prompt_template: String,
}

impl CommandProvider {
    pub fn new(command: Vec<String>, prompt_template: String) -> Self {
        Self { command, timeout_s: DEFAULT_TIMEOUT_S, prompt_template }
    }

    fn run(&self, input: String) -> Result<String, MutationError> {
        let (prog, args) = self.command.split_first().ok_or_else(|| MutationError::Failed("empty command".into()))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| MutationError::Failed(format!("spawn `{prog}`: {e}")))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = thread::spawn(move || {
            // A child that exits without reading closes the pipe; not our error.
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            stdout.read_to_end(&mut buf).map(|_| buf)
        });
        let mut stderr = child.stderr.take().expect("piped stderr");
        let err_reader = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });
        let deadline = Instant::now() + Duration::from_secs(self.timeout_s);
        let status = loop {
            match child.try_wait() {
                Ok(Some(s)) => break s,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(MutationError::Timeout(self.timeout_s));
                }
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(e) => return Err(MutationError::Failed(e.to_string())),
            }
        };
        let _ = writer.join();
        let out = reader.join().expect("reader thread").map_err(|e| MutationError::Failed(format!("read stdout: {e}")))?;
        let err = err_reader.join().unwrap_or_default();
        if !status.success() {
            let tail: String = err.lines().last().unwrap_or("").chars().take(200).collect();
            return Err(MutationError::Failed(format!("`{prog}` exited with {status}: {tail}")));
        }
        String::from_utf8(out).map_err(|_| MutationError::Malformed("stdout is not UTF-8".into()))
    }
}

impl Provider for CommandProvider {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError> {
        let reply = self.run(request_body(&self.prompt_template, ctx))?;
        proposal_from_reply(&reply, &ctx.current_doc)
    }
}

/// POSTs the request to `url` with an optional bearer token read from the
/// environment variable `token_env`.
#[derive(Clone, Debug)]
pub struct HttpProvider {
    pub url: String,
    pub token_env: String,
    pub timeout_s: u64,
    pub prompt_template: String,
}

#[derive(Deserialize)]
struct HttpReply {
    reply: String,
}

impl HttpProvider {
    pub fn new(url: String, prompt_template: String) -> Self {
        Self { url, token_env: DEFAULT_TOKEN_ENV.into(), timeout_s: DEFAULT_TIMEOUT_S, prompt_template }
    }
}

impl Provider for HttpProvider {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError> {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(self.timeout_s)).build();
        let mut req = agent.post(&self.url).set("Content-Type", "application/json");
        if let Ok(token) = std::env::var(&self.token_env) {
            req = req.set("Authorization", &format!("Bearer {token}"));
        }
        let resp = match req.send_string(&request_body(&self.prompt_template, ctx)) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => return Err(MutationError::Failed(format!("HTTP status {code}"))),
            Err(ureq::Error::Transport(t)) if t.kind() == ureq::ErrorKind::Io && t.to_string().contains("timed out") => {
                return Err(MutationError::Timeout(self.timeout_s))
            }
            Err(e) => return Err(MutationError::Failed(e.to_string())),
        };
        let body = resp.into_string().map_err(|e| MutationError::Failed(format!("read body: {e}")))?;
        let parsed: HttpReply = serde_json::from_str(&body).map_err(|e| MutationError::Malformed(format!("response: {e}")))?;
        proposal_from_reply(&parsed.reply, &ctx.current_doc)
    }
}
