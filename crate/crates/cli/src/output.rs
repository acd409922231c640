use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::failure::{Failure, Outcome};

pub const TOOL: &str = "bladegauge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common report header: tool, version, command and the resolved configuration.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    #[serde(flatten)]
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &'static str, config: C, result: R) -> Self {
        Envelope {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            result,
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Check(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Check(format!("cannot encode report: {e}")))?;
    text.push('\n');
    emit(path, &text)
}
