//! JSON documents, run manifests and the 17-significant-digit number format.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: &str = "1";

/// Writes every float as `d.dddddddddddddddde±x` (17 significant digits).
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub input_digests: BTreeMap<String, String>,
    pub library_version: String,
    pub threads: usize,
    pub parallel: bool,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

/// Collects manifest data while a command runs.
pub struct Run {
    started: Instant,
    manifest: RunManifest,
}

impl Run {
    pub fn new(argv: Vec<String>, threads: usize) -> Self {
        Self {
            started: Instant::now(),
            manifest: RunManifest {
                command_line: argv,
                input_digests: BTreeMap::new(),
                library_version: env!("CARGO_PKG_VERSION").to_string(),
                threads,
                parallel: vpatch_core::par::is_parallel(),
                tolerances: BTreeMap::new(),
                wall_time_seconds: 0.0,
                outputs: Vec::new(),
            },
        }
    }

    /// Reads an input file and records its SHA-256.
    pub fn read_input(&mut self, path: &Path) -> Result<String, String> {
        let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.manifest
            .input_digests
            .insert(path.display().to_string(), format!("{digest:x}"));
        String::from_utf8(bytes).map_err(|e| format!("{} is not UTF-8: {e}", path.display()))
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.manifest.tolerances.insert(key.to_string(), value);
    }

    pub fn output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    pub fn manifest(&self) -> RunManifest {
        let mut m = self.manifest.clone();
        m.wall_time_seconds = self.started.elapsed().as_secs_f64();
        m
    }

    /// `{"schema", "version", "payload", "manifest"}`.
    pub fn document<T: Serialize>(&mut self, schema: &str, payload: &T, out: Option<&Path>) -> Value {
        if let Some(p) = out {
            self.output(p);
        }
        let payload = serde_json::to_value(payload).expect("payload serializes");
        json!({
            "schema": schema,
            "version": SCHEMA_VERSION,
            "payload": payload,
            "manifest": serde_json::to_value(self.manifest()).expect("manifest serializes"),
        })
    }

    /// Writes `doc` to `out`, or to stdout when `out` is `None`.
    pub fn emit(&mut self, doc: &Value, out: Option<&Path>) -> Result<(), String> {
        let text = to_json_string(doc);
        match out {
            Some(p) => write_file(p, &text),
            None => {
                let mut out = io::stdout().lock();
                match writeln!(out, "{text}").and_then(|_| out.flush()) {
                    Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(format!("cannot write stdout: {e}")),
                    _ => Ok(()),
                }
            }
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
