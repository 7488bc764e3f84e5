//! Artifact rendering and delivery.
//!
//! Commands build the whole artifact in memory; it reaches disk only through
//! [`deliver`], which writes a temporary file next to the target and renames
//! it, so a failed run never leaves a partial file behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use isoprofile::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::{Failure, Outcome};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the canonical (key-sorted, compact) JSON form of a config.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// `x` rounded half away from zero to 12 decimal places.
pub fn decimal(x: &Rational) -> String {
    const PLACES: usize = 12;
    let scale = BigInt::from(10u64.pow(PLACES as u32));
    let num = x.numer().abs() * &scale;
    let (q, r) = num.div_rem(x.denom());
    let q = if r * 2u8 >= *x.denom() { q + 1u8 } else { q };
    let digits = format!("{:0>width$}", q.to_string(), width = PLACES + 1);
    let (int, frac) = digits.split_at(digits.len() - PLACES);
    let sign = if x.is_negative() && !q.is_zero() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

pub fn fraction(x: &Rational) -> String {
    isoprofile::scalar::format_rational(x)
}

/// A CSV artifact: one comment line with version, config hash and notes,
/// then the header row and the data rows.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn render(&self, config: &Value) -> String {
        let mut first = format!("# version={VERSION} config={}", config_hash(config));
        for (k, v) in &self.notes {
            first += &format!(" {k}={v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        format!("{first}\n{body}")
    }
}

/// Pretty JSON with an `"artifact"` entry carrying version and config hash.
pub fn render_json(mut v: Value, config: &Value) -> String {
    if let Value::Object(m) = &mut v {
        m.insert(
            "artifact".into(),
            serde_json::json!({ "version": VERSION, "config": config_hash(config) }),
        );
    }
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// Fails early when the directory that will hold `out` is missing or read-only.
pub fn check_writable(out: &Path) -> Outcome<()> {
    let dir = parent_dir(out);
    let io = |e: std::io::Error| Failure::Io {
        path: out.display().to_string(),
        source: e,
    };
    let meta = std::fs::metadata(&dir).map_err(io)?;
    if !meta.is_dir() {
        return Err(Failure::Usage(format!("{} is not a directory", dir.display())));
    }
    if meta.permissions().readonly() {
        return Err(Failure::Usage(format!("{} is not writable", dir.display())));
    }
    if out.is_dir() {
        return Err(Failure::Usage(format!("{} is a directory", out.display())));
    }
    Ok(())
}

fn parent_dir(out: &Path) -> PathBuf {
    match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn deliver(out: Option<&Path>, body: &str) -> Outcome<()> {
    let Some(out) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(body.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Failure::Io {
                path: "<stdout>".into(),
                source: e,
            });
    };
    let io = |e: std::io::Error| Failure::Io {
        path: out.display().to_string(),
        source: e,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(out)).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.persist(out).map_err(|e| io(e.error))?;
    Ok(())
}
