//! Self-describing NDJSON and CSV files, atomic writes and the run manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Version of every output schema written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.ndjson";

/// `CARGO_PKG_VERSION` plus `git describe` of the build tree when available.
pub fn version() -> &'static str {
    env!("JACOBI_SPECTRA_VERSION")
}

/// Header fields shared by every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub schema: String,
    pub schema_version: u32,
    pub config_hash: String,
    pub version: String,
}

impl Header {
    pub fn new(schema: &str, config_hash: &str) -> Self {
        Header {
            schema: schema.to_string(),
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.to_string(),
            version: version().to_string(),
        }
    }
}

/// One output file held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    /// Everything after the header line.
    pub fn payload(&self) -> &str {
        self.contents.split_once('\n').map_or("", |(_, rest)| rest)
    }
}

/// NDJSON: a header object on the first line, one object per row.
#[derive(Debug)]
pub struct Ndjson {
    name: String,
    buf: String,
}

impl Ndjson {
    pub fn new(name: impl Into<String>, header: &Header, extra: Value) -> Self {
        let mut head = serde_json::to_value(header).expect("header serializes");
        if let (Value::Object(h), Value::Object(x)) = (&mut head, extra) {
            h.extend(x);
        }
        let mut buf = head.to_string();
        buf.push('\n');
        Ndjson { name: name.into(), buf }
    }

    pub fn row(&mut self, row: &impl Serialize) {
        self.buf.push_str(&serde_json::to_string(row).expect("row serializes"));
        self.buf.push('\n');
    }

    pub fn finish(self) -> OutputFile {
        OutputFile {
            name: self.name,
            contents: self.buf,
        }
    }
}

/// CSV: a `#` comment header, a column line, then rows.
#[derive(Debug)]
pub struct Csv {
    name: String,
    buf: String,
    columns: usize,
}

/// A CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    F(f64),
    U(u64),
    B(bool),
    S(&'a str),
}

impl Csv {
    pub fn new(name: impl Into<String>, header: &Header, columns: &[&str]) -> Self {
        let mut buf = format!(
            "# schema={} schema_version={} config_hash={} version={}\n",
            header.schema, header.schema_version, header.config_hash, header.version
        );
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv {
            name: name.into(),
            buf,
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            match *c {
                Cell::F(x) => self.buf.push_str(&fmt_f64(x)),
                Cell::U(x) => write!(self.buf, "{x}").unwrap(),
                Cell::B(x) => self.buf.push_str(if x { "true" } else { "false" }),
                Cell::S(x) => self.buf.push_str(x),
            }
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> OutputFile {
        OutputFile {
            name: self.name,
            contents: self.buf,
        }
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Row appended to `manifest.ndjson` after a successful run.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestRow {
    pub subcommand: String,
    pub files: Vec<String>,
    pub schema_version: u32,
    pub config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
    pub threads: usize,
    pub warnings: Vec<Value>,
    pub summary: Value,
    pub config: Value,
}

/// Write every file, then append the manifest row. Returns written paths.
pub fn commit(dir: &Path, files: &[OutputFile], manifest: &ManifestRow) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        write_atomic(&path, f.contents.as_bytes())?;
        written.push(path);
    }
    let path = dir.join(MANIFEST);
    let mut text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(CliError::io(&path, e)),
    };
    if !text.is_empty() && !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&serde_json::to_string(manifest).expect("manifest serializes"));
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(written)
}

pub fn warning(code: &str, message: impl Into<String>) -> Value {
    json!({ "code": code, "message": message.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.5, -2.25e-7, 3e20, 0.1 + 0.2, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x, "{}", fmt_f64(x));
        }
        assert_eq!(fmt_f64(1e-10), "1e-10");
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn csv_header_and_rows() {
        let h = Header::new("demo", "abc");
        let mut csv = Csv::new("demo.csv", &h, &["x", "ok"]);
        csv.row(&[Cell::F(0.25), Cell::B(true)]);
        let f = csv.finish();
        assert!(f.contents.starts_with("# schema=demo schema_version=1 config_hash=abc"));
        assert_eq!(f.payload(), "x,ok\n0.25,true\n");
    }

    #[test]
    fn atomic_write_and_manifest_append() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![OutputFile { name: "a.ndjson".into(), contents: "{}\n".into() }];
        let row = ManifestRow {
            subcommand: "x".into(),
            files: vec!["a.ndjson".into()],
            schema_version: SCHEMA_VERSION,
            config_hash: "h".into(),
            version: version().into(),
            wall_time_s: 0.0,
            threads: 1,
            warnings: vec![],
            summary: Value::Null,
            config: Value::Null,
        };
        commit(dir.path(), &files, &row).unwrap();
        commit(dir.path(), &files, &row).unwrap();
        let manifest = std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert_eq!(manifest.lines().count(), 2);
        assert_eq!(std::fs::read_to_string(dir.path().join("a.ndjson")).unwrap(), "{}\n");
    }
}
