//! Report serialization: versioned JSON envelopes, check-row CSV, input
//! hashes and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::decompose::{format_f64, ReportRow, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::majorization::{CheckRow, Status};
use crate::matrix::ComplexMatrix;

pub const CHECK_CSV_HEADER: &str = "check,inputs_hash,key,lhs,rhs,margin,pass";

/// First 16 hex digits of SHA-256 over the matrix JSON encodings, one per line.
pub fn inputs_hash(matrices: &[&ComplexMatrix]) -> String {
    let mut hasher = Sha256::new();
    for m in matrices {
        hasher.update(m.to_json().as_bytes());
        hasher.update(b"\n");
    }
    let digest = format!("{:x}", hasher.finalize());
    digest[..16].to_string()
}

/// Rows of every check, each tagged with the hash of its inputs.
#[derive(Clone, Debug, Default)]
pub struct CheckTable {
    rows: Vec<(String, CheckRow)>,
}

impl CheckTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, hash: &str, row: CheckRow) {
        self.rows.push((hash.to_string(), row));
    }

    pub fn extend<'a>(&mut self, hash: &str, rows: impl IntoIterator<Item = &'a CheckRow>) {
        for r in rows {
            self.push(hash, r.clone());
        }
    }

    pub fn append(&mut self, other: &CheckTable) {
        self.rows.extend(other.rows.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|(_, r)| r.pass == Status::Fail)
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CHECK_CSV_HEADER);
        out.push('\n');
        for (hash, r) in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.check,
                hash,
                csv_field(&r.key),
                format_f64(r.lhs),
                format_f64(r.rhs),
                format_f64(r.margin),
                r.pass.as_str()
            );
        }
        out
    }
}

impl From<&ReportRow> for CheckRow {
    /// `n` and `params` are folded into the key.
    fn from(r: &ReportRow) -> Self {
        let key = match (r.n, r.params.is_empty()) {
            (Some(n), true) => format!("n={n}"),
            (Some(n), false) => format!("n={n};{}", r.params),
            (None, _) => r.params.clone(),
        };
        CheckRow {
            check: r.check,
            key,
            lhs: r.value,
            rhs: r.bound,
            margin: r.bound - r.value,
            pass: Status::from_bool(r.pass),
        }
    }
}

/// Quotes a field when it holds a comma or quote.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    report: &'a str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON `{schemaVersion, report, config, ...body}`.
pub fn envelope_json<T: Serialize>(report: &str, config: &RunConfig, body: &T) -> String {
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        report,
        config,
        body,
    })
    .expect("report types serialize");
    text.push('\n');
    text
}

/// Path of the configuration written next to a CSV output.
pub fn config_sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config.json");
    path.with_file_name(name)
}

pub fn config_json(config: &RunConfig) -> String {
    envelope_json("config", config, &serde_json::Map::new())
}

/// Writes to a temporary file in the target directory, then renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::param("out", format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Writes a CSV output together with its configuration sidecar.
pub fn write_csv_with_config(path: &Path, csv: &str, config: &RunConfig) -> Result<()> {
    write_atomic(path, csv.as_bytes())?;
    write_atomic(&config_sidecar(path), config_json(config).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::majorization::submajorizes_values;

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).unwrap();
        assert_eq!(inputs_hash(&[&a]), inputs_hash(&[&a.clone()]));
        assert_ne!(inputs_hash(&[&a]), inputs_hash(&[&b]));
        assert_ne!(inputs_hash(&[&a, &b]), inputs_hash(&[&b, &a]));
        assert_eq!(inputs_hash(&[&a]).len(), 16);
    }

    #[test]
    fn csv_layout() {
        let mut table = CheckTable::new();
        let v = submajorizes_values(&[2.0, 1.0], &[1.5, 1.5]);
        table.extend("abc", &v.rows);
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CHECK_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("submajorization,abc,k=1,1.5,2.0,0.5,true"), "{}", lines[1]);
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn atomic_write_and_envelope() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("r.csv");
        write_csv_with_config(&path, "x\n", &RunConfig::default()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x\n");
        let cfg: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(config_sidecar(&path)).unwrap()).unwrap();
        assert_eq!(cfg["schemaVersion"], 1);
        assert_eq!(cfg["config"]["curveLevel"], 16);
        let leftovers = std::fs::read_dir(path.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 2);
    }
}
