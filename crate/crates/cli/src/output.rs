//! Output encoding, atomic writes and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, ErrorEntry};

/// A named output produced by an analysis, not yet written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        Artifact {
            name: name.into(),
            bytes,
        }
    }

    pub fn csv<T: Serialize>(name: impl Into<String>, rows: &[T]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).expect("flat rows serialize");
        }
        Artifact {
            name: name.into(),
            bytes: w.into_inner().expect("in-memory writer"),
        }
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        Artifact {
            name: name.into(),
            bytes: text.into_bytes(),
        }
    }

    /// Whitespace-separated columns with a `#` header, as gnuplot reads them.
    pub fn plot(name: impl Into<String>, columns: &[&str], rows: &[Vec<f64>]) -> Self {
        let mut s = format!("# {}\n", columns.join(" "));
        for row in rows {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        Artifact::text(name, s)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary file in the target directory and a rename, so
/// readers never see partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => write_atomic(p, bytes),
        _ => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance of a run. Contains no timestamps, so identical runs give
/// identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub errors: Vec<ErrorEntry>,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Manifest {
            tool: "rgcost",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn add_inputs(&mut self, read: &[(PathBuf, Vec<u8>)]) {
        for (p, bytes) in read {
            self.inputs.push(FileDigest {
                path: p.display().to_string(),
                sha256: sha256_hex(bytes),
            });
        }
    }

    pub fn add_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }
}

/// Checks recorded digests against the files on disk; returns the paths
/// that differ or are missing. Input paths are resolved against
/// `inputs_base`, output paths against `outputs_base`.
pub fn verify_manifest(m: &serde_json::Value, inputs_base: &Path, outputs_base: &Path) -> Vec<String> {
    let mut bad = Vec::new();
    for (section, base) in [("inputs", inputs_base), ("outputs", outputs_base)] {
        for entry in m[section].as_array().into_iter().flatten() {
            let (Some(p), Some(digest)) = (entry["path"].as_str(), entry["sha256"].as_str()) else {
                bad.push(format!("{section}: malformed entry"));
                continue;
            };
            let path = base.join(p);
            match std::fs::read(&path) {
                Ok(bytes) if sha256_hex(&bytes) == digest => {}
                _ => bad.push(p.to_string()),
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_and_plot() {
        #[derive(Serialize)]
        struct Row {
            a: usize,
            b: f64,
        }
        let a = Artifact::csv("t.csv", &[Row { a: 1, b: 0.25 }]);
        assert_eq!(String::from_utf8(a.bytes).unwrap(), "a,b\n1,0.25\n");
        let p = Artifact::plot("t.dat", &["x", "y"], &[vec![1.0, 0.5]]);
        assert_eq!(String::from_utf8(p.bytes).unwrap(), "# x y\n1 0.5\n");
    }

    #[test]
    fn manifest_tamper_check() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a"), b"data").unwrap();
        let mut m = Manifest::new("test", None);
        m.add_output(Path::new("a"), b"data");
        let v = serde_json::to_value(&m).unwrap();
        assert!(verify_manifest(&v, dir.path(), dir.path()).is_empty());
        std::fs::write(dir.path().join("a"), b"tampered").unwrap();
        assert_eq!(verify_manifest(&v, dir.path(), dir.path()), vec!["a".to_string()]);
    }
}
