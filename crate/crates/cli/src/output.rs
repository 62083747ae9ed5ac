//! Deterministic artifacts: fixed float formatting, atomic writes, metadata sidecars.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DUNKL_PAULI_OUT";

/// 17 significant digits, round-trip exact; negative zero prints as zero.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Builds a CSV document from a header and preformatted rows.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn json_bytes<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'a str,
    version: &'a str,
    subcommand: &'a str,
    scenario: &'a str,
    config_sha256: &'a str,
    files: &'a [String],
}

/// Collects the files of one run and writes them together with the sidecar.
pub struct RunOutput {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Writes every file and `<subcommand>.meta.json`; returns the written paths.
    pub fn finish(self, subcommand: &str, scenario: &str, config_sha256: &str) -> io::Result<Vec<PathBuf>> {
        let names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        let meta = Sidecar {
            tool: "dunkl-pauli",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            scenario,
            config_sha256,
            files: &names,
        };
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let p = self.dir.join(name);
            write_atomic(&p, bytes)?;
            written.push(p);
        }
        let p = self.dir.join(format!("{subcommand}.meta.json"));
        write_atomic(&p, &json_bytes(&meta)?)?;
        written.push(p);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn csv_has_one_header_line() {
        let b = csv_bytes(&["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\n1,2\n");
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.csv");
        write_atomic(&p, b"hello").unwrap();
        write_atomic(&p, b"again").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"again");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
