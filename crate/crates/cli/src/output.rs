//! CSV rendering with `#` metadata lines, and run manifests.
//!
//! Nothing written depends on time, paths or thread count, so a re-run with
//! the same parameters reproduces every byte.

use crate::error::{internal, CliError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identity of one invocation, echoed into every output.
pub struct Run {
    pub command: &'static str,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
}

impl Run {
    pub fn new<P: Serialize>(command: &'static str, params: &P, seed: Option<u64>) -> Result<Self, CliError> {
        Ok(Run {
            command,
            parameters: serde_json::to_value(params).map_err(internal)?,
            seed,
        })
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines after the standard header.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn render(&self, run: &Run) -> Result<String, CliError> {
        let mut head = format!(
            "# symrmt {VERSION}\n# command: {}\n# parameters: {}\n# seed: {}\n",
            run.command,
            run.parameters,
            run.seed.map_or("none".to_string(), |s| s.to_string())
        );
        for (k, v) in &self.notes {
            head.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).map_err(internal)?;
        for r in &self.rows {
            w.write_record(r).map_err(internal)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(internal)?).map_err(internal)?;
        Ok(head + &body)
    }
}

pub enum Payload {
    Csv(Table),
    Text(String),
}

impl Payload {
    fn render(&self, run: &Run) -> Result<String, CliError> {
        match self {
            Payload::Csv(t) => t.render(run),
            Payload::Text(s) => Ok(s.clone()),
        }
    }
}

#[derive(Serialize)]
struct OutputDigest {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: &'a serde_json::Value,
    seed: Option<u64>,
    version: &'a str,
    outputs: Vec<OutputDigest>,
}

/// `dir/stem.suffix.csv` next to the primary output `dir/stem.ext`.
fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    primary.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Writes the primary payload to `out` (or stdout) and any extras next to
/// it, then `<out>.manifest.json`. Extras are dropped without `--out`.
pub fn emit(run: &Run, out: Option<&Path>, primary: Payload, extras: Vec<(&str, Payload)>) -> Result<(), CliError> {
    let Some(path) = out else {
        print!("{}", primary.render(run)?);
        return Ok(());
    };
    let mut files = vec![(path.to_path_buf(), primary.render(run)?)];
    for (suffix, p) in &extras {
        files.push((sibling(path, suffix), p.render(run)?));
    }
    let mut outputs = Vec::new();
    for (p, text) in &files {
        std::fs::write(p, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display())))?;
        outputs.push(OutputDigest {
            file: p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
    }
    let manifest = RunManifest {
        command: run.command,
        parameters: &run.parameters,
        seed: run.seed,
        version: VERSION,
        outputs,
    };
    let mut mpath = path.as_os_str().to_owned();
    mpath.push(".manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(internal)? + "\n";
    std::fs::write(&mpath, text)?;
    Ok(())
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
