//! File emission with a provenance header.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, Resolved};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Header {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Header {
    pub fn new(r: &Resolved) -> Self {
        Self { config_sha256: r.hash.clone(), seed: r.config.solver.seed, version: VERSION.to_string() }
    }

    fn comment_lines(&self) -> String {
        format!("# config_sha256: {}\n# seed: {}\n# version: jja {}\n", self.config_sha256, self.seed, self.version)
    }
}

/// JSON document `{ "header": ..., <body fields> }`.
#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Emitter {
    pub dir: PathBuf,
    pub header: Header,
    pub formats: Vec<Format>,
}

impl Emitter {
    pub fn new(r: &Resolved) -> Result<Self, CliError> {
        let dir = r.config.output.directory.clone();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, header: Header::new(r), formats: r.config.output.formats.clone() })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Writes `name` as a CSV table preceded by `#` header comments.
    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        let mut text = self.header.comment_lines().into_bytes();
        text.extend(body);
        self.write(name, &text)
    }

    /// Writes `name` as pretty JSON with a `header` object beside `body`'s fields.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_vec_pretty(&Document { header: &self.header, body })?;
        text.push(b'\n');
        self.write(name, &text)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        log::info!(target: "jja::cli", "wrote {}", path.display());
        Ok(path)
    }
}

/// Strips `#` comment lines from emitted CSV text.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

/// Reads an emitted CSV file into its header comments and records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), CliError> {
    let text = fs::read_to_string(path)?;
    let comments = text.lines().filter(|l| l.starts_with('#')).map(str::to_string).collect();
    let body = csv_body(&text);
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let rows = r.records().collect::<Result<Vec<_>, _>>()?;
    Ok((comments, rows))
}
