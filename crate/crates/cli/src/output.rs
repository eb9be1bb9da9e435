//! Artifacts: a JSON payload and a tidy CSV body, both prefixed by a header
//! recording the artifact version and the config hash.

use std::io::Write;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::{Cli, Format};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub enum CsvBody {
    Table { header: Vec<String>, rows: Vec<Vec<String>> },
    Raw(String),
}

pub struct Artifact {
    /// Extra `# key: value` lines after the header.
    pub notes: Vec<String>,
    pub json: Map<String, Value>,
    pub csv: CsvBody,
}

impl Artifact {
    pub fn table(header: &[&str], rows: Vec<Vec<String>>, json: Map<String, Value>) -> Self {
        Self { notes: Vec::new(), json, csv: CsvBody::Table { header: header.iter().map(|s| s.to_string()).collect(), rows } }
    }
}

/// `sha256` over the resolved arguments and the domain file contents.
pub fn config_hash(cli: &Cli, domain_bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cli).expect("arguments serialize"));
    h.update(domain_bytes);
    hex::encode(h.finalize())
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_artifact<W: Write>(out: &mut W, art: Artifact, format: Format, command: &str, hash: &str) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("header".into(), json!({ "artifact": "corank", "version": VERSION, "command": command, "config_sha256": hash }));
            if !art.notes.is_empty() {
                doc.insert("notes".into(), json!(art.notes));
            }
            doc.extend(art.json);
            serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
            writeln!(out)
        }
        Format::Csv => {
            writeln!(out, "# corank {VERSION} command={command} config_sha256={hash}")?;
            for n in &art.notes {
                writeln!(out, "# {n}")?;
            }
            match art.csv {
                CsvBody::Raw(s) => out.write_all(s.as_bytes()),
                CsvBody::Table { header, rows } => {
                    writeln!(out, "{}", header.join(","))?;
                    for r in rows {
                        writeln!(out, "{}", r.join(","))?;
                    }
                    Ok(())
                }
            }
        }
    }
}
