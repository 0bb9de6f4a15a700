use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

/// Result of one subcommand: a JSON document, a table, and whether every
/// invariant the run asserts held.
pub struct Report {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Map<String, Value>,
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<String>,
    pub summary: String,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn json(&self) -> Value {
        json!({
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "passed": self.passed(),
            "failures": self.failures,
            "result": self.result,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let cfg = serde_json::to_string(&self.config).unwrap_or_default();
        match self.seed {
            Some(s) => writeln!(w, "# majorantlab {} seed={s} config={cfg}", self.command)?,
            None => writeln!(w, "# majorantlab {} config={cfg}", self.command)?,
        }
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()
    }

    pub fn emit(&self, out: Option<&Path>, format: Format) -> Result<()> {
        let csv = matches!(format, Format::Csv | Format::Both);
        let json = matches!(format, Format::Json | Format::Both);
        match out {
            Some(stem) => {
                if csv {
                    let p = with_ext(stem, "csv");
                    let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    self.write_csv(std::io::BufWriter::new(f))?;
                }
                if json {
                    let p = with_ext(stem, "json");
                    let text = serde_json::to_string_pretty(&self.json())?;
                    std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
                }
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                if csv {
                    self.write_csv(&mut lock)?;
                }
                if json {
                    writeln!(lock, "{}", serde_json::to_string_pretty(&self.json())?)?;
                }
            }
        }
        Ok(())
    }
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    stem.with_extension(ext)
}
