//! CSV artifacts: header row, comma separator, LF line endings.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliResult;

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Floats are written in shortest round-trip form.
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Files written by a scenario, relative to its output directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.root.join(name);
        self.written.push(PathBuf::from(name));
        p
    }

    pub fn table(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let p = self.path(name);
        table.write(&p)
    }

    pub fn text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let p = self.path(name);
        std::fs::write(p, text)?;
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Tag used in file names for a parameter value, e.g. `0.5` → `0.5`, `-1` → `m1`.
pub fn tag(v: f64) -> String {
    let s = v.to_string();
    match s.strip_prefix('-') {
        Some(rest) => format!("m{rest}"),
        None => s,
    }
}
