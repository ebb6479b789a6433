//! Command results held in memory and written atomically.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Ordered `key = value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Value of `key` parsed as a float.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

/// Everything a command produces. Nothing touches the disk until [`Report::write`].
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: Summary,
    /// `(file name, contents)` relative to the output directory.
    pub files: Vec<(String, Vec<u8>)>,
    /// Quantities that failed a check; non-empty means exit status 3.
    pub failures: Vec<String>,
}

impl Report {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    /// A file decoded as UTF-8.
    pub fn text(&self, name: &str) -> Option<&str> {
        std::str::from_utf8(self.file(name)?).ok()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Writes every file into `dir`, each through a temporary file and a rename.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::field("output.dir", format!("cannot create {}: {e}", dir.display())))?;
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                write_atomic(&path, contents)?;
                Ok(path)
            })
            .collect()
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
