//! Number formatting and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// 12 significant digits in scientific notation; negative zero prints as
/// zero.
pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub fn csv_line(values: &[f64]) -> String {
    let mut line = values.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Files staged next to their destinations and renamed into place only
/// when every one of them has been written.
#[derive(Default)]
pub struct AtomicBatch {
    staged: Vec<(tempfile::NamedTempFile, PathBuf)>,
}

impl AtomicBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&mut self, path: &Path, contents: &[u8]) -> Result<()> {
        let io = |source| CliError::Io { path: path.to_path_buf(), source };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&dir).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
        tmp.write_all(contents).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.staged.len());
        for (tmp, path) in self.staged {
            tmp.persist(&path).map_err(|e| CliError::Io { path: path.clone(), source: e.error })?;
            written.push(path);
        }
        Ok(written)
    }
}
