use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Default output root when neither `--out-root` nor the environment sets one.
pub const DEFAULT_ROOT: &str = "runs";

/// A fresh directory holding every artifact of one run.
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    /// Creates `root/name`, or `root/name-2`, `root/name-3`, ... if taken.
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        for i in 1.. {
            let path = if i == 1 {
                root.join(name)
            } else {
                root.join(format!("{name}-{i}"))
            };
            match fs::create_dir(&path) {
                Ok(()) => return Ok(RunDir { path }),
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e).with_context(|| format!("creating {}", path.display())),
            }
        }
        unreachable!()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, file: &str) -> PathBuf {
        self.path.join(file)
    }

    pub fn write(&self, file: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let p = self.join(file);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(file, text)
    }

    pub fn echo<T: Serialize>(&self, config: &T) -> Result<PathBuf> {
        self.write_json("config.echo.json", config)
    }
}
