use std::path::{Path, PathBuf};

use fiberseg_core::volume::{stem_paths, Grid, Voxel};
use fiberseg_core::{Error, Result};

/// Files written by the current command, deleted again if the command fails.
#[derive(Debug, Default)]
pub struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn track(&mut self, path: &Path) {
        self.written.push(path.to_path_buf());
    }

    pub fn volume<T: Voxel>(&mut self, v: &Grid<T>, stem: &Path) -> Result<()> {
        let (json, raw) = stem_paths(stem);
        self.track(&json);
        self.track(&raw);
        v.write(stem)
    }

    pub fn bytes(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        self.track(path);
        std::fs::write(path, bytes).map_err(|e| Error::Io { path: path.into(), source: e })
    }

    pub fn json<T: serde::Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.bytes(path, text.as_bytes())
    }

    pub fn dir(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })
    }

    pub fn remove_all(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}
