//! JSON files under a cache directory.

use std::fs;
use std::path::{Path, PathBuf};

use lsq_core::brandt::{self, IdealClassSet};
use lsq_core::modsym::{self, ModSymSpace};
use lsq_core::verify::Store;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Cache of class sets and modular symbol spaces. Read and write failures only
/// cost recomputation.
#[derive(Clone, Debug)]
pub struct DiskStore {
    dir: PathBuf,
}

impl DiskStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn class_path(&self, q: u64, m: u64) -> PathBuf {
        self.dir.join(format!("classes-q{q}-m{m}-v{}.json", brandt::FORMAT_VERSION))
    }

    fn space_path(&self, n: u64) -> PathBuf {
        self.dir.join(format!("modsym-n{n}-v{}.json", modsym::FORMAT_VERSION))
    }

    fn read<T: DeserializeOwned>(path: &Path) -> Option<T> {
        let bytes = fs::read(path).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    fn write<T: Serialize>(&self, path: &Path, value: &T) {
        let go = || -> std::io::Result<()> {
            fs::create_dir_all(&self.dir)?;
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, serde_json::to_vec(value)?)?;
            fs::rename(&tmp, path)
        };
        if let Err(e) = go() {
            eprintln!("warning: could not write cache file {}: {e}", path.display());
        }
    }
}

impl Store for DiskStore {
    fn load(&mut self, q: u64, m: u64) -> Option<IdealClassSet> {
        Self::read(&self.class_path(q, m))
    }

    fn save(&mut self, set: &IdealClassSet) {
        self.write(&self.class_path(set.disc, set.level), set);
    }

    fn load_space(&mut self, n: u64) -> Option<ModSymSpace> {
        Self::read(&self.space_path(n))
    }

    fn save_space(&mut self, space: &ModSymSpace) {
        self.write(&self.space_path(space.level()), space);
    }
}
