//! Named services and refinement blocks, loadable from a directory of JSON
//! files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::BlockFragment;
use crate::model::WebService;

pub const BLOCK_SUFFIX: &str = ".block.json";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("service `{0}` is already registered")]
    DuplicateService(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("block `{0}` is already registered")]
    DuplicateBlock(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Services are stored behind `Arc` so simulations and compositions can
/// share them without copying.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    services: BTreeMap<String, Arc<WebService>>,
    blocks: BTreeMap<String, BlockFragment>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, ws: WebService) -> Result<(), RegistryError> {
        if self.services.contains_key(&ws.name) {
            return Err(RegistryError::DuplicateService(ws.name));
        }
        self.services.insert(ws.name.clone(), Arc::new(ws));
        Ok(())
    }

    /// Inserts unless an identical service is already present under the
    /// same name.
    pub fn insert_or_same(&mut self, ws: WebService) -> Result<(), RegistryError> {
        match self.services.get(&ws.name) {
            Some(existing) if **existing == ws => Ok(()),
            Some(_) => Err(RegistryError::DuplicateService(ws.name)),
            None => self.insert(ws),
        }
    }

    pub fn lookup(&self, name: &str) -> Result<&WebService, RegistryError> {
        self.services.get(name).map(|s| s.as_ref()).ok_or_else(|| RegistryError::UnknownService(name.into()))
    }

    pub fn shared(&self, name: &str) -> Result<Arc<WebService>, RegistryError> {
        self.services.get(name).cloned().ok_or_else(|| RegistryError::UnknownService(name.into()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.services.contains_key(name)
    }

    pub fn services(&self) -> impl Iterator<Item = &WebService> {
        self.services.values().map(|s| s.as_ref())
    }

    pub fn insert_block(&mut self, block: BlockFragment) -> Result<(), RegistryError> {
        if self.blocks.contains_key(&block.name) {
            return Err(RegistryError::DuplicateBlock(block.name));
        }
        self.blocks.insert(block.name.clone(), block);
        Ok(())
    }

    pub fn block(&self, name: &str) -> Result<&BlockFragment, RegistryError> {
        self.blocks.get(name).ok_or_else(|| RegistryError::UnknownBlock(name.into()))
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BlockFragment> {
        self.blocks.values()
    }

    /// Adds everything from `other`. Entries present in both must be equal.
    pub fn merge(&mut self, other: &Registry) -> Result<(), RegistryError> {
        for ws in other.services.values() {
            self.insert_or_same(ws.as_ref().clone())?;
        }
        for b in other.blocks.values() {
            match self.blocks.get(&b.name) {
                Some(existing) if existing == b => {}
                Some(_) => return Err(RegistryError::DuplicateBlock(b.name.clone())),
                None => {
                    self.blocks.insert(b.name.clone(), b.clone());
                }
            }
        }
        Ok(())
    }

    /// Loads every `*.json` file of `dir` (non-recursive). Files ending in
    /// `.block.json` are refinement blocks, the rest services.
    pub fn load_dir(dir: &Path) -> Result<Registry, RegistryError> {
        let io = |source| RegistryError::Io { path: dir.to_path_buf(), source };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut reg = Registry::new();
        for path in paths {
            let is_block = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(BLOCK_SUFFIX));
            if is_block {
                reg.insert_block(read_block(&path)?)?;
            } else {
                reg.insert(read_service(&path)?)?;
            }
        }
        Ok(reg)
    }
}

fn read_text(path: &Path) -> Result<String, RegistryError> {
    fs::read_to_string(path).map_err(|source| RegistryError::Io { path: path.to_path_buf(), source })
}

pub fn read_service(path: &Path) -> Result<WebService, RegistryError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| RegistryError::Json { path: path.to_path_buf(), source })
}

pub fn read_block(path: &Path) -> Result<BlockFragment, RegistryError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| RegistryError::Json { path: path.to_path_buf(), source })
}

pub fn write_service(path: &Path, ws: &WebService) -> Result<(), RegistryError> {
    fs::write(path, ws.to_json()).map_err(|source| RegistryError::Io { path: path.to_path_buf(), source })
}
