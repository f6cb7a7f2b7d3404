//! File formats and on-disk persistence: descriptor/representation files,
//! dataset manifests, frame loading, split plans, and evaluation reports.

pub mod descfile;
pub mod frames;
pub mod manifest;
pub mod report;
pub mod splits;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to `path`, creating parent directories. With `no_clobber`
/// an existing file is an error instead of being replaced.
pub fn write_file(path: &Path, bytes: &[u8], no_clobber: bool) -> Result<()> {
    if no_clobber && path.exists() {
        return Err(Error::WouldClobber(path.to_path_buf()));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
