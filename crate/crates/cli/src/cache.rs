//! On-disk cache of sieved windows.

use std::path::{Path, PathBuf};

use eslab_core::sieve::sieve_window;
use eslab_core::{ArithmeticTable, Window};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
}

pub fn cache_path(dir: &Path, window: Window) -> PathBuf {
    dir.join(format!("table-{}-{}.bin", window.start(), window.len()))
}

/// Loads the table for `window` from `dir`, or sieves and stores it.
/// A file that fails validation is replaced.
pub fn load_or_sieve(window: Window, dir: Option<&Path>) -> CliResult<(ArithmeticTable, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((sieve_window(window)?, CacheStatus::Disabled));
    };
    let path = cache_path(dir, window);
    match std::fs::read(&path) {
        Ok(bytes) => {
            if let Ok(table) = ArithmeticTable::from_bytes(&bytes) {
                if table.window() == window {
                    return Ok((table, CacheStatus::Hit));
                }
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(CliError::io(&path, e)),
    }
    let table = sieve_window(window)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, table.to_bytes()).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok((table, CacheStatus::Miss))
}
