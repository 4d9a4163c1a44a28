use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a temporary sibling file and a rename, so
/// readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        // temp files are created 0600; outputs should be ordinary files
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::Permissions::from_mode(0o644);
        tmp.as_file()
            .set_permissions(mode)
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Round half away from zero at `decimals` places.
///
/// The small nudge absorbs binary representation error, so decimal ties such
/// as 0.125 → 0.13 round up even when the product lands just below the half.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value.abs() * scale;
    let rounded = (scaled + 0.5 + 1e-12 * scaled.max(1.0)).floor() / scale;
    rounded.copysign(value)
}

/// `count × fraction` rounded half-up to an integer.
pub fn round_count(count: usize, fraction: f64) -> usize {
    round_half_up(count as f64 * fraction, 0) as usize
}

/// Per-unit seed derived from a master seed and a unit index.
pub fn sub_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}
