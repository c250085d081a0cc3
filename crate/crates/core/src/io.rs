//! Float formatting and small file helpers shared by the report writers.

use std::fs;
use std::path::Path;

use crate::error::{LinkError, Result};

/// Machine-output formatting: 17 significant digits, round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // collapse -0.0 so outputs do not depend on the sign of zero
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// Human-table formatting, two decimals like the published tables.
pub fn fmt_2dp(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".to_string() } else { s }
}

pub fn create_dir_all(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| LinkError::io(path, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir_all(parent)?;
    }
    fs::write(path, contents).map_err(|e| LinkError::io(path, e))
}

pub fn open_file(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| LinkError::io(path, e))
}
