//! Crash-safe file replacement: content is written to a sibling temporary
//! file and renamed into place only after a successful flush, so a failed
//! or interrupted write can never leave a truncated file at the target.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".tmp");
    path.with_file_name(name)
}

pub(crate) fn replace_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let tmp = temp_sibling(path);
    let mut w = BufWriter::new(File::create(&tmp)?);
    let outcome = write(&mut w).and_then(|()| w.flush().map_err(Into::into));
    drop(w);
    match outcome {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}
