use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ost_core::Error;
use serde::Serialize;

use crate::Failure;

pub fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    emit(&to_json(value)?)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
pub fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(io_failure(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Core(Error::Parse { context: "JSON output".into(), message: e.to_string() }))
}

fn io_failure(path: &Path, source: std::io::Error) -> Failure {
    Failure::Core(Error::Io { path: path.to_path_buf(), source })
}

/// Writes files so that each either appears complete or not at all, and
/// removes everything it wrote if a later write fails.
#[derive(Default)]
pub struct AtomicWriter {
    written: Vec<PathBuf>,
}

impl AtomicWriter {
    pub fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), Failure> {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
        let tmp = path.with_file_name(format!(".{name}.partial"));
        let res = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
        match res {
            Ok(()) => {
                self.written.push(path.to_path_buf());
                Ok(())
            }
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                self.rollback();
                Err(io_failure(path, e))
            }
        }
    }

    pub fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}
