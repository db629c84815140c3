//! File access shared by the subcommands.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hhc_core::io::{parse_instance, parse_plan};
use hhc_core::solve::SolveResult;
use hhc_core::{Instance, Plan};

/// Marks an error as caused by the user's input (exit code 2).
#[derive(Debug)]
pub struct InputError;

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("input error")
    }
}

pub fn input_error(err: impl Into<anyhow::Error>) -> anyhow::Error {
    err.into().context(InputError)
}

pub fn is_input_error(err: &anyhow::Error) -> bool {
    err.downcast_ref::<InputError>().is_some()
}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display())).map_err(input_error)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let bytes = read(path)?;
    parse_instance(&bytes).with_context(|| format!("invalid instance {}", path.display())).map_err(input_error)
}

pub fn read_result(path: &Path) -> Result<SolveResult> {
    let bytes = read(path)?;
    SolveResult::from_json(&bytes).with_context(|| format!("invalid result file {}", path.display())).map_err(input_error)
}

/// Reads a plan file, or the plan inside a result file.
pub fn read_plan(path: &Path) -> Result<Plan> {
    let bytes = read(path)?;
    match parse_plan(&bytes) {
        Ok(plan) => Ok(plan),
        Err(plan_err) => match SolveResult::from_json(&bytes) {
            Ok(SolveResult { plan: Some(plan), .. }) => Ok(plan),
            Ok(_) => Err(input_error(anyhow::anyhow!("{} holds a result without a plan", path.display()))),
            Err(_) => Err(input_error(anyhow::Error::new(plan_err).context(format!("invalid plan {}", path.display())))),
        },
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

/// Aligns CSV text into a plain-text table.
pub fn render_csv(csv_text: &[u8]) -> String {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(csv_text);
    let rows: Vec<Vec<String>> =
        reader.records().filter_map(|r| r.ok()).map(|r| r.iter().map(str::to_string).collect()).collect();
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..columns).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn render_aligns_columns() {
        let text = render_csv(b"a,bbb\ncccc,d\n");
        assert_eq!(text, "a     bbb\ncccc  d\n");
    }

    #[test]
    fn missing_file_is_input_error() {
        let err = read(Path::new("/nonexistent/file.json")).unwrap_err();
        assert!(is_input_error(&err));
    }
}
