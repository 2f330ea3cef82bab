//! CSV and manifest writers. Files are written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::Resolved;
use crate::studies::{Cell, StudyOutput, Table};
use crate::CliError;

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats with nine significant digits, switching to exponent form outside `[1e-4, 1e9)`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = SIGNIFICANT_DIGITS - 1;
    let sci = format!("{v:.digits$e}");
    let (_, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (digits as i32 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_number(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Flag(b) => b.to_string(),
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(cell_text).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn manifest(resolved: &Resolved, output: &StudyOutput, source: &str, runtime_s: f64) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "source": source,
        "study": resolved.study.name(),
        "scenario": resolved.echo,
        "seed": resolved.budget.seed,
        "n_samples": resolved.budget.n_samples,
        "workers": resolved.budget.workers,
        "rows": output.table.rows.len(),
        "runtime_seconds": { resolved.study.name(): runtime_s },
        "summary": output.summary,
        "warnings": output.warnings,
    })
}

pub fn write_run(dir: &Path, csv: &str, manifest: &Value) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write_atomic(&dir.join(RESULTS_FILE), csv.as_bytes())?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_number(1.124806234413565), "1.12480623");
        assert_eq!(format_number(1000.0), "1000.00000");
        assert_eq!(format_number(0.0012345678912), "0.00123456789");
        assert_eq!(format_number(2.653235581402072e-9), "2.65323558e-9");
        assert_eq!(format_number(-0.5), "-0.500000000");
        assert_eq!(format_number(1e12), "1.00000000e12");
        assert_eq!(format_number(9.999999999), "10.0000000");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("fbsec-out-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"b").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
