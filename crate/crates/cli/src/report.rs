use std::path::Path;

use crate::CliError;

/// Fixed 17-significant-digit formatting; infinities print as `inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn log10_or_nan(x: f64) -> f64 {
    if x > 0.0 {
        x.log10()
    } else {
        f64::NAN
    }
}

/// Writes `# dgtime <version> config_sha256=<hash>`, a header row, then rows.
pub fn write_csv(
    path: &Path,
    config_hash: &str,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut buf = format!("# dgtime {} config_sha256={config_hash}\n", env!("CARGO_PKG_VERSION")).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    std::fs::write(path, buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
