use crate::error::Result;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Directory used for outputs when no explicit path is given.
pub const OUT_DIR_ENV: &str = "ASEP_SPECTRA_OUT_DIR";

/// Self-description written at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: String,
    /// Command line that reproduces the run.
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

impl Header {
    pub fn new(schema: &str, command: String, params: serde_json::Value, seed: Option<u64>) -> Self {
        Header {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema: schema.into(),
            command,
            params,
            seed,
        }
    }

    /// `# `-prefixed lines for CSV files.
    pub fn write_comment(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "# {} {}", self.tool, self.version)?;
        writeln!(w, "# schema: {}", self.schema)?;
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# params: {}", self.params)?;
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}"),
            None => writeln!(w, "# seed: none"),
        }
    }
}

/// `--out` if given, else `$ASEP_SPECTRA_OUT_DIR/<default_name>`, else
/// `None` (standard output).
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(default_name))
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Shortest round-trip formatting, exponent form for extreme magnitudes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Quote an argument for a POSIX shell when needed.
pub fn shell_word(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=:,+".contains(c)) {
        s.into()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

pub fn command_line(parts: &[String]) -> String {
    std::iter::once(env!("CARGO_PKG_NAME").to_string())
        .chain(parts.iter().map(|p| shell_word(p)))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-8), "1e-8");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(shell_word("a b"), "'a b'");
        assert_eq!(shell_word("2..5"), "2..5");
    }

    #[test]
    fn header_lines() {
        let h = Header::new("t/1", "asep-spectra x".into(), serde_json::json!({"a": 1}), Some(3));
        let mut buf = Vec::new();
        h.write_comment(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# asep-spectra "));
        assert!(s.contains("# seed: 3\n"));
        assert!(s.lines().all(|l| l.starts_with("# ")));
    }
}
