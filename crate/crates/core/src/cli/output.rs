//! CSV emission with the run manifest echoed as a `#` comment block.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files and every value parses back exactly.

use std::fmt::Write as _;

use crate::config::RunConfig;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command: resolved configuration, command
/// name and flags, plus when and with what version it ran.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub command: String,
    pub flags: Vec<String>,
    pub config: RunConfig<f64>,
    /// Non-config run parameters such as the quadrature size.
    pub extra: Vec<(String, String)>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, flags: Vec<String>, config: RunConfig<f64>) -> Self {
        Self {
            command: command.to_string(),
            flags,
            config,
            extra: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    /// Header block for CSV files. The timestamp is left out so reruns
    /// reproduce the file byte for byte.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {TOOL} {VERSION}").unwrap();
        writeln!(s, "# command = {}", self.command).unwrap();
        writeln!(s, "# flags = {}", self.flags.join(" ")).unwrap();
        for (k, v) in &self.extra {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        s.push_str(&self.config.write_with_prefix("# "));
        s
    }

    /// Manifest file body; a valid config file for `--config`.
    pub fn file_body(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {TOOL} {VERSION} run manifest").unwrap();
        writeln!(s, "# timestamp = {}", self.timestamp).unwrap();
        writeln!(s, "# command = {}", self.command).unwrap();
        writeln!(s, "# flags = {}", self.flags.join(" ")).unwrap();
        for (k, v) in &self.extra {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        s.push_str(&self.config.to_config_string());
        s
    }
}

/// Shortest round-trip decimal; empty for missing values.
pub fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Header, column names and rows. Cells must not contain commas.
pub fn csv_table(manifest: &RunManifest, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = manifest.csv_header();
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_commented_and_stable() {
        let m = RunManifest::new("spectrum", vec!["--fine".into()], RunConfig::default())
            .with("quadrature_nodes", 2001);
        let h = m.csv_header();
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.contains("# coupling_rabi = 90"));
        assert!(h.contains("# quadrature_nodes = 2001"));
        assert!(!h.contains("timestamp"));
        assert!(m.file_body().contains("timestamp"));
    }

    #[test]
    fn manifest_body_parses_as_config() {
        let mut cfg = RunConfig::<f64>::default();
        cfg.coupling.detuning = 812.0;
        let m = RunManifest::new("spectrum", vec![], cfg);
        assert_eq!(RunConfig::<f64>::parse(&m.file_body()).unwrap(), cfg);
    }

    #[test]
    fn number_format() {
        assert_eq!(num(Some(0.1)), "0.1");
        assert_eq!(num(Some(6.667377524477269)), "6.667377524477269");
        assert_eq!(num(None), "");
    }
}
