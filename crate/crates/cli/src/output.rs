//! CSV tables. Every file starts with a `# config_hash=… version=…` comment line so a
//! result can be traced back to the configuration that produced it.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{at_path, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    comment: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(cfg: &ExperimentConfig, header: &[&str]) -> Self {
        Self {
            comment: format!("# config_hash={} version={}", cfg.hash(), vqccs::VERSION),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let row: Vec<String> = cells.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "csv row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.comment);
        out.push('\n');
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_csv(path: &Path, csv: &Csv) -> CliResult<()> {
    at_path(path, vqccs::persist::atomic_write(path, csv.render().as_bytes()))
}

/// Parses a file written by [`write_csv`] into its header and rows, skipping comments.
pub fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let split = |l: &str| l.split(',').map(str::to_string).collect::<Vec<_>>();
    let header = lines.next().map(split).unwrap_or_default();
    (header, lines.map(split).collect())
}
