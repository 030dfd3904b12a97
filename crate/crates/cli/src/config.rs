//! `--config` files: TOML, or plain `key=value` lines.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::Format;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub streams: Option<usize>,
    pub mu1: Option<f64>,
    pub nu: Option<u64>,
    pub threshold: Option<f64>,
    pub gamma: Option<f64>,
    pub horizon: Option<u64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "mu1_grid")]
    pub mu1_grid: Option<Grid<f64>>,
    #[serde(alias = "m_grid")]
    pub m_grid: Option<Grid<usize>>,
    pub cases: Option<usize>,
    #[serde(alias = "max_len")]
    pub max_len: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

/// A grid written either as an array or as a comma-separated string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Grid<T> {
    List(Vec<T>),
    Text(String),
}

impl<T: std::str::FromStr> Grid<T> {
    pub fn into_vec(self, key: &str) -> Result<Vec<T>, CliError> {
        match self {
            Grid::List(v) => Ok(v),
            Grid::Text(s) => s
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("config: bad {key} entry {item:?}")))
                })
                .collect(),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        match toml::from_str(text) {
            Ok(cfg) => Ok(cfg),
            Err(toml_err) => {
                let rewritten = quote_bare_values(text).ok_or_else(|| toml_err.to_string())?;
                toml::from_str(&rewritten).map_err(|e| e.to_string())
            }
        }
    }
}

/// Turns `key=value` lines into TOML by quoting values that are not
/// already valid TOML. Returns `None` for lines without `=`.
fn quote_bare_values(text: &str) -> Option<String> {
    let mut out = String::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=')?;
        let (key, value) = (key.trim(), value.trim());
        let probe = format!("v = {value}");
        if toml::from_str::<toml::Table>(&probe).is_ok() {
            out.push_str(&format!("{key} = {value}\n"));
        } else {
            out.push_str(&format!("{key} = {value:?}\n"));
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_form() {
        let cfg =
            FileConfig::parse("streams = 3\nmu1-grid = [-1.0, 2.0]\nformat = \"json\"\n").unwrap();
        assert_eq!(cfg.streams, Some(3));
        assert_eq!(
            cfg.mu1_grid.unwrap().into_vec("mu1-grid").unwrap(),
            vec![-1.0, 2.0]
        );
        assert_eq!(cfg.format, Some(Format::Json));
    }

    #[test]
    fn key_value_form() {
        let cfg = FileConfig::parse("# comment\nstreams=3\nformat=json\nm_grid=1,10\nmu1=-0.5\n")
            .unwrap();
        assert_eq!(cfg.streams, Some(3));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.m_grid.unwrap().into_vec("m-grid").unwrap(), vec![1, 10]);
        assert_eq!(cfg.mu1, Some(-0.5));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(FileConfig::parse("bogus = 1\n").is_err());
        assert!(FileConfig::parse("no equals sign\n").is_err());
    }
}
