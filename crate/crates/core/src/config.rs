//! `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! CLI flag names with or without the leading dashes (`n-list`, `beta_x`
//! and `--tol` are all accepted); `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("duplicate key `{0}`")]
    Duplicate(String),
}

pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches('-').replace('_', "-")
}

pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate(key));
        }
    }
    Ok(out)
}

pub fn read_entries(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_entries(&text)
}

/// Parses a comma-separated list such as `1e-4,1e-5` or `8,16,32`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| format!("cannot parse `{p}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_and_comments() {
        let e = parse_entries("# study\nk = 2\n--beta_x= 2.5\n\nn-list = 8, 16\n").unwrap();
        assert_eq!(e["k"], "2");
        assert_eq!(e["beta-x"], "2.5");
        assert_eq!(parse_list::<usize>(&e["n-list"]).unwrap(), vec![8, 16]);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_entries("k 2"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_entries("k=1\nk=2"), Err(ConfigError::Duplicate(_))));
        assert!(parse_list::<f64>("1e-4,x").is_err());
    }
}
