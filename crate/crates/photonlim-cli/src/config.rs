//! Plain-text `key = value` run configuration.
//!
//! Any command-line flag may be supplied from a file; flags given on the
//! command line override file values, so a config file is a reproducible
//! record of an experiment. Lines are `key = value` with `#` comments and
//! blank lines ignored; later assignments to the same key win.

use crate::CliError;
use std::collections::BTreeMap;
use std::str::FromStr;

/// Keys accepted in config files, mirroring the long flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "schemes", "e-min", "e-max", "points", "spacing", "code", "modes", "E", "xi", "trials",
    "seed", "dt-factor", "lo-cap", "out", "format",
];

#[derive(Debug, PartialEq, Eq)]
pub enum ConfigError {
    MissingDelimiter { line: usize },
    EmptyKey { line: usize },
    UnknownKey { line: usize, key: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::MissingDelimiter { line } => {
                write!(f, "config line {line}: expected `key = value`")
            }
            ConfigError::EmptyKey { line } => write!(f, "config line {line}: empty key"),
            ConfigError::UnknownKey { line, key } => {
                write!(f, "config line {line}: unknown key `{key}`")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses the config format. Never panics, whatever the input.
pub fn parse_config_str(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::MissingDelimiter { line: lineno })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line: lineno });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line: lineno, key: key.to_string() });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Loads `--config PATH` if given; I/O failures are exit-3 errors, malformed
/// content is a usage error.
pub fn load_config(path: Option<&str>) -> Result<BTreeMap<String, String>, CliError> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read config {p}: {e}")))?;
            parse_config_str(&text).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Flag-over-file resolution: the command-line value wins, then the config
/// file, then the built-in default.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    config: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    match flag {
        Some(v) => Ok(v),
        None => match config.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse `{raw}`"))),
            None => Ok(default),
        },
    }
}

/// Like [`resolve`] but without a default: stays `None` when absent in both.
pub fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    config: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match config.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse `{raw}`"))),
            None => Ok(None),
        },
    }
}
