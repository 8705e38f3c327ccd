//! Optional key=value configuration file. Every key corresponds to a flag
//! of some subcommand; values act as defaults and explicit flags win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

/// Every key any subcommand understands. Unknown keys are rejected so a
/// typo cannot silently change a run.
const KNOWN_KEYS: &[&str] = &[
    "b",
    "corpus",
    "cutoff",
    "cutoffs",
    "dump",
    "female_names",
    "format",
    "grid",
    "idf_floor",
    "index",
    "instances",
    "k1",
    "labels",
    "lexicon",
    "male_names",
    "matches",
    "max_tokens",
    "min_tokens",
    "name",
    "out",
    "predictions",
    "scores",
    "seed",
    "threads",
    "top_k",
    "window",
    "yates",
];

/// Parsed configuration file: flat string map, validated keys.
#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Read a `key = value` file. `#` comments and blank lines are skipped;
    /// keys must be known; duplicate keys are rejected.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| CliError::usage(format!("config file {}: {err}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config file {} line {}: expected key=value, got {line:?}",
                    path.display(),
                    i + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::usage(format!(
                    "config file {} line {}: unknown key {key:?}",
                    path.display(),
                    i + 1
                )));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::usage(format!(
                    "config file {} line {}: duplicate key {key:?}",
                    path.display(),
                    i + 1
                )));
            }
        }
        Ok(ConfigMap { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered config key {key}");
        self.entries.get(key).map(String::as_str)
    }
}

/// Default an unset flag from the config file, parsing the value.
pub fn fill_parse<T: FromStr>(
    slot: &mut Option<T>,
    cfg: &ConfigMap,
    key: &str,
) -> Result<(), CliError> {
    if slot.is_none() {
        if let Some(value) = cfg.get(key) {
            let parsed = value.parse().map_err(|_| {
                CliError::usage(format!("config key {key}: cannot parse {value:?}"))
            })?;
            *slot = Some(parsed);
        }
    }
    Ok(())
}

/// Default an unset path flag from the config file.
pub fn fill_path(slot: &mut Option<PathBuf>, cfg: &ConfigMap, key: &str) {
    if slot.is_none() {
        if let Some(value) = cfg.get(key) {
            *slot = Some(PathBuf::from(value));
        }
    }
}

/// Default an unset string flag from the config file.
pub fn fill_string(slot: &mut Option<String>, cfg: &ConfigMap, key: &str) {
    if slot.is_none() {
        if let Some(value) = cfg.get(key) {
            *slot = Some(value.to_string());
        }
    }
}

/// Default an empty repeatable path flag from a comma-separated config value.
pub fn fill_paths(slot: &mut Vec<PathBuf>, cfg: &ConfigMap, key: &str) {
    if slot.is_empty() {
        if let Some(value) = cfg.get(key) {
            slot.extend(
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from),
            );
        }
    }
}

/// Default an unset boolean flag from a true/false config value. The flag
/// being present always wins (there is no way to pass a negative flag).
pub fn fill_flag(slot: &mut bool, cfg: &ConfigMap, key: &str) -> Result<(), CliError> {
    if !*slot {
        if let Some(value) = cfg.get(key) {
            *slot = match value {
                "true" => true,
                "false" => false,
                other => {
                    return Err(CliError::usage(format!(
                        "config key {key}: expected true or false, got {other:?}"
                    )))
                }
            };
        }
    }
    Ok(())
}

/// Unwrap a setting that must be present after flags and config merge.
pub fn require<T>(slot: Option<T>, key: &str) -> Result<T, CliError> {
    slot.ok_or_else(|| CliError::usage(format!("missing --{} (or config key {})", key, key)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, content).expect("write config");
        (dir, path)
    }

    #[test]
    fn parses_known_keys_and_skips_comments() {
        let (_dir, path) = write_config("# run settings\nk1 = 1.5\n\nindex = a,b\n");
        let cfg = ConfigMap::load(&path).expect("load");
        assert_eq!(cfg.get("k1"), Some("1.5"));
        assert_eq!(cfg.get("index"), Some("a,b"));
        assert_eq!(cfg.get("b"), None);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let (_dir, path) = write_config("k2 = 1.5\n");
        assert!(matches!(ConfigMap::load(&path), Err(CliError::Usage(_))));
        let (_dir, path) = write_config("k1 = 1\nk1 = 2\n");
        assert!(matches!(ConfigMap::load(&path), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_win_over_config_values() {
        let (_dir, path) = write_config("k1 = 9.0\nwindow = 3\n");
        let cfg = ConfigMap::load(&path).expect("load");
        let mut k1 = Some(1.2_f64);
        fill_parse(&mut k1, &cfg, "k1").expect("fill");
        assert_eq!(k1, Some(1.2), "explicit flag must not be overwritten");
        let mut window: Option<usize> = None;
        fill_parse(&mut window, &cfg, "window").expect("fill");
        assert_eq!(window, Some(3), "unset flag takes the config value");
    }

    #[test]
    fn multi_value_and_boolean_fills() {
        let (_dir, path) = write_config("predictions = p1.tsv, p2.tsv\nyates = true\n");
        let cfg = ConfigMap::load(&path).expect("load");
        let mut paths = Vec::new();
        fill_paths(&mut paths, &cfg, "predictions");
        assert_eq!(
            paths,
            vec![PathBuf::from("p1.tsv"), PathBuf::from("p2.tsv")]
        );
        let mut yates = false;
        fill_flag(&mut yates, &cfg, "yates").expect("fill");
        assert!(yates);
    }

    #[test]
    fn bad_parse_and_missing_required_are_usage_errors() {
        let (_dir, path) = write_config("window = wide\n");
        let cfg = ConfigMap::load(&path).expect("load");
        let mut window: Option<usize> = None;
        assert!(matches!(
            fill_parse(&mut window, &cfg, "window"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            require::<usize>(None, "window"),
            Err(CliError::Usage(_))
        ));
    }
}
