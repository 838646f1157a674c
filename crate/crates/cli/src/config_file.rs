//! Optional config file: plain-text `key=value` lines supplying defaults
//! for flags the user did not pass. Keys are the long flag names.

use std::collections::BTreeMap;
use std::path::Path;

pub struct FileDefaults {
    values: BTreeMap<String, String>,
}

impl FileDefaults {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected 'key=value', got '{line}'",
                    path.display(),
                    no + 1
                ));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Flag value if absent on the command line: parses the file entry.
    pub fn fill<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key '{key}': {e}")),
            None => Ok(None),
        }
    }
}
