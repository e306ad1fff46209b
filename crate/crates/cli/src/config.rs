//! Flat key=value configuration files.
//!
//! Lines are `key = value` (spaces optional); `#` starts a comment. Flags
//! take precedence over config values, config values over built-in defaults.
//! Recognized keys: eta, c_tau, c_thr, t_max, t_outer, l_inner, tol, seeds,
//! success_threshold, alpha, budget, trials.

use std::collections::HashMap;
use std::path::Path;

#[derive(Default, Debug, Clone)]
pub struct Config {
    values: HashMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "eta",
    "c_tau",
    "c_thr",
    "t_max",
    "t_outer",
    "l_inner",
    "tol",
    "seeds",
    "success_threshold",
    "alpha",
    "budget",
    "trials",
];

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, String> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config {}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!(
                    "config {}:{}: unknown key `{key}`",
                    path.display(),
                    lineno + 1
                ));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    /// flag > config > default.
    pub fn resolve<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> T {
        if let Some(v) = flag {
            return v;
        }
        if let Some(raw) = self.values.get(key) {
            if let Ok(v) = raw.parse() {
                return v;
            }
        }
        default
    }
}
