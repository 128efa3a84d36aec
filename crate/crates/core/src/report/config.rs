//! Detector thresholds and their `key = value` file format.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::graphs::DEFAULT_HUB_DEGREE_CUTOFF;
use crate::integrity::{NameMatchConfig, DEFAULT_EVASION_WINDOW};
use crate::trading::{EpsilonRule, ShieldConfig, ShillConfig, WashConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub wash: WashConfig,
    pub hub_degree_cutoff: usize,
    pub shill: ShillConfig,
    pub shield: ShieldConfig,
    pub names: NameMatchConfig,
    pub hamming_threshold: u32,
    pub evasion_window_seconds: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            wash: WashConfig::default(),
            hub_degree_cutoff: DEFAULT_HUB_DEGREE_CUTOFF,
            shill: ShillConfig::default(),
            shield: ShieldConfig::default(),
            names: NameMatchConfig::default(),
            hamming_threshold: 0,
            evasion_window_seconds: DEFAULT_EVASION_WINDOW,
        }
    }
}

/// Every recognised key, in the order they are echoed.
pub const CONFIG_KEYS: &[&str] = &[
    "epsilon",
    "max_component_users",
    "epsilon_rule",
    "hub_degree_cutoff",
    "min_bids",
    "sigma",
    "mu",
    "require_cancel_near_end",
    "cancel_window_seconds",
    "require_no_outbidding",
    "name_max_distance",
    "name_min_len",
    "name_min_assets",
    "hamming_threshold",
    "evasion_window_seconds",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    /// Where the bad setting came from: `file:line` or `--flag`.
    pub origin: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.origin, self.message)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

impl DetectorConfig {
    /// Sets one key. Range checks happen in [`DetectorConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "epsilon" => self.wash.epsilon = parse(key, v)?,
            "max_component_users" => self.wash.max_component_users = parse(key, v)?,
            "epsilon_rule" => self.wash.epsilon_rule = v.parse::<EpsilonRule>()?,
            "hub_degree_cutoff" => self.hub_degree_cutoff = parse(key, v)?,
            "min_bids" => self.shill.min_bids = parse(key, v)?,
            "sigma" => self.shill.sigma = parse(key, v)?,
            "mu" => self.shill.mu = parse::<Decimal>(key, v)?,
            "require_cancel_near_end" => self.shield.require_cancel_near_end = parse(key, v)?,
            "cancel_window_seconds" => self.shield.cancel_window_seconds = parse(key, v)?,
            "require_no_outbidding" => self.shield.require_no_outbidding = parse(key, v)?,
            "name_max_distance" => self.names.max_distance = parse(key, v)?,
            "name_min_len" => self.names.min_name_len = parse(key, v)?,
            "name_min_assets" => self.names.min_assets = parse(key, v)?,
            "hamming_threshold" => self.hamming_threshold = parse(key, v)?,
            "evasion_window_seconds" => self.evasion_window_seconds = parse(key, v)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "epsilon" => self.wash.epsilon.to_string(),
            "max_component_users" => self.wash.max_component_users.to_string(),
            "epsilon_rule" => serde_json::to_value(self.wash.epsilon_rule)
                .ok()?
                .as_str()?
                .to_string(),
            "hub_degree_cutoff" => self.hub_degree_cutoff.to_string(),
            "min_bids" => self.shill.min_bids.to_string(),
            "sigma" => self.shill.sigma.to_string(),
            "mu" => self.shill.mu.to_string(),
            "require_cancel_near_end" => self.shield.require_cancel_near_end.to_string(),
            "cancel_window_seconds" => self.shield.cancel_window_seconds.to_string(),
            "require_no_outbidding" => self.shield.require_no_outbidding.to_string(),
            "name_max_distance" => self.names.max_distance.to_string(),
            "name_min_len" => self.names.min_name_len.to_string(),
            "name_min_assets" => self.names.min_assets.to_string(),
            "hamming_threshold" => self.hamming_threshold.to_string(),
            "evasion_window_seconds" => self.evasion_window_seconds.to_string(),
            _ => return None,
        })
    }

    /// All settings as `key → value`, in a form [`DetectorConfig::set`]
    /// accepts back.
    pub fn echo(&self) -> BTreeMap<String, String> {
        CONFIG_KEYS
            .iter()
            .map(|k| (k.to_string(), self.get(k).expect("known key")))
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        self.wash.validate()?;
        self.shill.validate()?;
        if self.hub_degree_cutoff < 1 {
            return Err("hub_degree_cutoff must be at least 1".into());
        }
        if self.hamming_threshold > 64 {
            return Err("hamming_threshold must be at most 64".into());
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. Blank lines and `#` comments
    /// are ignored; a key may appear once.
    pub fn apply_file(&mut self, name: &str, text: &str) -> Result<(), ConfigError> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let origin = || format!("{name}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError {
                origin: origin(),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), i + 1) {
                return Err(err(format!("{key} already set on line {prev}")));
            }
            self.set(key, value).map_err(err)?;
            self.validate()
                .map_err(|m| err(format!("{key}: {m}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_echo_round_trips() {
        let d = DetectorConfig::default();
        d.validate().unwrap();
        let echo = d.echo();
        assert_eq!(echo.len(), CONFIG_KEYS.len());
        assert_eq!(echo["epsilon"], "10");
        assert_eq!(echo["mu"], "0.8");
        assert_eq!(echo["epsilon_rule"], "all_connected_pairs");
        let mut back = DetectorConfig {
            hamming_threshold: 9,
            ..DetectorConfig::default()
        };
        for (k, v) in &echo {
            back.set(k, v).unwrap();
        }
        assert_eq!(back, d);
    }

    #[test]
    fn file_parsing() {
        let mut c = DetectorConfig::default();
        c.apply_file(
            "cfg",
            "# thresholds\nepsilon = 5\n\nmu=0.5 # looser\nepsilon_rule = heavy_pair_cycles\nrequire_no_outbidding = true\n",
        )
        .unwrap();
        assert_eq!(c.wash.epsilon, 5);
        assert_eq!(c.shill.mu, Decimal::new(5, 1));
        assert_eq!(c.wash.epsilon_rule, EpsilonRule::HeavyPairCycles);
        assert!(c.shield.require_no_outbidding);
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = DetectorConfig::default();
        let e = c.apply_file("cfg", "epsilon = 3\nmu = 1.5\n").unwrap_err();
        assert_eq!(e.origin, "cfg:2");
        assert!(e.message.contains("mu"), "{e}");
        for (text, line) in [
            ("bogus = 1", "cfg:1"),
            ("\nepsilon", "cfg:2"),
            ("epsilon = ten", "cfg:1"),
            ("epsilon = 1\nepsilon = 2", "cfg:2"),
            ("epsilon = 0", "cfg:1"),
        ] {
            let e = DetectorConfig::default().apply_file("cfg", text).unwrap_err();
            assert_eq!(e.origin, line, "{text:?}: {e}");
        }
    }
}
