//! Flat key/value run configuration: `key = value` lines, `#` comments.
//! Grid keys for sweeps are written `grid.key = v1, v2, ...`.

use anyhow::{anyhow, bail, Context, Result};
use cantor_games::game::{GameConfig, Mode};
use cantor_games::Dyadic;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub values: BTreeMap<String, String>,
    /// `grid.key` entries, comma-separated value lists in file order.
    pub grid: BTreeMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                bail!("line {}: empty key or value", i + 1);
            }
            if let Some(gkey) = key.strip_prefix("grid.") {
                let vals: Vec<String> =
                    value.split(',').map(|v| v.trim().to_string()).collect();
                cfg.grid.insert(gkey.to_string(), vals);
            } else {
                cfg.values.insert(key.to_string(), value.to_string());
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| anyhow!("config is missing `{key}`"))
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config `{key} = {v}`: {e}")),
        }
    }

    /// A copy with one key overridden, for sweep cells.
    pub fn with_value(&self, key: &str, value: &str) -> Self {
        let mut out = self.clone();
        out.values.insert(key.to_string(), value.to_string());
        out
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::PairPrefixFree => "pair-prefix-free",
        Mode::PairPrefixStable => "pair-prefix-stable",
        Mode::PairBipartite => "pair-bipartite",
        Mode::Set => "set",
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "pair-prefix-free" => Ok(Mode::PairPrefixFree),
        "pair-prefix-stable" => Ok(Mode::PairPrefixStable),
        "pair-bipartite" => Ok(Mode::PairBipartite),
        "set" => Ok(Mode::Set),
        other => bail!("unknown mode {other:?}"),
    }
}

fn parse_dyadic(raw: &RawConfig, key: &str) -> Result<Option<Dyadic>> {
    match raw.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<Dyadic>()
            .map(Some)
            .map_err(|e| anyhow!("config `{key} = {v}`: {e}")),
    }
}

/// Builds the game config. The star adversaries fill d, delta and the
/// size list from their stage plan when those keys are absent.
pub fn game_config(raw: &RawConfig) -> Result<GameConfig> {
    let mode = parse_mode(raw.require("mode")?)?;
    let alice = raw.get("alice").unwrap_or("");
    let star = alice == "star" || alice == "bipartite-star";

    let d = match parse_dyadic(raw, "d")? {
        Some(d) => d,
        None => bail!("config is missing `d`"),
    };
    let sizes: Vec<Dyadic> = match raw.get("sizes") {
        Some(list) => list
            .split(',')
            .map(|v| v.trim().parse::<Dyadic>().map_err(|e| anyhow!("size {v:?}: {e}")))
            .collect::<Result<_>>()?,
        None if star => {
            let plan = cantor_games::alice::StarPlan::new(&d).map_err(|e| anyhow!(e))?;
            plan.epsilons.clone()
        }
        None => bail!("config is missing `sizes`"),
    };
    let delta = match parse_dyadic(raw, "delta")? {
        Some(delta) => delta,
        None => sizes.iter().max().cloned().ok_or_else(|| anyhow!("empty size list"))?,
    };
    let cfg = GameConfig {
        mode,
        n: raw.parsed("n")?,
        s: raw.parsed("s")?.unwrap_or(2),
        d,
        delta,
        c: parse_dyadic(raw, "c")?.unwrap_or_else(Dyadic::one),
        allowed_sizes: sizes,
        seed: raw.parsed("seed")?.unwrap_or(0),
    };
    cfg.validate().map_err(|e| anyhow!("invalid config: {e}"))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_grid() {
        let raw = RawConfig::parse(
            "mode = pair-prefix-free # comment\nd = 1/2^1\ngrid.seed = 1, 2, 3\n",
        )
        .unwrap();
        assert_eq!(raw.get("mode"), Some("pair-prefix-free"));
        assert_eq!(raw.grid["seed"], vec!["1", "2", "3"]);
    }

    #[test]
    fn missing_mode_is_an_error() {
        let raw = RawConfig::parse("d = 1/2^1\nsizes = 1/2^3\n").unwrap();
        assert!(game_config(&raw).is_err());
    }

    #[test]
    fn star_config_fills_sizes_from_the_plan() {
        let raw =
            RawConfig::parse("mode = pair-prefix-free\nalice = star\nd = 1/2^1\n").unwrap();
        let cfg = game_config(&raw).unwrap();
        assert_eq!(cfg.allowed_sizes.len(), 3);
        assert_eq!(cfg.delta, "1/2^2".parse().unwrap());
    }
}
