//! Flag and config-file resolution. Flags win over the file; the file wins
//! over built-in defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::Value;

use crate::CliError;

pub const SEED_ENV: &str = "DIQRNG_SEED";

#[derive(Args, Debug, Clone, Default, PartialEq)]
pub struct Flags {
    /// JSON file supplying any of these flags (a previous report also works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// P or Q.
    #[arg(long)]
    pub protocol: Option<String>,
    /// chsh, chsh1, g, tavakoli, pt3 or g2.
    #[arg(long)]
    pub game: Option<String>,
    #[arg(long)]
    pub device: Option<String>,
    /// play-game strategy: quantum, classical or always-zero.
    #[arg(long)]
    pub strategy: Option<String>,
    /// equivalence-check pair: g-tavakoli, g-chsh1, g1-g2 or all.
    #[arg(long)]
    pub pair: Option<String>,
    /// Shared coin of mixed cheating devices: per-round or per-run.
    #[arg(long)]
    pub coin: Option<String>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// test or generate.
    #[arg(long)]
    pub mode: Option<String>,
    /// Bit dump to analyze.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "bits-out")]
    pub bits_out: Option<PathBuf>,
    /// Require a seed and omit the timestamp.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    Config,
    Env,
    Entropy,
}

impl SeedSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedSource::Flag => "flag",
            SeedSource::Config => "config",
            SeedSource::Env => "env",
            SeedSource::Entropy => "entropy",
        }
    }
}

/// Flags after merging the config file, with the seed settled.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub flags: Flags,
    pub seed: u64,
    pub seed_source: SeedSource,
}

fn config_map(path: &Path) -> Result<serde_json::Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    // a report: replay its manifest
    if let Some(Value::Object(manifest)) = map.remove("manifest") {
        let mut merged = match manifest.get("config") {
            Some(Value::Object(c)) => c.clone(),
            _ => serde_json::Map::new(),
        };
        for key in ["seed", "deterministic"] {
            if let Some(v) = manifest.get(key) {
                merged.insert(key.into(), v.clone());
            }
        }
        return Ok(merged);
    }
    Ok(map)
}

fn take_str(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<String>, CliError> {
    match map.get(key).or_else(|| map.get(&key.replace('-', "_"))) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(CliError::Config(format!("{key}: expected a string, got {other}"))),
    }
}

fn take_u64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<u64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{key}: expected a non-negative integer, got {v}"))),
    }
}

fn take_f64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<f64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{key}: expected a number, got {v}"))),
    }
}

fn merge(flags: &Flags, map: &serde_json::Map<String, Value>) -> Result<Flags, CliError> {
    let known = [
        "protocol", "game", "device", "strategy", "pair", "coin", "rounds", "seed", "delta", "gamma", "mode",
        "input", "out", "bits-out", "bits_out", "deterministic",
    ];
    if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown config key {k:?}")));
    }
    let path = |key: &str| take_str(map, key).map(|o| o.map(PathBuf::from));
    let deterministic = match map.get("deterministic") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(v) => return Err(CliError::Config(format!("deterministic: expected a boolean, got {v}"))),
    };
    Ok(Flags {
        config: flags.config.clone(),
        protocol: flags.protocol.clone().or(take_str(map, "protocol")?),
        game: flags.game.clone().or(take_str(map, "game")?),
        device: flags.device.clone().or(take_str(map, "device")?),
        strategy: flags.strategy.clone().or(take_str(map, "strategy")?),
        pair: flags.pair.clone().or(take_str(map, "pair")?),
        coin: flags.coin.clone().or(take_str(map, "coin")?),
        rounds: flags.rounds.or(take_u64(map, "rounds")?),
        seed: flags.seed.or(take_u64(map, "seed")?),
        delta: flags.delta.or(take_f64(map, "delta")?),
        gamma: flags.gamma.or(take_f64(map, "gamma")?),
        mode: flags.mode.clone().or(take_str(map, "mode")?),
        input: flags.input.clone().or(path("input")?),
        out: flags.out.clone().or(path("out")?),
        bits_out: flags.bits_out.clone().or(path("bits-out")?),
        deterministic: flags.deterministic || deterministic,
    })
}

/// Merges the config file and settles the seed: flag, then file, then
/// `DIQRNG_SEED`, then an OS entropy draw (refused in deterministic mode).
pub fn resolve(flags: &Flags, env_seed: Option<String>) -> Result<Settings, CliError> {
    let (merged, from_file) = match &flags.config {
        Some(path) => {
            let map = config_map(path)?;
            let file_seed = take_u64(&map, "seed")?;
            (merge(flags, &map)?, file_seed.is_some())
        }
        None => (flags.clone(), false),
    };
    let env = match env_seed {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be a 64-bit unsigned integer, got {s:?}")))?,
        ),
        None => None,
    };
    let (seed, seed_source) = match (flags.seed, merged.seed, env) {
        (Some(s), _, _) => (s, SeedSource::Flag),
        (None, Some(s), _) if from_file => (s, SeedSource::Config),
        (None, _, Some(s)) => (s, SeedSource::Env),
        _ if merged.deterministic => {
            return Err(CliError::Usage(format!(
                "--deterministic needs a seed (--seed, config file or {SEED_ENV})"
            )))
        }
        _ => (rand::random::<u64>(), SeedSource::Entropy),
    };
    Ok(Settings {
        flags: Flags { seed: Some(seed), ..merged },
        seed,
        seed_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str, text: &str) -> PathBuf {
        let p = std::env::temp_dir().join(format!("diqrng-config-{}-{name}", std::process::id()));
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn seed_precedence() {
        let f = Flags { seed: Some(1), ..Flags::default() };
        let s = resolve(&f, Some("2".into())).unwrap();
        assert_eq!((s.seed, s.seed_source), (1, SeedSource::Flag));
        let s = resolve(&Flags::default(), Some("2".into())).unwrap();
        assert_eq!((s.seed, s.seed_source), (2, SeedSource::Env));
        let s = resolve(&Flags::default(), None).unwrap();
        assert_eq!(s.seed_source, SeedSource::Entropy);
        let det = Flags { deterministic: true, ..Flags::default() };
        assert!(matches!(resolve(&det, None), Err(CliError::Usage(_))));
        assert!(resolve(&Flags::default(), Some("nope".into())).is_err());
    }

    #[test]
    fn flags_override_file() {
        let p = tmp("a.json", r#"{"protocol": "Q", "rounds": 50, "seed": 9, "bits-out": "x.txt"}"#);
        let f = Flags { config: Some(p.clone()), rounds: Some(7), ..Flags::default() };
        let s = resolve(&f, Some("3".into())).unwrap();
        assert_eq!(s.flags.protocol.as_deref(), Some("Q"));
        assert_eq!(s.flags.rounds, Some(7));
        assert_eq!((s.seed, s.seed_source), (9, SeedSource::Config));
        assert_eq!(s.flags.bits_out, Some(PathBuf::from("x.txt")));
        std::fs::remove_file(p).unwrap();
    }

    #[test]
    fn report_manifest_replays() {
        let p = tmp("b.json", r#"{"manifest": {"command": "run-protocol", "seed": 4, "deterministic": true, "config": {"protocol": "P", "rounds": 10}}, "verdict": {}}"#);
        let s = resolve(&Flags { config: Some(p.clone()), ..Flags::default() }, None).unwrap();
        assert_eq!(s.seed, 4);
        assert!(s.flags.deterministic);
        assert_eq!(s.flags.rounds, Some(10));
        std::fs::remove_file(p).unwrap();
    }

    #[test]
    fn bad_files() {
        let p = tmp("c.json", r#"{"rounds": "many"}"#);
        assert!(matches!(resolve(&Flags { config: Some(p.clone()), ..Flags::default() }, None), Err(CliError::Config(_))));
        std::fs::write(&p, r#"{"colour": 1}"#).unwrap();
        assert!(resolve(&Flags { config: Some(p.clone()), ..Flags::default() }, None).is_err());
        std::fs::write(&p, "[1]").unwrap();
        assert!(resolve(&Flags { config: Some(p.clone()), ..Flags::default() }, None).is_err());
        std::fs::remove_file(p).unwrap();
        let missing = Flags { config: Some("/nonexistent/diqrng.json".into()), ..Flags::default() };
        assert!(matches!(resolve(&missing, None), Err(CliError::Io(_))));
    }
}
