use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use diqrng_core::analysis::{entropy_report, randomness_battery, BATTERY_MIN_BITS};
use diqrng_core::games::{
    best_classical, equivalence_check, exact_score, g2_frontier, reference_strategy, play_rounds,
    DeterministicStrategy, EquivalencePair, InputDistribution, Strategy,
};
use diqrng_core::protocols::{
    adversarial_devices, classical_sweep, guessing_game_bound_check, run_protocol, CoinScope,
    Decision, DeviceKind, Mode, ProtocolConfig, ProtocolKind, SampledRate,
};
use diqrng_core::GameId;

use crate::config::{resolve, Settings};
use crate::report::{parse_bits, render_bits, Json};
use crate::{CliError, Command};

pub const DEFAULT_ROUNDS: u64 = 100_000;
pub const DEFAULT_PLAY_ROUNDS: u64 = 10_000;

/// Everything a command produced, not yet written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub out: Option<PathBuf>,
    pub bits: Option<(PathBuf, String)>,
    pub exit_code: i32,
}

fn manifest(command: &str, s: &Settings, config: Json) -> Json {
    let mut m = Json::obj()
        .with("command", command)
        .with("tool_version", env!("CARGO_PKG_VERSION"))
        .with("seed", s.seed)
        .with("seed_source", s.seed_source.as_str())
        .with("deterministic", s.flags.deterministic)
        .with("config", config);
    if !s.flags.deterministic {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        m.push("timestamp_unix", now);
    }
    m
}

fn parse<T: std::str::FromStr>(value: Option<&str>, default: T) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    match value {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e: T::Err| CliError::Usage(e.to_string())),
    }
}

fn require_game(s: &Settings) -> Result<GameId, CliError> {
    let name = s.flags.game.as_deref().ok_or_else(|| CliError::Usage("--game is required".into()))?;
    name.parse().map_err(|e: diqrng_core::GameError| CliError::Usage(e.to_string()))
}

fn coin_scope(name: Option<&str>) -> Result<CoinScope, CliError> {
    match name.unwrap_or("per-round") {
        "per-round" => Ok(CoinScope::PerRound),
        "per-run" => Ok(CoinScope::PerRun),
        other => Err(CliError::Usage(format!("unknown coin scope {other:?}; use per-round or per-run"))),
    }
}

fn coin_name(c: CoinScope) -> &'static str {
    match c {
        CoinScope::None => "none",
        CoinScope::PerRound => "per-round",
        CoinScope::PerRun => "per-run",
    }
}

pub fn strategy_json(s: &DeterministicStrategy) -> Json {
    let bits = |v: &[u8]| Json::from(v.to_vec());
    match s {
        DeterministicStrategy::Nonlocal { tables } => Json::obj()
            .with("type", "nonlocal")
            .with("tables", Json::Arr(tables.iter().map(|t| bits(t)).collect())),
        DeterministicStrategy::PrepareMeasure { prep, meas } => Json::obj()
            .with("type", "prepare_measure")
            .with("prep", bits(prep))
            .with("meas", Json::Arr(meas.iter().map(|r| bits(r)).collect())),
    }
}

fn rate_json(r: &SampledRate) -> Json {
    Json::obj()
        .with("observed", r.observed)
        .with("expected", r.expected)
        .with("std_error", r.std_error)
        .with("trials", r.trials)
        .with("within_4se", r.within_4se)
}

fn bits_qualities(bits: &[u8]) -> Result<(Json, Json), CliError> {
    if bits.is_empty() {
        return Ok((Json::Null, Json::Null));
    }
    let e = entropy_report(bits)?;
    let entropy = Json::obj()
        .with("shannon", e.shannon)
        .with("min_entropy", e.min_entropy)
        .with("n_bits", e.n_bits)
        .with("zero_fraction", e.zero_fraction)
        .with("note", "empirical frequencies of the emitted bits; not the entropy of the ideal source");
    let battery = if bits.len() < BATTERY_MIN_BITS {
        Json::Null
    } else {
        Json::Arr(
            randomness_battery(bits)?
                .into_iter()
                .map(|t| {
                    Json::obj()
                        .with("name", t.name)
                        .with("statistic", t.statistic)
                        .with("p_value", t.p_value)
                        .with("passed", t.passed)
                })
                .collect(),
        )
    };
    Ok((entropy, battery))
}

fn bits_path(s: &Settings) -> Option<PathBuf> {
    s.flags.bits_out.clone().or_else(|| {
        s.flags.out.as_ref().map(|o| {
            let mut p = o.clone().into_os_string();
            p.push(".bits.txt");
            PathBuf::from(p)
        })
    })
}

fn play_game(s: &Settings) -> Result<Outcome, CliError> {
    let game = require_game(s)?;
    let name = s.flags.strategy.as_deref().unwrap_or("quantum");
    let strategy: Strategy = match name {
        "quantum" => reference_strategy(game).into(),
        "classical" => best_classical(game).strategy.into(),
        "always-zero" => DeterministicStrategy::constant_zero(game).into(),
        other => return Err(CliError::Usage(format!("unknown strategy {other:?}; use quantum, classical or always-zero"))),
    };
    let rounds = s.flags.rounds.unwrap_or(DEFAULT_PLAY_ROUNDS);
    let exact = exact_score(game, &strategy, &InputDistribution::uniform(game))?;
    let wins = play_rounds(game, &strategy, rounds, s.seed)?;
    let config = Json::obj()
        .with("game", game.cli_name())
        .with("strategy", name)
        .with("rounds", rounds);
    let freq = if rounds == 0 { f64::NAN } else { wins as f64 / rounds as f64 };
    let report = Json::obj()
        .with("manifest", manifest("play-game", s, config))
        .with(
            "exact",
            Json::obj()
                .with("kind", exact.score.kind.as_str())
                .with("value", exact.score.value)
                .with("even_win", exact.even_win)
                .with("odd_guess", exact.odd_guess),
        )
        .with(
            "sampled",
            Json::obj()
                .with("rounds", rounds)
                .with("wins", wins)
                .with("frequency", freq),
        );
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: 0,
    })
}

fn run_protocol_cmd(s: &Settings) -> Result<Outcome, CliError> {
    let protocol: ProtocolKind = parse(s.flags.protocol.as_deref(), ProtocolKind::P)?;
    let device: DeviceKind = parse(s.flags.device.as_deref(), DeviceKind::Honest)?;
    let mode: Mode = parse(s.flags.mode.as_deref(), Mode::Test)?;
    let coin = coin_scope(s.flags.coin.as_deref())?;
    let config = ProtocolConfig {
        protocol,
        rounds: s.flags.rounds.unwrap_or(DEFAULT_ROUNDS),
        seed: s.seed,
        mode,
        delta: s.flags.delta.unwrap_or(1e-6),
        gamma: s.flags.gamma.unwrap_or(0.5),
    };
    let (prep, meas) = adversarial_devices(device, protocol, coin)?;
    let run = run_protocol(&config, &prep, &meas)?;
    let bits = &run.verdict.output_bits;

    let mut cfg = Json::obj()
        .with("protocol", protocol.to_string())
        .with("device", device.cli_name())
        .with("rounds", config.rounds)
        .with("mode", mode.as_str())
        .with("delta", config.delta);
    if protocol == ProtocolKind::Q {
        cfg.push("gamma", config.gamma);
    }
    if device == DeviceKind::MixedPerfectEven {
        cfg.push("coin", coin_name(coin));
    }

    let conditions = run
        .verdict
        .conditions
        .iter()
        .map(|c| {
            let mut j = Json::obj()
                .with("name", c.name)
                .with("estimate", c.point)
                .with("ci", Json::Arr(vec![c.ci_low.into(), c.ci_high.into()]))
                .with("target", c.target)
                .with("satisfied", c.satisfied)
                .with("trials", c.trials);
            if let Some(e) = c.exceptions {
                j.push("exceptions", e);
            }
            j
        })
        .collect();
    let (entropy, battery) = bits_qualities(bits)?;
    let path = if bits.is_empty() { None } else { bits_path(s) };

    let mut notes = Json::obj();
    if let Some(k) = run.test_portion {
        notes.push("test_portion", k);
    }
    notes.push("emitted_bits", run.emitted_bits());
    notes.push("rate", run.emitted_bits() as f64 / config.rounds as f64);
    if device == DeviceKind::MixedPerfectEven {
        notes.push(
            "caveat",
            "mixture of two perfect-even deterministic strategies: the statistics can look honest while the \
             output is predictable from the shared coin; recorded as data, not as a certification claim",
        );
    }

    let mut report = Json::obj()
        .with("manifest", manifest("run-protocol", s, cfg))
        .with(
            "verdict",
            Json::obj()
                .with("decision", run.verdict.decision.as_str())
                .with("output_bits", bits.len()),
        )
        .with(
            "bins",
            Json::obj()
                .with("check", run.bins.check.len())
                .with("rand", run.bins.rand.len())
                .with("false", run.bins.false_bin.len()),
        )
        .with("conditions", Json::Arr(conditions))
        .with("entropy", entropy)
        .with("battery", battery);
    if let Some(p) = &path {
        report.push("output_bits_path", p.display().to_string());
    }
    report.push("notes", notes);

    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: path.map(|p| (p, render_bits(bits))),
        exit_code: if run.verdict.decision == Decision::Pass { 0 } else { 2 },
    })
}

fn bruteforce(s: &Settings) -> Result<Outcome, CliError> {
    if s.flags.protocol.is_some() {
        return sweep(s);
    }
    let game = require_game(s)?;
    let best = best_classical(game);
    let mut report = Json::obj()
        .with("manifest", manifest("bruteforce-classical", s, Json::obj().with("game", game.cli_name())))
        .with("kind", best.kind.as_str())
        .with("max", best.value)
        .with("evaluated", best.evaluated)
        .with("argmax", strategy_json(&best.strategy));
    if game == GameId::GameG2 {
        let frontier = g2_frontier()
            .into_iter()
            .map(|p| {
                Json::obj()
                    .with("even_win", p.even_win)
                    .with("odd_guess", p.odd_guess)
                    .with("count", p.count)
                    .with("first", strategy_json(&p.first))
            })
            .collect();
        report.push("frontier", Json::Arr(frontier));
    }
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: 0,
    })
}

/// Protocol P against all 256 one-bit classical table pairs.
fn sweep(s: &Settings) -> Result<Outcome, CliError> {
    let protocol: ProtocolKind = parse(s.flags.protocol.as_deref(), ProtocolKind::P)?;
    if protocol != ProtocolKind::P {
        return Err(CliError::Usage("the classical sweep runs protocol P only".into()));
    }
    let config = ProtocolConfig {
        delta: s.flags.delta.unwrap_or(1e-6),
        ..ProtocolConfig::new(protocol, s.flags.rounds.unwrap_or(DEFAULT_ROUNDS), s.seed)
    };
    let r = classical_sweep(&config)?;
    let entries = r
        .entries
        .iter()
        .map(|e| {
            Json::obj()
                .with("strategy", strategy_json(&e.strategy))
                .with("exact_A", e.exact_a)
                .with("A_estimate", e.a_point)
                .with("decision", e.decision.as_str())
        })
        .collect();
    let cfg = Json::obj()
        .with("protocol", "P")
        .with("rounds", config.rounds)
        .with("delta", config.delta);
    let report = Json::obj()
        .with("manifest", manifest("bruteforce-classical", s, cfg))
        .with("strategies", r.entries.len())
        .with("false_accepts", r.false_accepts)
        .with("entries", Json::Arr(entries));
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: 0,
    })
}

fn equivalence(s: &Settings) -> Result<Outcome, CliError> {
    let pairs: Vec<EquivalencePair> = match s.flags.pair.as_deref() {
        None | Some("all") => EquivalencePair::ALL.to_vec(),
        Some(p) => vec![p.parse().map_err(|e: diqrng_core::GameError| CliError::Usage(e.to_string()))?],
    };
    let reports: Vec<_> = pairs.iter().map(|&p| equivalence_check(p)).collect();
    let all_passed = reports.iter().all(|r| r.passed());
    let body = reports
        .iter()
        .map(|r| {
            let assertions = r
                .assertions
                .iter()
                .map(|a| {
                    Json::obj()
                        .with("name", a.name.as_str())
                        .with("observed", a.observed)
                        .with("expected", a.expected)
                        .with("tolerance", a.tolerance)
                        .with("passed", a.passed)
                })
                .collect();
            Json::obj()
                .with("pair", r.pair.cli_name())
                .with("passed", r.passed())
                .with("assertions", Json::Arr(assertions))
        })
        .collect();
    let cfg = Json::obj().with("pair", s.flags.pair.as_deref().unwrap_or("all"));
    let report = Json::obj()
        .with("manifest", manifest("equivalence-check", s, cfg))
        .with("passed", all_passed)
        .with("pairs", Json::Arr(body));
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: if all_passed { 0 } else { 2 },
    })
}

fn guessing(s: &Settings) -> Result<Outcome, CliError> {
    let trials = s.flags.rounds.unwrap_or(DEFAULT_ROUNDS);
    let r = guessing_game_bound_check(trials, s.seed)?;
    let report = Json::obj()
        .with("manifest", manifest("guessing-bounds", s, Json::obj().with("rounds", trials)))
        .with("augmented_chsh", rate_json(&r.augmented))
        .with("adversary_c2", rate_json(&r.adversary))
        .with("eve_label_guess", rate_json(&r.eve))
        .with("input_guesser", rate_json(&r.input_guesser))
        .with(
            "hamming",
            Json::obj()
                .with("a0_c2", r.hamming_a0_c2)
                .with("a1_c2", r.hamming_a1_c2),
        );
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: 0,
    })
}

fn analyze(s: &Settings) -> Result<Outcome, CliError> {
    let input = s.flags.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let bits = parse_bits(&text).map_err(CliError::Usage)?;
    if bits.is_empty() {
        return Err(CliError::Usage(format!("{} holds no bits", input.display())));
    }
    let (entropy, battery) = bits_qualities(&bits)?;
    let report = Json::obj()
        .with(
            "manifest",
            manifest("analyze", s, Json::obj().with("input", input.display().to_string())),
        )
        .with("entropy", entropy)
        .with("battery", battery);
    Ok(Outcome {
        report: report.render(),
        out: s.flags.out.clone(),
        bits: None,
        exit_code: 0,
    })
}

/// Resolves settings and runs one command.
pub fn execute(command: &Command, env_seed: Option<String>) -> Result<Outcome, CliError> {
    let flags = command.flags();
    let s = resolve(flags, env_seed)?;
    match command {
        Command::PlayGame(_) => play_game(&s),
        Command::RunProtocol(_) => run_protocol_cmd(&s),
        Command::BruteforceClassical(_) => bruteforce(&s),
        Command::EquivalenceCheck(_) => equivalence(&s),
        Command::GuessingBounds(_) => guessing(&s),
        Command::Analyze(_) => analyze(&s),
    }
}
