use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qcore::{apply_gates, measure, outcome_distribution, project, PureState};

use super::strategy::{ClassicalStrategy, QuantumStrategy, Setting, Strategy};
use super::{
    check_inputs, pseudo_telepathy_odd_predicate, weight, winning_predicate, GameError, GameId,
    GameResult, GameScore, RoundIo, ScoreKind,
};

/// Weights over a game's input tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    entries: Vec<(Vec<u8>, f64)>,
}

impl InputDistribution {
    /// Uniform over the game's valid inputs.
    pub fn uniform(game: GameId) -> Self {
        let inputs = game.valid_inputs();
        let w = 1.0 / inputs.len() as f64;
        Self {
            entries: inputs.into_iter().map(|x| (x, w)).collect(),
        }
    }

    pub fn new(entries: Vec<(Vec<u8>, f64)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(Vec<u8>, f64)] {
        &self.entries
    }

    fn validate(&self, game: GameId) -> GameResult<()> {
        let bad = |m: String| GameError::BadDistribution(m);
        if self.entries.is_empty() {
            return Err(bad("no inputs".into()));
        }
        let valid = game.valid_inputs();
        let mut total = 0.0;
        for (x, w) in &self.entries {
            check_inputs(game, x)?;
            if !valid.contains(x) {
                return Err(bad(format!("{x:?} is not a valid {game} input")));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(bad(format!("weight {w} for {x:?}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(bad(format!("weights sum to {total}")));
        }
        Ok(())
    }
}

/// Exact score of a strategy. For G2, `score` is the augmented score
/// `(even_win + odd_guess) / 2` and both parts are filled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactScore {
    pub score: GameScore,
    pub even_win: Option<f64>,
    pub odd_guess: Option<f64>,
}

fn entangled_branches(
    state: &PureState,
    settings: &[&Setting],
    prefix: &mut Vec<u8>,
    prob: f64,
    out: &mut Vec<(Vec<u8>, f64)>,
) -> GameResult<()> {
    let (setting, rest) = settings.split_first().expect("at least one party");
    let rotated = apply_gates(state, &setting.gates, 0)?;
    if rest.is_empty() {
        let (p0, p1) = outcome_distribution(&rotated, &setting.basis, 0)?;
        for (o, p) in [(0u8, p0), (1u8, p1)] {
            if p > 0.0 {
                prefix.push(o ^ u8::from(setting.flip));
                out.push((prefix.clone(), prob * p));
                prefix.pop();
            }
        }
        return Ok(());
    }
    for o in 0..2u8 {
        let (p, post) = project(&rotated, &setting.basis, 0, o)?;
        if let Some(post) = post {
            prefix.push(o ^ u8::from(setting.flip));
            entangled_branches(&post, rest, prefix, prob * p, out)?;
            prefix.pop();
        }
    }
    Ok(())
}

fn quantum_branches(game: GameId, q: &QuantumStrategy, inputs: &[u8]) -> GameResult<Vec<(Vec<u8>, f64)>> {
    let local = game.party_inputs(inputs);
    let mut out = Vec::with_capacity(8);
    match q {
        QuantumStrategy::Entangled { shared, parties } => {
            let chosen: Vec<&Setting> = parties.iter().zip(&local).map(|(p, &i)| &p[i]).collect();
            entangled_branches(shared, &chosen, &mut Vec::with_capacity(3), 1.0, &mut out)?;
        }
        QuantumStrategy::PrepareMeasure { preparations, settings } => {
            let setting = &settings[local[1]];
            let state = apply_gates(&preparations[local[0]], &setting.gates, 0)?;
            let (p0, p1) = outcome_distribution(&state, &setting.basis, 0)?;
            let flip = u8::from(setting.flip);
            out.push((vec![flip], p0));
            out.push((vec![1 ^ flip], p1));
        }
    }
    Ok(out)
}

fn classical_branches(game: GameId, c: &ClassicalStrategy, inputs: &[u8]) -> Vec<(Vec<u8>, f64)> {
    c.components()
        .iter()
        .map(|(w, s)| (s.respond(game, inputs), *w))
        .collect()
}

/// Every output tuple the strategy can produce on `inputs`, with its
/// probability. Odd-weight three-party inputs are accepted here; only the
/// predicate restricts them.
pub fn branch_distribution(game: GameId, strategy: &Strategy, inputs: &[u8]) -> GameResult<Vec<(Vec<u8>, f64)>> {
    check_inputs(game, inputs)?;
    strategy.check(game)?;
    match strategy {
        Strategy::Quantum(q) => quantum_branches(game, q, inputs),
        Strategy::Classical(c) => Ok(classical_branches(game, c, inputs)),
    }
}

fn win_probability(game: GameId, strategy: &Strategy, inputs: &[u8]) -> GameResult<f64> {
    let mut p = 0.0;
    for (outputs, q) in branch_distribution(game, strategy, inputs)? {
        if winning_predicate(game, &RoundIo::new(inputs, outputs))? {
            p += q;
        }
    }
    Ok(p)
}

/// Exact expected score by enumerating inputs and measurement branches.
pub fn exact_score(game: GameId, strategy: &Strategy, distribution: &InputDistribution) -> GameResult<ExactScore> {
    distribution.validate(game)?;
    strategy.check(game)?;
    if game != GameId::GameG2 {
        let mut value = 0.0;
        for (x, w) in distribution.entries() {
            if *w > 0.0 {
                value += w * win_probability(game, strategy, x)?;
            }
        }
        let kind = if game == GameId::Tavakoli {
            ScoreKind::StatisticA
        } else {
            ScoreKind::WinProbability
        };
        return Ok(ExactScore {
            score: GameScore { value, kind },
            even_win: None,
            odd_guess: None,
        });
    }

    let (mut even, mut even_mass, mut odd, mut odd_mass) = (0.0, 0.0, 0.0, 0.0);
    for (x, w) in distribution.entries() {
        if *w == 0.0 {
            continue;
        }
        let p = win_probability(game, strategy, x)?;
        if weight(x) % 2 == 0 {
            even += w * p;
            even_mass += w;
        } else {
            odd += w * p;
            odd_mass += w;
        }
    }
    if even_mass == 0.0 || odd_mass == 0.0 {
        return Err(GameError::BadDistribution(
            "G2 scoring needs both even- and odd-weight input mass".into(),
        ));
    }
    let (even_win, odd_guess) = (even / even_mass, odd / odd_mass);
    Ok(ExactScore {
        score: GameScore {
            value: 0.5 * even_win + 0.5 * odd_guess,
            kind: ScoreKind::Augmented,
        },
        even_win: Some(even_win),
        odd_guess: Some(odd_guess),
    })
}

/// `Pr[y2 = x1]` for the three-party game played on the four odd-weight
/// inputs, uniformly weighted.
pub fn pseudo_telepathy_odd_score(strategy: &Strategy) -> GameResult<f64> {
    let game = GameId::PseudoTelepathy3;
    let odd: Vec<Vec<u8>> = (0..8u8)
        .map(|c| vec![c >> 2 & 1, c >> 1 & 1, c & 1])
        .filter(|x| weight(x) % 2 == 1)
        .collect();
    let mut total = 0.0;
    for x in &odd {
        for (outputs, p) in branch_distribution(game, strategy, x)? {
            if pseudo_telepathy_odd_predicate(&RoundIo::new(x.clone(), outputs))? {
                total += p;
            }
        }
    }
    Ok(total / odd.len() as f64)
}

fn sample_entangled<R: Rng + ?Sized>(
    shared: &PureState,
    settings: &[&Setting],
    rng: &mut R,
) -> GameResult<Vec<u8>> {
    let mut state = *shared;
    let mut bits = Vec::with_capacity(settings.len());
    for s in settings {
        let rotated = apply_gates(&state, &s.gates, 0)?;
        let r = measure(&rotated, &s.basis, 0, rng.gen())?;
        bits.push(r.outcome ^ u8::from(s.flip));
        state = r.collapsed;
    }
    Ok(bits)
}

/// Plays one round, drawing measurement outcomes and mixture components from `rng`.
pub fn sample_round<R: Rng + ?Sized>(
    game: GameId,
    strategy: &Strategy,
    inputs: &[u8],
    rng: &mut R,
) -> GameResult<RoundIo> {
    check_inputs(game, inputs)?;
    strategy.check(game)?;
    let local = game.party_inputs(inputs);
    let outputs = match strategy {
        Strategy::Quantum(QuantumStrategy::Entangled { shared, parties }) => {
            let chosen: Vec<&Setting> = parties.iter().zip(&local).map(|(p, &i)| &p[i]).collect();
            sample_entangled(shared, &chosen, rng)?
        }
        Strategy::Quantum(QuantumStrategy::PrepareMeasure { preparations, settings }) => {
            let s = &settings[local[1]];
            let state = apply_gates(&preparations[local[0]], &s.gates, 0)?;
            let r = measure(&state, &s.basis, 0, rng.gen())?;
            vec![r.outcome ^ u8::from(s.flip)]
        }
        Strategy::Classical(c) => {
            let comps = c.components();
            let chosen = if comps.len() == 1 {
                &comps[0].1
            } else {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                comps
                    .iter()
                    .find(|(w, _)| {
                        acc += w;
                        u < acc
                    })
                    .map(|(_, s)| s)
                    .unwrap_or(&comps[comps.len() - 1].1)
            };
            chosen.respond(game, inputs)
        }
    };
    Ok(RoundIo::new(inputs, outputs))
}

/// Plays `rounds` rounds on uniformly drawn valid inputs from a seeded
/// stream and returns the number won.
pub fn play_rounds(game: GameId, strategy: &Strategy, rounds: u64, seed: u64) -> GameResult<u64> {
    strategy.check(game)?;
    let inputs = game.valid_inputs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0;
    for _ in 0..rounds {
        let x = &inputs[rng.gen_range(0..inputs.len())];
        let io = sample_round(game, strategy, x, &mut rng)?;
        wins += u64::from(winning_predicate(game, &io)?);
    }
    Ok(wins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{reference_strategy, DeterministicStrategy};
    use std::f64::consts::FRAC_1_SQRT_2;

    const CHSH_QUANTUM: f64 = 0.5 * (1.0 + FRAC_1_SQRT_2);

    fn quantum(game: GameId) -> Strategy {
        reference_strategy(game).into()
    }

    #[test]
    fn quantum_values() {
        for g in [GameId::Chsh, GameId::Chsh1, GameId::GameG, GameId::Tavakoli] {
            let s = exact_score(g, &quantum(g), &InputDistribution::uniform(g)).unwrap();
            assert!((s.score.value - CHSH_QUANTUM).abs() < 1e-12, "{g}: {}", s.score.value);
        }
        let tav = exact_score(GameId::Tavakoli, &quantum(GameId::Tavakoli), &InputDistribution::uniform(GameId::Tavakoli)).unwrap();
        assert_eq!(tav.score.kind, ScoreKind::StatisticA);

        let pt = exact_score(
            GameId::PseudoTelepathy3,
            &quantum(GameId::PseudoTelepathy3),
            &InputDistribution::uniform(GameId::PseudoTelepathy3),
        )
        .unwrap();
        assert!((pt.score.value - 1.0).abs() < 1e-12);

        let g2 = exact_score(GameId::GameG2, &quantum(GameId::GameG2), &InputDistribution::uniform(GameId::GameG2)).unwrap();
        assert!((g2.even_win.unwrap() - 1.0).abs() < 1e-12);
        assert!((g2.odd_guess.unwrap() - 0.5).abs() < 1e-12);
        assert!((g2.score.value - 0.75).abs() < 1e-12);
        assert_eq!(g2.score.kind, ScoreKind::Augmented);
    }

    /// Per-cell entries of the CHSH joint table: (1 +- 1/sqrt2)/4.
    #[test]
    fn chsh_joint_table() {
        let hi = 0.25 * (1.0 + FRAC_1_SQRT_2);
        let lo = 0.25 * (1.0 - FRAC_1_SQRT_2);
        for x in 0..2u8 {
            for y in 0..2u8 {
                let branches = branch_distribution(GameId::Chsh, &quantum(GameId::Chsh), &[x, y]).unwrap();
                assert_eq!(branches.len(), 4);
                for (ab, p) in branches {
                    let wins = (x & y) == (ab[0] ^ ab[1]);
                    let want = if wins { hi } else { lo };
                    assert!((p - want).abs() < 1e-12, "({x},{y}) {ab:?} {p}");
                }
            }
        }
    }

    #[test]
    fn every_g2_even_branch_wins() {
        for x in GameId::GameG2.valid_inputs().into_iter().filter(|x| weight(x) % 2 == 0) {
            let p = win_probability(GameId::GameG2, &quantum(GameId::GameG2), &x).unwrap();
            assert!((p - 1.0).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn cheat_scores() {
        let fwd: Strategy = DeterministicStrategy::x1_forwarder().into();
        let s = exact_score(GameId::GameG2, &fwd, &InputDistribution::uniform(GameId::GameG2)).unwrap();
        assert_eq!((s.even_win.unwrap(), s.odd_guess.unwrap()), (1.0, 1.0));
    }

    #[test]
    fn pt_odd_extension_is_half() {
        let p = pseudo_telepathy_odd_score(&quantum(GameId::PseudoTelepathy3)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distribution_errors() {
        let g = GameId::Chsh;
        let s = quantum(g);
        let bad = InputDistribution::new(vec![(vec![0, 0], 0.5)]);
        assert!(matches!(exact_score(g, &s, &bad), Err(GameError::BadDistribution(_))));
        let odd_pt = InputDistribution::new(vec![(vec![1, 0, 0], 1.0)]);
        assert!(exact_score(GameId::PseudoTelepathy3, &quantum(GameId::PseudoTelepathy3), &odd_pt).is_err());
        let wrong_arity = InputDistribution::new(vec![(vec![0, 0, 0], 1.0)]);
        assert!(matches!(exact_score(g, &s, &wrong_arity), Err(GameError::ArityMismatch { .. })));
        let only_even = InputDistribution::new(vec![(vec![0, 0, 0], 1.0)]);
        assert!(exact_score(GameId::GameG2, &quantum(GameId::GameG2), &only_even).is_err());
    }

    #[test]
    fn non_uniform_distribution() {
        // all mass on (1,1): the quantum strategy still wins with (1 + 1/sqrt2)/2
        let d = InputDistribution::new(vec![(vec![1, 1], 1.0)]);
        let s = exact_score(GameId::Chsh, &quantum(GameId::Chsh), &d).unwrap();
        assert!((s.score.value - CHSH_QUANTUM).abs() < 1e-12);
        let zero: Strategy = DeterministicStrategy::constant_zero(GameId::Chsh).into();
        assert_eq!(exact_score(GameId::Chsh, &zero, &d).unwrap().score.value, 0.0);
    }

    #[test]
    fn ghz_samples_always_satisfy_parity() {
        let s = quantum(GameId::PseudoTelepathy3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for x in GameId::PseudoTelepathy3.valid_inputs() {
            for _ in 0..2000 {
                let io = sample_round(GameId::PseudoTelepathy3, &s, &x, &mut rng).unwrap();
                assert_eq!(weight(&io.outputs) % 2, (weight(&x) / 2) % 2);
            }
        }
    }

    #[test]
    fn tavakoli_first_cell_frequency() {
        let s = quantum(GameId::Tavakoli);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_round(GameId::Tavakoli, &s, &[0, 0, 0], &mut rng).unwrap().outputs[0] == 0)
            .count();
        let f = zeros as f64 / n as f64;
        assert!((f - 0.8536).abs() < 0.01, "{f}");
    }

    #[test]
    fn classical_sample_is_table_lookup() {
        let s: Strategy = DeterministicStrategy::constant_zero(GameId::Chsh).into();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let io = sample_round(GameId::Chsh, &s, &[1, 1], &mut rng).unwrap();
        assert_eq!(io.outputs, vec![0, 0]);
        assert!(!winning_predicate(GameId::Chsh, &io).unwrap());
        assert!(sample_round(GameId::Chsh, &s, &[1], &mut rng).is_err());
    }

    #[test]
    fn seeded_play_is_reproducible() {
        let s = quantum(GameId::GameG);
        let a = play_rounds(GameId::GameG, &s, 5000, 1).unwrap();
        assert_eq!(a, play_rounds(GameId::GameG, &s, 5000, 1).unwrap());
        assert!((a as f64 / 5000.0 - CHSH_QUANTUM).abs() < 0.03);
        assert_eq!(play_rounds(GameId::PseudoTelepathy3, &quantum(GameId::PseudoTelepathy3), 500, 2).unwrap(), 500);
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let s = quantum(GameId::Chsh);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|i| sample_round(GameId::Chsh, &s, &[i & 1, (i >> 1) & 1], &mut rng).unwrap().outputs)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }
}
