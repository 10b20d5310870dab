use super::strategy::DeterministicStrategy;
use super::{g2_wins, winning_predicate, weight, GameId, RoundIo, ScoreKind};

/// Result of an exhaustive search over deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOptimum {
    pub value: f64,
    pub kind: ScoreKind,
    /// Lexicographically smallest maximizer.
    pub strategy: DeterministicStrategy,
    pub evaluated: usize,
}

/// One distinct `(even_win, odd_guess)` pair reached by deterministic G2
/// strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub even_win: f64,
    pub odd_guess: f64,
    pub count: usize,
    pub first: DeterministicStrategy,
}

fn bits_of(code: u32, width: usize) -> impl Iterator<Item = u8> {
    (0..width).map(move |i| ((code >> (width - 1 - i)) & 1) as u8)
}

/// Every deterministic strategy for `game`, in lexicographic table order.
pub(crate) fn enumerate(game: GameId) -> Vec<DeterministicStrategy> {
    if game.is_prepare_measure() {
        return (0..256u32)
            .map(|code| {
                let b: Vec<u8> = bits_of(code, 8).collect();
                DeterministicStrategy::PrepareMeasure {
                    prep: [b[0], b[1], b[2], b[3]],
                    meas: [[b[4], b[5]], [b[6], b[7]]],
                }
            })
            .collect();
    }
    let domains = game.party_domains();
    let width: usize = domains.iter().sum();
    (0..1u32 << width)
        .map(|code| {
            let mut it = bits_of(code, width);
            let tables = domains.iter().map(|&d| it.by_ref().take(d).collect()).collect();
            DeterministicStrategy::Nonlocal { tables }
        })
        .collect()
}

/// Winning-input counts over the uniform valid input set. For G2 returns
/// `(even wins, odd wins)`; otherwise `(wins, 0)`.
fn win_counts(game: GameId, s: &DeterministicStrategy) -> (u32, u32) {
    let mut counts = (0, 0);
    for x in game.valid_inputs() {
        let out = s.respond(game, &x);
        if game == GameId::GameG2 {
            if g2_wins(x[0], x[1], x[2], out[0]) {
                if weight(&x) % 2 == 0 {
                    counts.0 += 1;
                } else {
                    counts.1 += 1;
                }
            }
        } else if winning_predicate(game, &RoundIo::new(x, out)).expect("enumerated IO is well formed") {
            counts.0 += 1;
        }
    }
    counts
}

/// Exhaustive maximum over deterministic strategies with uniform inputs.
/// For G2 the score maximized is the augmented `(even_win + odd_guess) / 2`.
pub fn best_classical(game: GameId) -> ClassicalOptimum {
    let n_inputs = game.valid_inputs().len() as f64;
    let all = enumerate(game);
    let evaluated = all.len();
    // compare integer counts so ties are exact
    let mut best: Option<(u32, DeterministicStrategy)> = None;
    for s in all {
        let (a, b) = win_counts(game, &s);
        let c = a + b;
        if best.as_ref().is_none_or(|(bc, _)| c > *bc) {
            best = Some((c, s));
        }
    }
    let (count, strategy) = best.expect("at least one strategy");
    let kind = match game {
        GameId::Tavakoli => ScoreKind::StatisticA,
        GameId::GameG2 => ScoreKind::Augmented,
        _ => ScoreKind::WinProbability,
    };
    ClassicalOptimum {
        // for G2 both halves have four inputs, so the augmented score is count / 8
        value: count as f64 / n_inputs,
        kind,
        strategy,
        evaluated,
    }
}

/// Distinct `(even_win, odd_guess)` pairs over all 256 deterministic G2
/// strategies, sorted by the pair.
pub fn g2_frontier() -> Vec<FrontierPoint> {
    let mut points: Vec<((u32, u32), usize, DeterministicStrategy)> = Vec::new();
    for s in enumerate(GameId::GameG2) {
        let c = win_counts(GameId::GameG2, &s);
        match points.iter_mut().find(|(k, _, _)| *k == c) {
            Some(p) => p.1 += 1,
            None => points.push((c, 1, s)),
        }
    }
    points.sort_by_key(|(k, _, _)| *k);
    points
        .into_iter()
        .map(|((e, o), count, first)| FrontierPoint {
            even_win: e as f64 / 4.0,
            odd_guess: o as f64 / 4.0,
            count,
            first,
        })
        .collect()
}

/// The two deterministic G2 strategies that win every even-weight input:
/// the `x1` forwarder (odd_guess 1) and `m = x0, b = m XOR x2` (odd_guess 0).
pub fn perfect_even_families() -> [DeterministicStrategy; 2] {
    [
        DeterministicStrategy::x1_forwarder(),
        DeterministicStrategy::PrepareMeasure {
            prep: [0, 0, 1, 1],
            meas: [[0, 1], [1, 0]],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{exact_score, ClassicalStrategy, InputDistribution, Strategy};

    #[test]
    fn enumeration_sizes() {
        let sizes: Vec<usize> = GameId::ALL.iter().map(|&g| enumerate(g).len()).collect();
        assert_eq!(sizes, vec![16, 16, 64, 256, 64, 256]);
        for g in GameId::ALL {
            let all = enumerate(g);
            assert!(all.windows(2).all(|w| w[0] < w[1]), "{g} not sorted");
        }
    }

    #[test]
    fn classical_maxima() {
        for g in [GameId::Chsh, GameId::Chsh1, GameId::GameG, GameId::PseudoTelepathy3, GameId::Tavakoli] {
            let best = best_classical(g);
            assert_eq!(best.value, 0.75, "{g}");
        }
        let g2 = best_classical(GameId::GameG2);
        assert_eq!(g2.value, 1.0);
        assert_eq!(g2.strategy, DeterministicStrategy::x1_forwarder());
    }

    #[test]
    fn argmax_achieves_value() {
        for g in GameId::ALL {
            let best = best_classical(g);
            let s: Strategy = best.strategy.clone().into();
            let exact = exact_score(g, &s, &InputDistribution::uniform(g)).unwrap();
            assert!((exact.score.value - best.value).abs() < 1e-12, "{g}");
        }
    }

    /// Brute force over games as a plain loop over every (strategy, input)
    /// with the predicate written out longhand.
    #[test]
    fn chsh_by_hand() {
        let mut best = 0;
        for a0 in 0..2u8 {
            for a1 in 0..2u8 {
                for b0 in 0..2u8 {
                    for b1 in 0..2u8 {
                        let wins = (0..4)
                            .filter(|&i| {
                                let (x, y) = (i >> 1, i & 1);
                                let a = if x == 0 { a0 } else { a1 };
                                let b = if y == 0 { b0 } else { b1 };
                                (x & y) as u8 == a ^ b
                            })
                            .count();
                        best = best.max(wins);
                    }
                }
            }
        }
        assert_eq!(best_classical(GameId::Chsh).value, best as f64 / 4.0);
    }

    #[test]
    fn g2_frontier_shape() {
        let frontier = g2_frontier();
        assert_eq!(frontier.iter().map(|p| p.count).sum::<usize>(), 256);
        let perfect: Vec<&FrontierPoint> = frontier.iter().filter(|p| p.even_win == 1.0).collect();
        let odd: Vec<f64> = perfect.iter().map(|p| p.odd_guess).collect();
        assert_eq!(odd, vec![0.0, 1.0]);
        assert!(frontier.iter().all(|p| !(p.even_win == 1.0 && p.odd_guess == 0.5)));
        let [a, b] = perfect_even_families();
        assert_eq!(perfect[1].first, a);
        assert_eq!(perfect[0].first, b);
    }

    #[test]
    fn perfect_even_mixture_is_half_on_odd() {
        let [a, b] = perfect_even_families();
        let mix: Strategy = ClassicalStrategy::mixture(vec![(0.5, a), (0.5, b)]).unwrap().into();
        let s = exact_score(GameId::GameG2, &mix, &InputDistribution::uniform(GameId::GameG2)).unwrap();
        assert_eq!(s.even_win, Some(1.0));
        assert_eq!(s.odd_guess, Some(0.5));
    }
}
