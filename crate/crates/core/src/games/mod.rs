//! The nonlocal and prepare-and-measure games: predicates, strategies, exact
//! scoring, sampling and exhaustive classical search.
//!
//! Input and output conventions (all bits):
//!
//! | game      | inputs         | outputs        |
//! |-----------|----------------|----------------|
//! | CHSH      | `(x, y)`       | `(a, b)`       |
//! | CHSH1     | `(x, y)`       | `(a, b)`       |
//! | G         | `(x0, x1, y)`  | `(a, b)`       |
//! | Tavakoli  | `(x0, x1, y)`  | `(b)`          |
//! | PT3       | `(x0, x1, x2)` | `(y0, y1, y2)` |
//! | G2        | `(x0, x1, x2)` | `(b)`          |

mod classical;
mod equivalence;
mod score;
mod strategy;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::qcore::QError;

pub(crate) use classical::enumerate as enumerate_deterministic;
pub use classical::{best_classical, g2_frontier, perfect_even_families, ClassicalOptimum, FrontierPoint};
pub use equivalence::{equivalence_check, Assertion, EquivalencePair, EquivalenceReport};
pub use score::{
    branch_distribution, exact_score, play_rounds, pseudo_telepathy_odd_score, sample_round, ExactScore,
    InputDistribution,
};
pub use strategy::{
    reference_strategy, ClassicalStrategy, DeterministicStrategy, QuantumStrategy, Setting, Strategy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("{game}: expected {expected} {what}, got {got}")]
    ArityMismatch {
        game: GameId,
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    BadInput(String),
    #[error("bad input distribution: {0}")]
    BadDistribution(String),
    #[error("strategy does not fit {game}: {reason}")]
    StrategyMismatch { game: GameId, reason: String },
    #[error(transparent)]
    Quantum(#[from] QError),
}

pub type GameResult<T> = Result<T, GameError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameId {
    Chsh,
    Chsh1,
    GameG,
    Tavakoli,
    PseudoTelepathy3,
    GameG2,
}

impl GameId {
    pub const ALL: [GameId; 6] = [
        GameId::Chsh,
        GameId::Chsh1,
        GameId::GameG,
        GameId::Tavakoli,
        GameId::PseudoTelepathy3,
        GameId::GameG2,
    ];

    pub fn input_arity(self) -> usize {
        match self {
            GameId::Chsh | GameId::Chsh1 => 2,
            _ => 3,
        }
    }

    pub fn output_arity(self) -> usize {
        match self {
            GameId::Chsh | GameId::Chsh1 | GameId::GameG => 2,
            GameId::Tavakoli | GameId::GameG2 => 1,
            GameId::PseudoTelepathy3 => 3,
        }
    }

    /// One preparation device sending a single carrier to one measurement device.
    pub fn is_prepare_measure(self) -> bool {
        matches!(self, GameId::Tavakoli | GameId::GameG2)
    }

    /// Local input domain size of each party of an entangled game.
    pub(crate) fn party_domains(self) -> &'static [usize] {
        match self {
            GameId::Chsh | GameId::Chsh1 => &[2, 2],
            GameId::GameG => &[4, 2],
            GameId::PseudoTelepathy3 => &[2, 2, 2],
            GameId::Tavakoli | GameId::GameG2 => &[],
        }
    }

    /// Maps a full input tuple to each party's local input index.
    pub(crate) fn party_inputs(self, inputs: &[u8]) -> Vec<usize> {
        match self {
            GameId::Chsh | GameId::Chsh1 => vec![inputs[0] as usize, inputs[1] as usize],
            GameId::GameG => vec![(2 * inputs[0] + inputs[1]) as usize, inputs[2] as usize],
            GameId::PseudoTelepathy3 => inputs.iter().map(|&x| x as usize).collect(),
            GameId::Tavakoli | GameId::GameG2 => {
                vec![(2 * inputs[0] + inputs[1]) as usize, inputs[2] as usize]
            }
        }
    }

    /// Every input tuple the game accepts, in lexicographic order.
    pub fn valid_inputs(self) -> Vec<Vec<u8>> {
        let arity = self.input_arity();
        (0..1u8 << arity)
            .map(|code| (0..arity).map(|i| (code >> (arity - 1 - i)) & 1).collect::<Vec<u8>>())
            .filter(|bits| self != GameId::PseudoTelepathy3 || weight(bits) % 2 == 0)
            .collect()
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            GameId::Chsh => "chsh",
            GameId::Chsh1 => "chsh1",
            GameId::GameG => "g",
            GameId::Tavakoli => "tavakoli",
            GameId::PseudoTelepathy3 => "pt3",
            GameId::GameG2 => "g2",
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GameId::Chsh => "CHSH",
            GameId::Chsh1 => "CHSH1",
            GameId::GameG => "G",
            GameId::Tavakoli => "Tavakoli",
            GameId::PseudoTelepathy3 => "PT3",
            GameId::GameG2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for GameId {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GameId::ALL
            .into_iter()
            .find(|g| g.cli_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GameError::BadInput(format!("unknown game {s:?}")))
    }
}

/// One round's inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoundIo {
    pub inputs: Vec<u8>,
    pub outputs: Vec<u8>,
}

impl RoundIo {
    pub fn new(inputs: impl Into<Vec<u8>>, outputs: impl Into<Vec<u8>>) -> Self {
        Self {
            inputs: inputs.into(),
            outputs: outputs.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    WinProbability,
    StatisticA,
    EvenWin,
    OddGuess,
    Augmented,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::WinProbability => "win_probability",
            ScoreKind::StatisticA => "statistic_A",
            ScoreKind::EvenWin => "even_win",
            ScoreKind::OddGuess => "odd_guess",
            ScoreKind::Augmented => "augmented",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameScore {
    pub value: f64,
    pub kind: ScoreKind,
}

pub(crate) fn weight(bits: &[u8]) -> u32 {
    bits.iter().map(|&b| b as u32).sum()
}

fn check_bits(game: GameId, what: &'static str, bits: &[u8], expected: usize) -> GameResult<()> {
    if bits.len() != expected {
        return Err(GameError::ArityMismatch {
            game,
            what,
            expected,
            got: bits.len(),
        });
    }
    if let Some(bad) = bits.iter().find(|&&b| b > 1) {
        return Err(GameError::BadInput(format!("{what} value {bad} is not a bit")));
    }
    Ok(())
}

pub(crate) fn check_inputs(game: GameId, inputs: &[u8]) -> GameResult<()> {
    check_bits(game, "inputs", inputs, game.input_arity())
}

/// The n-party GHZ parity game: inputs must have even weight, and the players
/// win iff `sum(y) = sum(x)/2 (mod 2)`.
pub fn pseudo_telepathy_wins(xs: &[u8], ys: &[u8]) -> GameResult<bool> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(GameError::BadInput(format!(
            "pseudo-telepathy needs n >= 3 inputs and outputs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let wx = weight(xs);
    if wx % 2 != 0 {
        return Err(GameError::BadInput(format!(
            "pseudo-telepathy input {xs:?} has odd weight"
        )));
    }
    Ok(weight(ys) % 2 == (wx / 2) % 2)
}

/// Odd-weight extension of the three-party game: the check is `y2 = x1`.
pub fn pseudo_telepathy_odd_predicate(io: &RoundIo) -> GameResult<bool> {
    let game = GameId::PseudoTelepathy3;
    check_inputs(game, &io.inputs)?;
    check_bits(game, "outputs", &io.outputs, 3)?;
    if weight(&io.inputs) % 2 != 1 {
        return Err(GameError::BadInput("odd-weight extension needs odd-weight input".into()));
    }
    Ok(io.outputs[2] == io.inputs[1])
}

/// Whether a round with the given IO wins `game`.
pub fn winning_predicate(game: GameId, io: &RoundIo) -> GameResult<bool> {
    check_inputs(game, &io.inputs)?;
    check_bits(game, "outputs", &io.outputs, game.output_arity())?;
    let x = &io.inputs;
    let o = &io.outputs;
    Ok(match game {
        GameId::Chsh | GameId::Chsh1 => (x[0] & x[1]) == (o[0] ^ o[1]),
        GameId::GameG => ((x[0] ^ x[1]) & x[2]) == (o[0] ^ o[1]),
        GameId::Tavakoli => o[0] == x[x[2] as usize],
        GameId::PseudoTelepathy3 => pseudo_telepathy_wins(x, o)?,
        GameId::GameG2 => g2_wins(x[0], x[1], x[2], o[0]),
    })
}

/// G2: on even weight `(x0+x1+x2)/2 = b + (x0 AND (x0 XOR x1))` over the
/// integers, on odd weight `b = x1`.
pub(crate) fn g2_wins(x0: u8, x1: u8, x2: u8, b: u8) -> bool {
    let w = x0 + x1 + x2;
    if w % 2 == 0 {
        w / 2 == b + (x0 & (x0 ^ x1))
    } else {
        b == x1
    }
}
