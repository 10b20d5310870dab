use crate::qcore::{Gate1Q, PureState, QubitBasis};

use super::{GameError, GameId, GameResult};

/// What a party does for one local input: gates (first acts first), then a
/// projective measurement; the reported bit is `outcome XOR flip`.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub gates: Vec<Gate1Q>,
    pub basis: QubitBasis,
    pub flip: bool,
}

impl Setting {
    pub fn measure(basis: QubitBasis) -> Self {
        Self { gates: Vec::new(), basis, flip: false }
    }

    pub fn measure_flipped(basis: QubitBasis) -> Self {
        Self { gates: Vec::new(), basis, flip: true }
    }

    pub fn gated(gates: Vec<Gate1Q>, basis: QubitBasis) -> Self {
        Self { gates, basis, flip: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumStrategy {
    /// Parties share `shared`; party `k` owns qubit `k` and picks
    /// `parties[k][local_input]`.
    Entangled {
        shared: PureState,
        parties: Vec<Vec<Setting>>,
    },
    /// `preparations[2*x0 + x1]` is sent; the measurer applies `settings[s]`.
    PrepareMeasure {
        preparations: [PureState; 4],
        settings: Vec<Setting>,
    },
}

impl QuantumStrategy {
    pub(crate) fn check(&self, game: GameId) -> GameResult<()> {
        let mismatch = |reason: String| GameError::StrategyMismatch { game, reason };
        match self {
            QuantumStrategy::Entangled { shared, parties } => {
                if game.is_prepare_measure() {
                    return Err(mismatch("entangled strategy for a prepare-and-measure game".into()));
                }
                let domains = game.party_domains();
                if parties.len() != domains.len() || shared.num_qubits() != domains.len() {
                    return Err(mismatch(format!(
                        "{} parties on {} qubits, game has {} parties",
                        parties.len(),
                        shared.num_qubits(),
                        domains.len()
                    )));
                }
                for (k, (rules, &d)) in parties.iter().zip(domains).enumerate() {
                    if rules.len() != d {
                        return Err(mismatch(format!("party {k} has {} settings, needs {d}", rules.len())));
                    }
                }
            }
            QuantumStrategy::PrepareMeasure { preparations, settings } => {
                if !game.is_prepare_measure() {
                    return Err(mismatch("prepare-and-measure strategy for an entangled game".into()));
                }
                if preparations.iter().any(|p| p.num_qubits() != 1) {
                    return Err(mismatch("preparations must be single-qubit".into()));
                }
                if settings.len() != 2 {
                    return Err(mismatch(format!("{} measurement settings, needs 2", settings.len())));
                }
            }
        }
        Ok(())
    }
}

/// A deterministic classical strategy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeterministicStrategy {
    /// `tables[party][local_input]` is that party's output bit.
    Nonlocal { tables: Vec<Vec<u8>> },
    /// One classical bit `m = prep[2*x0 + x1]` is sent; the output is
    /// `meas[m][setting]`.
    PrepareMeasure { prep: [u8; 4], meas: [[u8; 2]; 2] },
}

impl DeterministicStrategy {
    /// The strategy where every party (or the measurer) always outputs 0.
    pub fn constant_zero(game: GameId) -> Self {
        if game.is_prepare_measure() {
            DeterministicStrategy::PrepareMeasure { prep: [0; 4], meas: [[0; 2]; 2] }
        } else {
            DeterministicStrategy::Nonlocal {
                tables: game.party_domains().iter().map(|&d| vec![0; d]).collect(),
            }
        }
    }

    /// Prepare `|x1>` (here: send `x1`) and read it back for every setting.
    pub fn x1_forwarder() -> Self {
        DeterministicStrategy::PrepareMeasure {
            prep: [0, 1, 0, 1],
            meas: [[0, 0], [1, 1]],
        }
    }

    pub(crate) fn check(&self, game: GameId) -> GameResult<()> {
        let mismatch = |reason: &str| GameError::StrategyMismatch {
            game,
            reason: reason.to_string(),
        };
        match self {
            DeterministicStrategy::Nonlocal { tables } => {
                let domains = game.party_domains();
                if game.is_prepare_measure() || tables.len() != domains.len() {
                    return Err(mismatch("party count does not match"));
                }
                for (t, &d) in tables.iter().zip(domains) {
                    if t.len() != d || t.iter().any(|&b| b > 1) {
                        return Err(mismatch("response table is not total over the party's inputs"));
                    }
                }
            }
            DeterministicStrategy::PrepareMeasure { prep, meas } => {
                if !game.is_prepare_measure() {
                    return Err(mismatch("prepare-and-measure table for an entangled game"));
                }
                if prep.iter().chain(meas.iter().flatten()).any(|&b| b > 1) {
                    return Err(mismatch("table entries must be bits"));
                }
            }
        }
        Ok(())
    }

    /// Outputs for a validated input tuple.
    pub fn respond(&self, game: GameId, inputs: &[u8]) -> Vec<u8> {
        let local = game.party_inputs(inputs);
        match self {
            DeterministicStrategy::Nonlocal { tables } => {
                tables.iter().zip(&local).map(|(t, &i)| t[i]).collect()
            }
            DeterministicStrategy::PrepareMeasure { prep, meas } => {
                vec![meas[prep[local[0]] as usize][local[1]]]
            }
        }
    }
}

/// Shared-randomness mixture of deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStrategy {
    components: Vec<(f64, DeterministicStrategy)>,
}

impl ClassicalStrategy {
    pub fn deterministic(strategy: DeterministicStrategy) -> Self {
        Self { components: vec![(1.0, strategy)] }
    }

    /// Weights must be non-negative and sum to 1 within 1e-12.
    pub fn mixture(components: Vec<(f64, DeterministicStrategy)>) -> GameResult<Self> {
        if components.is_empty() {
            return Err(GameError::BadDistribution("empty mixture".into()));
        }
        if components.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(GameError::BadDistribution("negative or non-finite mixture weight".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GameError::BadDistribution(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    /// Builds a mixture from arbitrary positive weights by renormalizing them.
    pub fn from_unnormalized(components: Vec<(f64, DeterministicStrategy)>) -> GameResult<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(GameError::BadDistribution(format!("weights sum to {total}")));
        }
        Self::mixture(components.into_iter().map(|(w, s)| (w / total, s)).collect())
    }

    pub fn components(&self) -> &[(f64, DeterministicStrategy)] {
        &self.components
    }

    pub(crate) fn check(&self, game: GameId) -> GameResult<()> {
        self.components.iter().try_for_each(|(_, s)| s.check(game))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Classical(ClassicalStrategy),
    Quantum(QuantumStrategy),
}

impl Strategy {
    pub(crate) fn check(&self, game: GameId) -> GameResult<()> {
        match self {
            Strategy::Classical(c) => c.check(game),
            Strategy::Quantum(q) => q.check(game),
        }
    }
}

impl From<ClassicalStrategy> for Strategy {
    fn from(s: ClassicalStrategy) -> Self {
        Strategy::Classical(s)
    }
}

impl From<DeterministicStrategy> for Strategy {
    fn from(s: DeterministicStrategy) -> Self {
        Strategy::Classical(ClassicalStrategy::deterministic(s))
    }
}

impl From<QuantumStrategy> for Strategy {
    fn from(s: QuantumStrategy) -> Self {
        Strategy::Quantum(s)
    }
}

/// The published quantum strategy for each game.
pub fn reference_strategy(game: GameId) -> QuantumStrategy {
    let comp = QubitBasis::computational;
    let had = QubitBasis::hadamard;
    let h_then_measure = || Setting::gated(vec![Gate1Q::hadamard()], comp());
    let sh_then_measure = || Setting::gated(vec![Gate1Q::phase_s(), Gate1Q::hadamard()], comp());
    match game {
        // Bob reports 0 on |psi> or |phi_perp>.
        GameId::Chsh => QuantumStrategy::Entangled {
            shared: PureState::bell(),
            parties: vec![
                vec![Setting::measure(comp()), Setting::measure(had())],
                vec![
                    Setting::measure(QubitBasis::psi()),
                    Setting::measure_flipped(QubitBasis::phi()),
                ],
            ],
        },
        GameId::Chsh1 => QuantumStrategy::Entangled {
            shared: PureState::bell(),
            parties: vec![
                vec![Setting::measure(had()), Setting::measure(comp())],
                vec![Setting::measure(QubitBasis::psi()), Setting::measure(QubitBasis::phi())],
            ],
        },
        // Alice's local input is 2*x0 + x1; she measures by the parity x0 XOR x1.
        GameId::GameG => QuantumStrategy::Entangled {
            shared: PureState::bell(),
            parties: vec![
                vec![
                    Setting::measure(had()),
                    Setting::measure(comp()),
                    Setting::measure(comp()),
                    Setting::measure(had()),
                ],
                vec![Setting::measure(QubitBasis::psi()), Setting::measure(QubitBasis::phi())],
            ],
        },
        GameId::Tavakoli => QuantumStrategy::PrepareMeasure {
            preparations: [PureState::plus(), PureState::zero(), PureState::one(), PureState::minus()],
            settings: vec![Setting::measure(QubitBasis::psi()), Setting::measure(QubitBasis::phi())],
        },
        GameId::PseudoTelepathy3 => QuantumStrategy::Entangled {
            shared: PureState::ghz3(),
            parties: (0..3).map(|_| vec![h_then_measure(), sh_then_measure()]).collect(),
        },
        GameId::GameG2 => QuantumStrategy::PrepareMeasure {
            preparations: [
                PureState::plus(),
                PureState::plus_i(),
                PureState::minus_i(),
                PureState::minus(),
            ],
            settings: vec![h_then_measure(), sh_then_measure()],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_strategies_fit_their_games() {
        for g in GameId::ALL {
            reference_strategy(g).check(g).unwrap();
        }
        assert!(reference_strategy(GameId::Chsh).check(GameId::Tavakoli).is_err());
        assert!(reference_strategy(GameId::Tavakoli).check(GameId::Chsh).is_err());
        assert!(reference_strategy(GameId::Chsh).check(GameId::PseudoTelepathy3).is_err());
    }

    #[test]
    fn always_zero_loses_chsh_on_one_one() {
        let s = DeterministicStrategy::constant_zero(GameId::Chsh);
        assert_eq!(s.respond(GameId::Chsh, &[1, 1]), vec![0, 0]);
    }

    #[test]
    fn mixture_validation() {
        let a = DeterministicStrategy::constant_zero(GameId::GameG2);
        let b = DeterministicStrategy::x1_forwarder();
        assert!(ClassicalStrategy::mixture(vec![(0.5, a.clone()), (0.5, b.clone())]).is_ok());
        assert!(ClassicalStrategy::mixture(vec![(0.6, a.clone()), (0.5, b.clone())]).is_err());
        assert!(ClassicalStrategy::mixture(vec![(-0.5, a.clone()), (1.5, b.clone())]).is_err());
        assert!(ClassicalStrategy::mixture(vec![]).is_err());
        let m = ClassicalStrategy::from_unnormalized(vec![(3.0, a), (1.0, b)]).unwrap();
        assert_eq!(m.components()[0].0, 0.75);
    }

    #[test]
    fn deterministic_tables_checked() {
        let bad = DeterministicStrategy::Nonlocal { tables: vec![vec![0, 0], vec![0]] };
        assert!(bad.check(GameId::Chsh).is_err());
        let bad = DeterministicStrategy::Nonlocal { tables: vec![vec![0, 2], vec![0, 0]] };
        assert!(bad.check(GameId::Chsh).is_err());
        assert!(DeterministicStrategy::x1_forwarder().check(GameId::Chsh).is_err());
        assert!(DeterministicStrategy::constant_zero(GameId::GameG).check(GameId::GameG).is_ok());
    }
}
