//! Black-box devices and the two certification protocols: `P` (self-testing
//! prepare-and-measure, single qubit) and `Q` (the even/odd weight game).

mod devices;
mod guessing;
mod runner;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::qcore::QError;

pub use devices::{
    adversarial_devices, classical_devices, honest_devices, Carrier, ClassicalMeas, ClassicalPrep,
    CoinScope, MeasDevice, PrepDevice, RoundCoins,
};
pub use guessing::{guessing_game_bound_check, GuessingReport, SampledRate};
pub use runner::{
    classical_sweep, run_protocol, BinStore, CertificationVerdict, Condition, Decision,
    ProtocolRun, SweepEntry, SweepReport, A_TARGET,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("insufficient rounds: {0}")]
    InsufficientRounds(String),
    #[error("measurement device has {got} settings, protocol {protocol} needs {expected}")]
    DeviceArityMismatch {
        protocol: ProtocolKind,
        expected: usize,
        got: usize,
    },
    #[error("unknown {what} {name:?}")]
    UnknownKind { what: &'static str, name: String },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Quantum(#[from] QError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub type ProtocolResult<T> = Result<T, ProtocolError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    P,
    Q,
}

impl ProtocolKind {
    /// Number of measurement settings the protocol addresses.
    pub fn settings(self) -> usize {
        match self {
            ProtocolKind::P => 3,
            ProtocolKind::Q => 2,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::P => "P",
            ProtocolKind::Q => "Q",
        })
    }
}

impl FromStr for ProtocolKind {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P" | "p" => Ok(ProtocolKind::P),
            "Q" | "q" => Ok(ProtocolKind::Q),
            _ => Err(ProtocolError::UnknownKind { what: "protocol", name: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Test,
    Generate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Test => "test",
            Mode::Generate => "generate",
        }
    }
}

impl FromStr for Mode {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "test" => Ok(Mode::Test),
            "generate" => Ok(Mode::Generate),
            _ => Err(ProtocolError::UnknownKind { what: "mode", name: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Honest,
    AlwaysZero,
    X1Forwarder,
    PerfectEvenA,
    PerfectEvenB,
    MixedPerfectEven,
    InputGuesser,
}

impl DeviceKind {
    pub const ALL: [DeviceKind; 7] = [
        DeviceKind::Honest,
        DeviceKind::AlwaysZero,
        DeviceKind::X1Forwarder,
        DeviceKind::PerfectEvenA,
        DeviceKind::PerfectEvenB,
        DeviceKind::MixedPerfectEven,
        DeviceKind::InputGuesser,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            DeviceKind::Honest => "honest",
            DeviceKind::AlwaysZero => "always-zero",
            DeviceKind::X1Forwarder => "x1-forwarder",
            DeviceKind::PerfectEvenA => "perfect-even-a",
            DeviceKind::PerfectEvenB => "perfect-even-b",
            DeviceKind::MixedPerfectEven => "mixed-perfect-even",
            DeviceKind::InputGuesser => "input-guesser",
        }
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for DeviceKind {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('_', "-");
        DeviceKind::ALL
            .into_iter()
            .find(|k| k.cli_name().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| ProtocolError::UnknownKind { what: "device kind", name: s.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    pub rounds: u64,
    pub seed: u64,
    pub mode: Mode,
    /// Failure probability behind every Hoeffding band.
    pub delta: f64,
    /// Fraction of Q's rand bin spent on the odd-weight test.
    pub gamma: f64,
}

impl ProtocolConfig {
    pub fn new(protocol: ProtocolKind, rounds: u64, seed: u64) -> Self {
        Self {
            protocol,
            rounds,
            seed,
            mode: Mode::Test,
            delta: 1e-6,
            gamma: 0.5,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> ProtocolResult<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ProtocolError::BadConfig(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(0.5..=1.0).contains(&self.gamma) {
            return Err(ProtocolError::BadConfig(format!("gamma must lie in [0.5, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

/// One executed round. For P the inputs are `(x0, x1, y)`, for Q `(x0, x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoundRecord {
    pub round_index: u64,
    pub inputs: [u8; 3],
    pub b: u8,
}

impl RoundRecord {
    pub(crate) fn weight(&self) -> u8 {
        self.inputs.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        for k in DeviceKind::ALL {
            assert_eq!(k.cli_name().parse::<DeviceKind>().unwrap(), k);
        }
        assert_eq!("x1_forwarder".parse::<DeviceKind>().unwrap(), DeviceKind::X1Forwarder);
        assert!(matches!("eve".parse::<DeviceKind>(), Err(ProtocolError::UnknownKind { .. })));
        assert_eq!("q".parse::<ProtocolKind>().unwrap(), ProtocolKind::Q);
        assert!("R".parse::<ProtocolKind>().is_err());
        assert!("fast".parse::<Mode>().is_err());
    }

    #[test]
    fn config_validation() {
        let c = ProtocolConfig::new(ProtocolKind::Q, 10, 1);
        assert!(c.validate().is_ok());
        assert!(ProtocolConfig { gamma: 0.4, ..c }.validate().is_err());
        assert!(ProtocolConfig { gamma: 1.1, ..c }.validate().is_err());
        assert!(ProtocolConfig { delta: 0.0, ..c }.validate().is_err());
        assert!(ProtocolConfig { delta: 1.0, ..c }.validate().is_err());
    }
}
