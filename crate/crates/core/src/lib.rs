//! Device-independent randomness certification from nonlocal and
//! prepare-and-measure games, on a small exact statevector simulator.

pub mod analysis;
pub mod games;
pub mod protocols;
pub mod qcore;

pub use analysis::{AnalysisError, EntropyReport, Estimate};
pub use games::{GameError, GameId, GameScore, RoundIo, ScoreKind, Strategy};
pub use protocols::{
    CertificationVerdict, Decision, DeviceKind, Mode, ProtocolConfig, ProtocolError, ProtocolKind, RoundRecord,
};
pub use qcore::{ComplexAmplitude, PureState, QError};
