use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::games::{perfect_even_families, reference_strategy, DeterministicStrategy, GameId, QuantumStrategy, Setting};
use crate::qcore::{apply_gates, measure, PureState, QResult, QubitBasis};

use super::{DeviceKind, ProtocolError, ProtocolKind, ProtocolResult};

/// What travels from the preparation device to the measurement device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Carrier {
    Qubit(PureState),
    Bit(u8),
}

/// Which shared coin a classical device pair consults to pick its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoinScope {
    None,
    /// A fresh shared draw every round.
    PerRound,
    /// One draw fixed for the whole run.
    PerRun,
}

/// Randomness handed to the devices for one round. `run` and `shared` are
/// common to both devices; `local` is the measurement device's private draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundCoins {
    pub run: u64,
    pub shared: u64,
    pub local: f64,
}

impl RoundCoins {
    fn pick(&self, scope: CoinScope, n: usize) -> usize {
        let c = match scope {
            CoinScope::None => 0,
            CoinScope::PerRound => self.shared,
            CoinScope::PerRun => self.run,
        };
        (c % n as u64) as usize
    }
}

/// Independent input, local and shared streams derived from one seed.
pub(crate) struct Streams {
    pub inputs: ChaCha8Rng,
    local: ChaCha8Rng,
    shared: ChaCha8Rng,
    run: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let stream = |s| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(s);
            r
        };
        let mut shared = stream(2);
        let run = shared.next_u64();
        Self {
            inputs: stream(0),
            local: stream(1),
            shared,
            run,
        }
    }

    pub fn coins(&mut self) -> RoundCoins {
        RoundCoins {
            run: self.run,
            shared: self.shared.next_u64(),
            local: self.local.gen(),
        }
    }
}

/// Classical preparer: sends `variants[k][2*x0 + x1]`, `k` chosen by the coin.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPrep {
    pub variants: Vec<[u8; 4]>,
    pub coin: CoinScope,
}

/// Classical measurer: outputs `variants[k][m][setting]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalMeas {
    pub variants: Vec<[Vec<u8>; 2]>,
    pub coin: CoinScope,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrepDevice {
    Quantum([PureState; 4]),
    Classical(ClassicalPrep),
}

impl PrepDevice {
    pub fn emit(&self, x0: u8, x1: u8, coins: &RoundCoins) -> Carrier {
        let idx = (2 * x0 + x1) as usize;
        match self {
            PrepDevice::Quantum(states) => Carrier::Qubit(states[idx]),
            PrepDevice::Classical(c) => Carrier::Bit(c.variants[coins.pick(c.coin, c.variants.len())][idx]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasDevice {
    Quantum(Vec<Setting>),
    Classical(ClassicalMeas),
}

impl MeasDevice {
    pub fn settings(&self) -> usize {
        match self {
            MeasDevice::Quantum(s) => s.len(),
            MeasDevice::Classical(c) => c.variants.iter().map(|v| v[0].len().min(v[1].len())).min().unwrap_or(0),
        }
    }

    /// Output bit for `setting`. A quantum device handed a classical bit
    /// measures `|m>`; a classical device handed a qubit reads it in the
    /// computational basis.
    pub fn respond(&self, setting: usize, carrier: &Carrier, coins: &RoundCoins) -> QResult<u8> {
        match self {
            MeasDevice::Quantum(settings) => {
                let s = &settings[setting];
                let state = match carrier {
                    Carrier::Qubit(q) => *q,
                    Carrier::Bit(m) => PureState::basis(1, *m as usize)?,
                };
                let rotated = apply_gates(&state, &s.gates, 0)?;
                Ok(measure(&rotated, &s.basis, 0, coins.local)?.outcome ^ u8::from(s.flip))
            }
            MeasDevice::Classical(c) => {
                let m = match carrier {
                    Carrier::Bit(m) => *m,
                    Carrier::Qubit(q) => measure(q, &QubitBasis::computational(), 0, coins.local)?.outcome,
                };
                Ok(c.variants[coins.pick(c.coin, c.variants.len())][m as usize][setting])
            }
        }
    }
}

pub fn honest_devices(protocol: ProtocolKind) -> (PrepDevice, MeasDevice) {
    match protocol {
        ProtocolKind::P => {
            let QuantumStrategy::PrepareMeasure { preparations, mut settings } = reference_strategy(GameId::Tavakoli) else {
                unreachable!()
            };
            settings.push(Setting::measure(QubitBasis::hadamard()));
            (PrepDevice::Quantum(preparations), MeasDevice::Quantum(settings))
        }
        ProtocolKind::Q => {
            let QuantumStrategy::PrepareMeasure { preparations, settings } = reference_strategy(GameId::GameG2) else {
                unreachable!()
            };
            (PrepDevice::Quantum(preparations), MeasDevice::Quantum(settings))
        }
    }
}

fn tables(strategy: &DeterministicStrategy, protocol: ProtocolKind) -> ProtocolResult<([u8; 4], [Vec<u8>; 2])> {
    let DeterministicStrategy::PrepareMeasure { prep, meas } = strategy else {
        return Err(ProtocolError::BadConfig("device tables need a prepare-and-measure strategy".into()));
    };
    let row = |m: usize| {
        let mut r = meas[m].to_vec();
        // P's third setting reads the message back
        if protocol == ProtocolKind::P {
            r.push(m as u8);
        }
        r
    };
    Ok((*prep, [row(0), row(1)]))
}

/// Device pair playing one deterministic one-bit table pair.
pub fn classical_devices(strategy: &DeterministicStrategy, protocol: ProtocolKind) -> ProtocolResult<(PrepDevice, MeasDevice)> {
    mixture_devices(std::slice::from_ref(strategy), protocol, CoinScope::None)
}

fn mixture_devices(
    strategies: &[DeterministicStrategy],
    protocol: ProtocolKind,
    coin: CoinScope,
) -> ProtocolResult<(PrepDevice, MeasDevice)> {
    let mut preps = Vec::new();
    let mut meas = Vec::new();
    for s in strategies {
        let (p, m) = tables(s, protocol)?;
        preps.push(p);
        meas.push(m);
    }
    Ok((
        PrepDevice::Classical(ClassicalPrep { variants: preps, coin }),
        MeasDevice::Classical(ClassicalMeas { variants: meas, coin }),
    ))
}

/// Named cheating device pairs. `coin` only affects `MixedPerfectEven`,
/// which picks family A or B with probability 1/2 each.
pub fn adversarial_devices(kind: DeviceKind, protocol: ProtocolKind, coin: CoinScope) -> ProtocolResult<(PrepDevice, MeasDevice)> {
    let [family_a, family_b] = perfect_even_families();
    match kind {
        DeviceKind::Honest => Ok(honest_devices(protocol)),
        DeviceKind::AlwaysZero => classical_devices(&DeterministicStrategy::constant_zero(GameId::GameG2), protocol),
        DeviceKind::X1Forwarder => classical_devices(&DeterministicStrategy::x1_forwarder(), protocol),
        DeviceKind::PerfectEvenA => classical_devices(&family_a, protocol),
        DeviceKind::PerfectEvenB => classical_devices(&family_b, protocol),
        DeviceKind::MixedPerfectEven => mixture_devices(&[family_a, family_b], protocol, coin),
        DeviceKind::InputGuesser => {
            // no message content; the output is a shared coin
            let n = protocol.settings();
            let prep = ClassicalPrep { variants: vec![[0; 4]], coin: CoinScope::None };
            let meas = ClassicalMeas {
                variants: vec![[vec![0; n], vec![0; n]], [vec![1; n], vec![1; n]]],
                coin: CoinScope::PerRound,
            };
            Ok((PrepDevice::Classical(prep), MeasDevice::Classical(meas)))
        }
    }
}
