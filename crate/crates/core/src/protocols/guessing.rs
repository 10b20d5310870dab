use std::f64::consts::PI;

use rand::Rng;

use super::devices::{adversarial_devices, honest_devices, CoinScope, Streams};
use super::{DeviceKind, ProtocolError, ProtocolKind, ProtocolResult};

/// A sampled success frequency next to its expected value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledRate {
    pub observed: f64,
    pub expected: f64,
    /// `sqrt(p(1-p)/N)` at the expected `p`.
    pub std_error: f64,
    pub trials: u64,
    pub within_4se: bool,
}

impl SampledRate {
    fn new(hits: u64, trials: u64, expected: f64) -> Self {
        let observed = hits as f64 / trials as f64;
        let std_error = (expected * (1.0 - expected) / trials as f64).sqrt();
        Self {
            observed,
            expected,
            std_error,
            trials,
            within_4se: (observed - expected).abs() <= 4.0 * std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessingReport {
    pub trials: u64,
    /// P read as an augmented CHSH game over six uniform `(x', y)` settings.
    pub augmented: SampledRate,
    /// Adversary guessing `a = x0` by the third-setting output `c2`.
    pub adversary: SampledRate,
    /// Guessing a rand-round bit from the preparation label.
    pub eve: SampledRate,
    /// The input-guesser device pair guessing `x0` without any message content.
    pub input_guesser: SampledRate,
    /// Normalized Hamming distance between `a` and `c2` on `x' = 0` rounds.
    pub hamming_a0_c2: f64,
    /// Same on `x' = 1` rounds.
    pub hamming_a1_c2: f64,
}

/// Samples the guessing experiments with honest P devices.
pub fn guessing_game_bound_check(trials: u64, seed: u64) -> ProtocolResult<GuessingReport> {
    if trials == 0 {
        return Err(ProtocolError::InsufficientRounds("no trials requested".into()));
    }
    let (prep, meas) = honest_devices(ProtocolKind::P);
    let omega = (PI / 8.0).cos().powi(2);

    let mut s = Streams::new(seed);
    let mut aug = 0;
    for _ in 0..trials {
        let xp: u8 = s.inputs.gen_range(0..2);
        let y: u8 = s.inputs.gen_range(0..3);
        let a: u8 = s.inputs.gen_range(0..2);
        let x = [a, a ^ xp];
        let c = s.coins();
        let b = meas.respond(y as usize, &prep.emit(x[0], x[1], &c), &c)?;
        let win = match (y, xp) {
            (0 | 1, _) => b == x[y as usize],
            (_, 0) => b == a,
            _ => true,
        };
        aug += u64::from(win);
    }

    let mut s = Streams::new(seed ^ 0x5eed_0001);
    let (mut adv, mut d0, mut n0, mut d1, mut n1) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for _ in 0..trials {
        let xp: u8 = s.inputs.gen_range(0..2);
        let a: u8 = s.inputs.gen_range(0..2);
        let c = s.coins();
        let c2 = meas.respond(2, &prep.emit(a, a ^ xp, &c), &c)?;
        adv += u64::from(c2 == a);
        let miss = u64::from(c2 != a);
        if xp == 0 {
            n0 += 1;
            d0 += miss;
        } else {
            n1 += 1;
            d1 += miss;
        }
    }

    let mut s = Streams::new(seed ^ 0x5eed_0002);
    let mut eve = 0;
    for _ in 0..trials {
        let x0: u8 = s.inputs.gen_range(0..2);
        let c = s.coins();
        let b = meas.respond(2, &prep.emit(x0, 1 - x0, &c), &c)?;
        // any function of the label; x0 itself is as good as any other
        eve += u64::from(b == x0);
    }

    let (gprep, gmeas) = adversarial_devices(DeviceKind::InputGuesser, ProtocolKind::P, CoinScope::None)?;
    let mut s = Streams::new(seed ^ 0x5eed_0003);
    let mut guesses = 0;
    for _ in 0..trials {
        let x: u8 = s.inputs.gen_range(0..4);
        let c = s.coins();
        let g = gmeas.respond(0, &gprep.emit(x >> 1, x & 1, &c), &c)?;
        guesses += u64::from(g == x >> 1);
    }

    let frac = |d: u64, n: u64| if n == 0 { f64::NAN } else { d as f64 / n as f64 };
    Ok(GuessingReport {
        trials,
        augmented: SampledRate::new(aug, trials, 2.0 / 3.0 * omega + 1.0 / 3.0),
        adversary: SampledRate::new(adv, trials, 0.75),
        eve: SampledRate::new(eve, trials, 0.5),
        input_guesser: SampledRate::new(guesses, trials, 0.5),
        hamming_a0_c2: frac(d0, n0),
        hamming_a1_c2: frac(d1, n1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_match_expectations() {
        let r = guessing_game_bound_check(20_000, 8).unwrap();
        assert!((r.augmented.expected - 0.902369).abs() < 1e-6);
        for rate in [r.augmented, r.adversary, r.eve, r.input_guesser] {
            assert!(rate.within_4se, "{rate:?}");
        }
        assert_eq!(r.hamming_a0_c2, 0.0);
        assert!((r.hamming_a1_c2 - 0.5).abs() < 0.03);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(guessing_game_bound_check(0, 1).is_err());
    }
}
