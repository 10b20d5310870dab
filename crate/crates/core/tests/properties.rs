use diqrng_core::analysis::{hoeffding_radius, statistic_a};
use diqrng_core::games::{
    exact_score, reference_strategy, sample_round, winning_predicate, ClassicalStrategy,
    DeterministicStrategy, InputDistribution, Strategy,
};
use diqrng_core::protocols::{
    adversarial_devices, honest_devices, run_protocol, CoinScope, Decision, DeviceKind,
    ProtocolConfig, ProtocolKind,
};
use diqrng_core::GameId;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn deterministic_strategy(game: GameId) -> impl proptest::strategy::Strategy<Value = DeterministicStrategy> {
    let width = if game.is_prepare_measure() { 8 } else { 4 };
    (0u32..1 << width).prop_map(move |code| {
        let b = |i: u32| ((code >> i) & 1) as u8;
        if game.is_prepare_measure() {
            DeterministicStrategy::PrepareMeasure {
                prep: [b(0), b(1), b(2), b(3)],
                meas: [[b(4), b(5)], [b(6), b(7)]],
            }
        } else {
            DeterministicStrategy::Nonlocal {
                tables: vec![vec![b(0), b(1)], vec![b(2), b(3)]],
            }
        }
    })
}

/// Monte Carlo frequency of the reference strategy stays within four standard
/// errors of the exact value for every game.
#[test]
fn monte_carlo_matches_exact() {
    let n = 100_000;
    for game in GameId::ALL {
        let strategy: Strategy = reference_strategy(game).into();
        let inputs = game.valid_inputs();
        let mut rng = ChaCha8Rng::seed_from_u64(0xabc ^ game as u64);
        let mut wins = 0u32;
        for _ in 0..n {
            let x = &inputs[rng.gen_range(0..inputs.len())];
            let io = sample_round(game, &strategy, x, &mut rng).unwrap();
            wins += u32::from(winning_predicate(game, &io).unwrap());
        }
        let exact = exact_score(game, &strategy, &InputDistribution::uniform(game)).unwrap();
        // the augmented G2 value averages even and odd halves; it is still the
        // plain win frequency under uniform inputs because both halves have mass 1/2
        let p = exact.score.value;
        let f = wins as f64 / n as f64;
        let tol = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((f - p).abs() <= tol.max(1e-12), "{game}: {f} vs {p}");
    }
}

#[test]
fn statistic_a_tracks_exact_value() {
    let (prep, meas) = honest_devices(ProtocolKind::P);
    let run = run_protocol(&ProtocolConfig::new(ProtocolKind::P, 30_000, 17), &prep, &meas).unwrap();
    let a = statistic_a(&run.bins.check, 1e-6).unwrap();
    let exact = exact_score(
        GameId::Tavakoli,
        &reference_strategy(GameId::Tavakoli).into(),
        &InputDistribution::uniform(GameId::Tavakoli),
    )
    .unwrap()
    .score
    .value;
    let eps = hoeffding_radius(run.bins.check.len() as u64, 1e-6);
    assert!((a.point - exact).abs() <= 4.0 * eps);
}

#[test]
fn honest_q_check_bin_has_no_exceptions() {
    let (prep, meas) = honest_devices(ProtocolKind::Q);
    for seed in 0..4 {
        let run = run_protocol(&ProtocolConfig::new(ProtocolKind::Q, 5_000, seed), &prep, &meas).unwrap();
        assert_eq!(run.verdict.condition("even_win").unwrap().exceptions, Some(0));
    }
}

#[test]
fn rand_bits_uncorrelated_with_inputs() {
    let (prep, meas) = honest_devices(ProtocolKind::P);
    let run = run_protocol(&ProtocolConfig::new(ProtocolKind::P, 60_000, 23), &prep, &meas).unwrap();
    let n = run.bins.rand.len() as f64;
    let xs: Vec<f64> = run.bins.rand.iter().map(|r| r.inputs[0] as f64).collect();
    let bs: Vec<f64> = run.bins.rand.iter().map(|r| r.b as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (mx, mb) = (mean(&xs), mean(&bs));
    let cov: f64 = xs.iter().zip(&bs).map(|(x, b)| (x - mx) * (b - mb)).sum::<f64>() / n;
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sb = (bs.iter().map(|b| (b - mb).powi(2)).sum::<f64>() / n).sqrt();
    let corr = cov / (sx * sb);
    assert!(corr.abs() <= 4.0 / n.sqrt(), "corr {corr}");
}

#[test]
fn mixed_perfect_even_passes_q_with_per_round_coin() {
    let (prep, meas) = adversarial_devices(DeviceKind::MixedPerfectEven, ProtocolKind::Q, CoinScope::PerRound).unwrap();
    let run = run_protocol(&ProtocolConfig::new(ProtocolKind::Q, 20_000, 5), &prep, &meas).unwrap();
    let even = run.verdict.condition("even_win").unwrap();
    let odd = run.verdict.condition("odd_guess").unwrap();
    assert_eq!(even.exceptions, Some(0));
    assert!((odd.point - 0.5).abs() < 0.05);
}

#[test]
fn mixed_perfect_even_per_run_coin_is_a_pure_family() {
    let (prep, meas) = adversarial_devices(DeviceKind::MixedPerfectEven, ProtocolKind::Q, CoinScope::PerRun).unwrap();
    let run = run_protocol(&ProtocolConfig::new(ProtocolKind::Q, 5_000, 5), &prep, &meas).unwrap();
    let odd = run.verdict.condition("odd_guess").unwrap().point;
    assert!(odd == 0.0 || odd == 1.0);
    assert_eq!(run.verdict.decision, Decision::Abort);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renormalized_mixtures_score_the_same(
        strats in proptest::collection::vec(deterministic_strategy(GameId::GameG2), 1..5),
        weights in proptest::collection::vec(0.01f64..10.0, 5),
        scale in 0.001f64..1000.0,
    ) {
        let comps: Vec<(f64, DeterministicStrategy)> =
            strats.iter().cloned().zip(weights.iter().copied()).map(|(s, w)| (w, s)).collect();
        let scaled: Vec<(f64, DeterministicStrategy)> = comps.iter().map(|(w, s)| (w * scale, s.clone())).collect();
        let a: Strategy = ClassicalStrategy::from_unnormalized(comps).unwrap().into();
        let b: Strategy = ClassicalStrategy::from_unnormalized(scaled).unwrap().into();
        let d = InputDistribution::uniform(GameId::GameG2);
        let sa = exact_score(GameId::GameG2, &a, &d).unwrap();
        let sb = exact_score(GameId::GameG2, &b, &d).unwrap();
        prop_assert!((sa.score.value - sb.score.value).abs() < 1e-12);
        prop_assert!((sa.odd_guess.unwrap() - sb.odd_guess.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn classical_chsh_never_beats_three_quarters(s in deterministic_strategy(GameId::Chsh)) {
        let v = exact_score(GameId::Chsh, &s.into(), &InputDistribution::uniform(GameId::Chsh)).unwrap();
        prop_assert!(v.score.value <= 0.75);
    }

    #[test]
    fn bins_partition_every_round(rounds in 1u64..400, seed in any::<u64>(), q in any::<bool>()) {
        let protocol = if q { ProtocolKind::Q } else { ProtocolKind::P };
        let (prep, meas) = honest_devices(protocol);
        let config = ProtocolConfig::new(protocol, rounds, seed)
            .with_mode(diqrng_core::Mode::Generate);
        let run = run_protocol(&config, &prep, &meas).unwrap();
        prop_assert_eq!(run.bins.total() as u64, rounds);
    }

    #[test]
    fn honest_false_bin_is_deterministic(seed in any::<u64>()) {
        let (prep, meas) = honest_devices(ProtocolKind::P);
        let config = ProtocolConfig::new(ProtocolKind::P, 600, seed);
        if let Ok(run) = run_protocol(&config, &prep, &meas) {
            for r in &run.bins.false_bin {
                prop_assert_eq!(r.b, r.inputs[0]);
            }
        }
    }

    #[test]
    fn abort_always_empties_output(seed in any::<u64>(), k in 0usize..7) {
        let kind = DeviceKind::ALL[k];
        let (prep, meas) = adversarial_devices(kind, ProtocolKind::Q, CoinScope::PerRound).unwrap();
        let run = run_protocol(&ProtocolConfig::new(ProtocolKind::Q, 300, seed), &prep, &meas).unwrap();
        let all_ok = run.verdict.conditions.iter().all(|c| c.satisfied);
        prop_assert_eq!(run.verdict.decision == Decision::Pass, all_ok);
        if run.verdict.decision == Decision::Abort {
            prop_assert!(run.verdict.output_bits.is_empty());
        }
    }
}
