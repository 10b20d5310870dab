use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use diqrng_core::games::{best_classical, equivalence_check, exact_score, reference_strategy, EquivalencePair, InputDistribution};
use diqrng_core::protocols::{honest_devices, run_protocol, ProtocolConfig, ProtocolKind};
use diqrng_core::qcore::{apply_gate, measure, Gate1Q, PureState, QubitBasis};
use diqrng_core::GameId;

fn qcore(c: &mut Criterion) {
    let ghz = PureState::ghz3();
    let h = Gate1Q::hadamard();
    c.bench_function("apply_gate_ghz3", |b| b.iter(|| apply_gate(black_box(&ghz), &h, 2).unwrap()));
    let basis = QubitBasis::psi();
    c.bench_function("measure_bell", |b| {
        b.iter(|| measure(black_box(&PureState::bell()), &basis, 0, 0.3).unwrap())
    });
}

fn games(c: &mut Criterion) {
    let chsh = reference_strategy(GameId::Chsh).into();
    let uniform = InputDistribution::uniform(GameId::Chsh);
    c.bench_function("exact_score_chsh", |b| {
        b.iter(|| exact_score(GameId::Chsh, black_box(&chsh), &uniform).unwrap())
    });
    c.bench_function("best_classical_tavakoli", |b| b.iter(|| best_classical(black_box(GameId::Tavakoli))));
    c.bench_function("equivalence_g1_g2", |b| b.iter(|| equivalence_check(black_box(EquivalencePair::G1VsG2))));
}

fn protocols(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_protocol");
    group.sample_size(20);
    for kind in [ProtocolKind::P, ProtocolKind::Q] {
        let (prep, meas) = honest_devices(kind);
        let config = ProtocolConfig::new(kind, 10_000, 1);
        group.bench_function(format!("honest_{kind}_10k"), |b| {
            b.iter(|| run_protocol(black_box(&config), &prep, &meas).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, qcore, games, protocols);
criterion_main!(benches);
