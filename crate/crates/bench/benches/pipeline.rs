//! Benchmarks of the three hot paths: channel application on the 4x4 link,
//! quadrature construction of the averaged operators, and the K = 2 decoder
//! solve. Run with `cargo bench -p qmimo-bench`.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use qmimo::channel::apply_mimo_channel;
use qmimo::cloner::{symmetric_clone_state, CloneParams};
use qmimo::haar::{analytic_qr_2x2, numeric_qr, two_clone_encoder, SphereQuadrature};
use qmimo::linalg::PureQubit;
use qmimo::sdp::{solve_purification, PurificationProblem};
use qmimo::MimoChannelSpec;

fn bench_channel_4x4(c: &mut Criterion) {
    let spec = MimoChannelSpec::four_by_four(0.3, 0.3, 0.15).unwrap();
    let psi = PureQubit::from_angles(1.1, 0.4);
    let rho = symmetric_clone_state(&psi, 4).unwrap();
    c.bench_function("channel/apply_4x4_four_clones", |b| {
        b.iter(|| apply_mimo_channel(std::hint::black_box(&rho), &spec).unwrap())
    });
}

fn bench_numeric_qr(c: &mut Criterion) {
    let spec = MimoChannelSpec::two_by_two(0.245, 0.1, 0.2).unwrap();
    let params = CloneParams::symmetric();
    let grid = SphereQuadrature::default_grid();
    let encode = two_clone_encoder(params);
    c.bench_function("haar/numeric_qr_2x2_quadrature", |b| {
        b.iter(|| numeric_qr(&encode, &spec, &[0, 1], &grid).unwrap())
    });
    c.bench_function("haar/analytic_qr_2x2", |b| {
        b.iter(|| analytic_qr_2x2(std::hint::black_box(&params), 0.245, 0.1, 0.2))
    });
}

fn bench_sdp_solve(c: &mut Criterion) {
    let qr = analytic_qr_2x2(&CloneParams::symmetric(), 0.245, 0.1, 0.2);
    c.bench_function("sdp/solve_k2_p05", |b| {
        b.iter_batched(
            || PurificationProblem { qr: qr.clone(), p: 0.5 },
            |prob| solve_purification(&prob).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_channel_4x4, bench_numeric_qr, bench_sdp_solve);
criterion_main!(benches);
