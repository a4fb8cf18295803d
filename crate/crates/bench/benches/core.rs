use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use ncpm_core::games::{nash_allocation, GameConfig, GameMode};
use ncpm_core::generators::{complete, erdos_renyi};
use ncpm_core::markov::{estimate_trajectories, SimulationModel};
use ncpm_core::ncpm::{self_social_map, social_self_map, solve_two_product_fixed_point};
use ncpm_core::{OpenMindedness, ProbabilityMatrix, ProductConversionGraph, SocialNetwork, TwoProductParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n: usize) -> (SocialNetwork, OpenMindedness, ProductConversionGraph, ProbabilityMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let net = erdos_renyi(n, (8.0 / n as f64).min(1.0), &mut rng).unwrap();
    let alpha = OpenMindedness::new((0..n).map(|_| rng.random_range(0.05..0.95)).collect()).unwrap();
    let pcg = ProductConversionGraph::new(DMatrix::from_row_slice(
        4,
        4,
        &[0.6, 0.4, 0.0, 0.0, 0.3, 0.7, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.8, 0.0, 0.2],
    ))
    .unwrap();
    let p0 = ProbabilityMatrix::random(n, 4, &mut rng);
    (net, alpha, pcg, p0)
}

fn maps(c: &mut Criterion) {
    let mut group = c.benchmark_group("maps");
    for n in [50, 500] {
        let (net, alpha, pcg, p0) = setup(n);
        group.bench_with_input(BenchmarkId::new("social_self", n), &n, |b, _| {
            b.iter(|| social_self_map(&net, &alpha, &pcg, black_box(&p0)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("self_social", n), &n, |b, _| {
            b.iter(|| self_social_map(&net, &alpha, &pcg, black_box(&p0)).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    let (net, alpha, pcg, p0) = setup(50);
    for model in [SimulationModel::SocialSelf, SimulationModel::SelfSocial] {
        group.bench_function(format!("{model:?}/n50_t50_s1000"), |b| {
            b.iter(|| estimate_trajectories(model, &net, &alpha, &pcg, &p0, 50, 1000, 1).unwrap())
        });
    }
    group.finish();
}

fn fixed_point(c: &mut Criterion) {
    let params = TwoProductParams::new(0.3, 0.5).unwrap();
    for n in [20, 200] {
        let (net, alpha, _, _) = setup(n);
        c.bench_function(&format!("two_product_solver/{n}"), |b| {
            b.iter(|| solve_two_product_fixed_point(&params, &net, &alpha, 1e-12).unwrap())
        });
    }
}

fn nash(c: &mut Criterion) {
    let n = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alpha = OpenMindedness::new((0..n).map(|_| rng.random_range(0.7..0.9)).collect()).unwrap();
    let config = GameConfig::new(
        complete(n).unwrap(),
        alpha,
        vec![1e5, 1.5e5],
        100.0,
        GameMode::SeedingQuality { preset: None },
    )
    .unwrap();
    let p = ProbabilityMatrix::random(n, 2, &mut rng);
    c.bench_function("nash_seeding_quality/100", |b| b.iter(|| nash_allocation(&config, black_box(&p)).unwrap()));
}

criterion_group!(benches, maps, monte_carlo, fixed_point, nash);
criterion_main!(benches);
