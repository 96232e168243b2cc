use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpdecode::channel::ChannelModel;
use lpdecode::codes::builtin_code;
use lpdecode::decoder::{Formulation, LpDecoder};
use lpdecode::exec::Execution;
use lpdecode::sim::{compare, sample_gamma, simulate, CompareOptions, FormulationChoice, SimConfig};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn simulate_bsc(c: &mut Criterion) {
    let h = builtin_code("ldpc-3-6-n48").unwrap();
    let mut group = c.benchmark_group("simulate_n48_bsc0.03_200");
    group.sample_size(10);
    for execution in MODES {
        let cfg = SimConfig {
            channel: ChannelModel::bsc(0.03).unwrap(),
            trials: 200,
            seed: 0,
            formulations: FormulationChoice::Feldman,
            execution,
        };
        group.bench_function(BenchmarkId::from_parameter(format!("{execution:?}")), |b| {
            b.iter(|| simulate("n48", &h, black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn compare_formulations(c: &mut Criterion) {
    let h = builtin_code("ldpc-3-6-n48").unwrap();
    let mut group = c.benchmark_group("compare_n48_20");
    group.sample_size(10);
    for execution in MODES {
        let opts = CompareOptions { num_gammas: 20, execution, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(format!("{execution:?}")), |b| {
            b.iter(|| compare("n48", &h, black_box(&opts)).unwrap())
        });
    }
    group.finish();
}

fn single_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_solve");
    for name in ["hamming-7-4", "ldpc-3-6-n48"] {
        let h = builtin_code(name).unwrap();
        let gamma = sample_gamma(h.n(), 0, 0, false);
        for f in Formulation::ALL {
            let dec = LpDecoder::new(&h, f).unwrap();
            group.bench_function(BenchmarkId::new(f.as_str(), name), |b| {
                b.iter(|| dec.decode(black_box(&gamma)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, simulate_bsc, compare_formulations, single_solve);
criterion_main!(benches);
