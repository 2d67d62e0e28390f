use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use linhodge::diffop::{basis, fingerprint_on, named, Action, LazyOp};
use linhodge::exec::Mode;
use linhodge::qring::{build_gen_function, Family, GenKind};
use linhodge::tables::hodge_table_via_w_mode;

const MODES: [(&str, Mode); 2] = [("parallel", Mode::Parallel), ("sequential", Mode::Sequential)];

fn hodge_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("hodge_table_cap12");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| hodge_table_via_w_mode(12, mode).unwrap())
        });
    }
    g.finish();
}

fn cofactor(c: &mut Criterion) {
    let table = hodge_table_via_w_mode(12, Mode::Parallel).unwrap();
    let f = build_gen_function(GenKind::FHq, 12, &table).unwrap().body;
    let op = named::v_h(0, 19).unwrap();
    let mut g = c.benchmark_group("v_h0_cofactor_cap12");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| b.iter(|| op.cofactor(&f, mode).unwrap()));
    }
    g.finish();
}

fn fingerprint(c: &mut Criterion) {
    let v = |m: i64| Action::lazy(LazyOp::new("V_H", Family::Q, move |n| named::v_h(m, n)).unwrap());
    let comm = Action::comm(v(1), v(-1));
    let monos = basis(Family::Q, 8, false);
    let mut g = c.benchmark_group("commutator_fingerprint_cap8");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| fingerprint_on(&comm, Family::Q, 0, &monos, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hodge_table, cofactor, fingerprint);
criterion_main!(benches);
