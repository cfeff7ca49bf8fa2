use chandef::deficiency::{self, DeficiencyOptions};
use chandef::norms::{diamond_norm, dual_diamond_norm};
use chandef::ovs::dual_section;
use chandef::Family;
use chandef_bench::{channel_pair, map_pair, section};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("diamond");
    for d in [2usize, 3] {
        let (m, _) = map_pair(d, d, 1);
        g.bench_with_input(BenchmarkId::new("diamond", d), &m, |b, m| b.iter(|| diamond_norm(Family::Cp, black_box(m)).unwrap()));
        g.bench_with_input(BenchmarkId::new("dual_diamond", d), &m, |b, m| {
            b.iter(|| dual_diamond_norm(Family::Cp, black_box(m)).unwrap())
        });
    }
    g.finish();
}

fn deficiencies(c: &mut Criterion) {
    let mut g = c.benchmark_group("deficiency");
    g.sample_size(10);
    let opts = DeficiencyOptions { eb_samples: 0, ..Default::default() };
    for d in [2usize, 3] {
        let (phi, psi) = channel_pair(d, d, 2);
        g.bench_with_input(BenchmarkId::new("post", d), &(phi.clone(), psi.clone()), |b, (phi, psi)| {
            b.iter(|| deficiency::post_deficiency(Family::Cp, phi, psi, None, &opts).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pre", d), &(phi, psi), |b, (phi, psi)| {
            b.iter(|| deficiency::pre_deficiency(Family::Cp, phi, psi, None, &opts).unwrap())
        });
    }
    g.finish();
}

fn sections(c: &mut Criterion) {
    let mut g = c.benchmark_group("base_section");
    for n in [4usize, 8] {
        let (s, x) = section(n, 3);
        g.bench_with_input(BenchmarkId::new("dual_section", n), &s, |b, s| b.iter(|| dual_section(black_box(s)).unwrap()));
        g.bench_with_input(BenchmarkId::new("norm", n), &(s, x), |b, (s, x)| b.iter(|| s.norm(black_box(x)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, norms, deficiencies, sections);
criterion_main!(benches);
