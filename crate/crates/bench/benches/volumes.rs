use criterion::{black_box, criterion_group, criterion_main, Criterion};

use conelab::geometry::{DyadicParams, FreqPoint, Sign};
use conelab::volume::{
    annuli_intersection_area, e_set_volume, mc_volume, sup_pair_volume, CircleConfig, ESetMethod,
    SupSearchOpts, SupSelector,
};

fn params() -> DyadicParams {
    DyadicParams::new(
        [1.0, 1.0, 1.0],
        [f64::INFINITY, 0.0625, 0.125],
        (Sign::Plus, Sign::Plus, Sign::Minus),
    )
    .unwrap()
}

fn bench_mc_volume(c: &mut Criterion) {
    let p = params();
    let region = p.leg_annulus(1);
    let bounds = region.bounding_box().unwrap();
    c.bench_function("mc_volume annulus 100k", |b| {
        b.iter(|| mc_volume(black_box(&region), &bounds, 100_000, 42).unwrap())
    });
}

fn bench_lens(c: &mut Criterion) {
    let cfg = CircleConfig {
        r: 1.0,
        delta: 0.01,
        big_r: 1.3,
        big_delta: 0.02,
        dist: 1.1,
    };
    c.bench_function("annuli_intersection_area", |b| {
        b.iter(|| annuli_intersection_area(black_box(&cfg)))
    });
}

fn bench_slices(c: &mut Criterion) {
    let p = params();
    let x0 = FreqPoint::new(2.8, [1.4, 0.0]);
    c.bench_function("e_set_volume slice_exact 2048", |b| {
        b.iter(|| e_set_volume(black_box(&p), x0, ESetMethod::slice_exact()).unwrap())
    });
}

fn bench_sup(c: &mut Criterion) {
    let p = params();
    let opts = SupSearchOpts {
        grid: 24,
        slices_search: 128,
        slices_final: 512,
        refine_iters: 12,
    };
    c.bench_function("sup_pair_volume 24x24", |b| {
        b.iter(|| sup_pair_volume(black_box(&p), SupSelector::OutputTranslate, &opts))
    });
}

criterion_group!(benches, bench_mc_volume, bench_lens, bench_slices, bench_sup);
criterion_main!(benches);
