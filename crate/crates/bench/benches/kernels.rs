use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use betatile::boundary::{build_boundary_graph, decide_tiling};
use betatile::dynamics::parry_data;
use betatile::natext::covering_degree_estimate;
use betatile::periodicity::is_purely_periodic;
use betatile::tiles::rauzy_cloud;
use betatile::make_beta;

const POLYS: [&str; 3] = ["1,-1,-1", "1,-3,-2", "1,0,-1,-1"];

fn parry(c: &mut Criterion) {
    let mut g = c.benchmark_group("parry_data");
    for p in POLYS {
        let f = make_beta(p, 128).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(p), &f, |b, f| b.iter(|| parry_data(black_box(f)).unwrap()));
    }
    g.finish();
}

fn clouds(c: &mut Criterion) {
    let mut g = c.benchmark_group("rauzy_cloud");
    let f = make_beta("1,-2,-2", 128).unwrap();
    let zero = f.zero();
    for k in [6usize, 9] {
        g.bench_with_input(BenchmarkId::new("2b+2", k), &k, |b, &k| b.iter(|| rauzy_cloud(&zero, k).unwrap()));
    }
    g.finish();
}

fn boundary(c: &mut Criterion) {
    let mut g = c.benchmark_group("boundary");
    g.sample_size(10);
    for p in POLYS {
        let parry = parry_data(&make_beta(p, 128).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("build", p), &parry, |b, parry| {
            b.iter(|| build_boundary_graph(parry).unwrap())
        });
        let graph = build_boundary_graph(&parry).unwrap();
        g.bench_with_input(BenchmarkId::new("decide", p), &graph, |b, graph| b.iter(|| decide_tiling(graph)));
    }
    g.finish();
}

fn purity(c: &mut Criterion) {
    let f = make_beta("1,-3,-2", 128).unwrap();
    let xs: Vec<_> = ["1/7", "5/11", "37/171", "b-3"].iter().map(|s| f.parse_element(s).unwrap()).collect();
    c.bench_function("purity/3b+2", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(is_purely_periodic(x).unwrap());
            }
        })
    });
}

fn covering(c: &mut Criterion) {
    let parry = parry_data(&make_beta("1,-2,-2", 128).unwrap()).unwrap();
    let mut g = c.benchmark_group("covering");
    g.sample_size(10);
    g.bench_function("2b+2/k8/2000", |b| {
        b.iter(|| covering_degree_estimate(&parry, 8, 2000, (0.0, 1.0), 1).unwrap())
    });
    g.finish();
}

criterion_group!(benches, parry, clouds, boundary, purity, covering);
criterion_main!(benches);
