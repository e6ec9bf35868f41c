use criterion::{criterion_group, criterion_main, Criterion};
use medianwall::instance::{build, certify, dual_model, Built, RunOptions};
use medianwall::product::verify_system_lemma;
use medianwall::quasitree::verify_lemma;
use medianwall::verify::GlueConfig;
use medianwall_bench::{instance, GRAPHS, PRODUCTS};

fn pipeline(c: &mut Criterion) {
    let opts = RunOptions::default();
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    for spec in GRAPHS {
        let inst = instance(spec);
        g.bench_function(format!("walls {spec}"), |b| {
            b.iter(|| build(&inst, &opts).unwrap())
        });
        let built = build(&inst, &opts).unwrap();
        let Built::Quasitree(q) = &built else {
            unreachable!()
        };
        g.bench_function(format!("lemma {spec}"), |b| {
            b.iter(|| verify_lemma(q, GlueConfig::new(1)))
        });
        g.bench_function(format!("dual {spec}"), |b| {
            b.iter(|| dual_model(&built, &opts).unwrap())
        });
    }
    for spec in PRODUCTS {
        let inst = instance(spec);
        let built = build(&inst, &opts).unwrap();
        let Built::Product(p) = &built else {
            unreachable!()
        };
        g.bench_function(format!("system lemma {spec}"), |b| {
            b.iter(|| verify_system_lemma(p, GlueConfig::new(2)))
        });
        g.bench_function(format!("certificate {spec}"), |b| {
            b.iter(|| certify(&inst, &opts).unwrap())
        });
    }
    g.bench_function("certificate path(20)", |b| {
        let inst = instance("path(20)");
        b.iter(|| certify(&inst, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
