// SPDX-License-Identifier: Apache-2.0

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hvcell::gdsio::export_design;
use hvcell::verify::{compare_netlists, extract_netlist, run_drc};
use hvcell::{read_gds, write_gds, TechnologyData};
use hvcell_bench::row;

fn drc(c: &mut Criterion) {
    let tech = TechnologyData::demo();
    let mut g = c.benchmark_group("drc_row");
    g.sample_size(20);
    for n in [1usize, 8, 32] {
        let d = row(n, &tech);
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| b.iter(|| run_drc(black_box(d), &tech)));
    }
    g.finish();
}

fn lvs(c: &mut Criterion) {
    let tech = TechnologyData::demo();
    let mut g = c.benchmark_group("lvs_row");
    g.sample_size(20);
    for n in [1usize, 8, 32] {
        let d = row(n, &tech);
        let reference = d.declared_netlist();
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| compare_netlists(&extract_netlist(black_box(d), &tech), &reference))
        });
    }
    g.finish();
}

fn gds(c: &mut Criterion) {
    let tech = TechnologyData::demo();
    let lib = export_design(&row(32, &tech), "TOP", &tech).unwrap();
    let bytes = write_gds(&lib).unwrap();
    c.bench_function("gds_write_row32", |b| b.iter(|| write_gds(black_box(&lib)).unwrap()));
    c.bench_function("gds_read_row32", |b| b.iter(|| read_gds(black_box(&bytes)).unwrap()));
}

criterion_group!(benches, drc, lvs, gds);
criterion_main!(benches);
