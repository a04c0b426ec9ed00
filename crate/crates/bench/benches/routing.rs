use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use inroute_bench::instance;
use inroute_core::{
    build_distance_matrix, day_to_day_plan, route_period, rtr_improve, savings_routes,
    DemandPattern, RtrParams,
};

fn routing(c: &mut Criterion) {
    let mut group = c.benchmark_group("period_routing");
    for n in [50, 250] {
        let inst = instance(n, 4, 200, DemandPattern::Constant);
        let m = build_distance_matrix(&inst);
        // day-to-day from period 4 serves nearly every customer
        let deliveries: Vec<(usize, u64)> = day_to_day_plan(&inst)
            .deliveries(4)
            .into_iter()
            .map(|(id, q)| (id, q.min(inst.capacity)))
            .collect();
        let start = savings_routes(&deliveries, inst.capacity, &m).unwrap();
        let params = RtrParams::default();

        group.bench_with_input(BenchmarkId::new("savings", n), &deliveries, |b, d| {
            b.iter(|| savings_routes(d, inst.capacity, &m).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rtr", n), &start, |b, s| {
            b.iter(|| rtr_improve(s, &m, inst.capacity, &params))
        });
        group.bench_with_input(BenchmarkId::new("route_period", n), &deliveries, |b, d| {
            b.iter(|| route_period(&inst, &m, d, &params, true).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, routing);
criterion_main!(benches);
