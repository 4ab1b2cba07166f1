use dspc_core::bench::{bench_source, BenchConfig};
use dspc_core::corpus::APPS;

#[test]
fn every_app_passes_its_bench() {
    let config = BenchConfig::default();
    let mut failed = Vec::new();
    for app in &APPS {
        let report = bench_source(app.source, app.name, &config).unwrap();
        println!("{}", report.to_table());
        if !report.passed {
            failed.push(app.name);
        }
    }
    assert!(failed.is_empty(), "failing apps: {failed:?}");
}
