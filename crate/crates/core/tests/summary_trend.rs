//! On well-separated mixtures the median std.error shrinks in magnitude as
//! RPKM moves to finer levels.

use rpkm::bench::{run_experiment, summarize, Algorithm, ExperimentConfig, GroupKey, KeyValue};

#[test]
fn median_std_error_shrinks_with_depth() {
    for (d, k) in [(2, 3), (2, 9), (4, 3)] {
        let mut config = ExperimentConfig::new(vec![Algorithm::Rpkm], 20_000, d, k, 99);
        config.m = 6;
        config.replicates = 10;
        config.evaluate = true;
        let records = run_experiment(&config).unwrap();
        let summary = summarize(&records, &[GroupKey::Step]);
        let medians: Vec<(u64, f64)> = summary
            .rows
            .iter()
            .filter(|r| r.count >= 5)
            .map(|r| match r.key[0].1 {
                KeyValue::Num(level) => (level, r.std_error.unwrap().median.abs()),
                ref other => panic!("unexpected key {other:?}"),
            })
            .collect();
        assert!(medians.len() >= 3, "{medians:?}");
        for w in medians.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "d = {d}, K = {k}: {medians:?}");
        }
    }
}
