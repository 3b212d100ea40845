use senile_walks::stats::{renewal_rate, RunConfig};
use senile_walks::{ReinforcementSpec, WalkKind};

#[test]
fn renewal_rate_approaches_inverse_mean_time() {
    for (kind, d, f) in [
        (WalkKind::Persistent, 2, "const:0"),
        (WalkKind::Reinforced, 1, "const:1"),
        (WalkKind::Reinforced, 3, "affine:0.5,0"),
    ] {
        let spec = ReinforcementSpec::parse(d, f).unwrap();
        let n = 2000;
        let report = renewal_rate(kind, &spec, n, &RunConfig::new(11, 4000)).unwrap();
        let reference = report.reference.unwrap();
        // the finite-n bias of tau^{-1}_n / n is O(1/n)
        let band = 3.0 * report.std_error + 1.0 / n as f64;
        assert!(
            (report.estimate - reference).abs() <= band,
            "{kind} d={d} {f}: {} vs {reference} (band {band})",
            report.estimate
        );
    }
}
