//! The acceptance suite: exact-formula, enumeration, coupling and
//! statistical-band checks, grouped into nine criteria.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_walk_csv;
use crate::martingale::WalkConstants;
use crate::oracle::exhaustive_second_moment;
use crate::reinforcement::{Reinforcement, ReinforcementSpec};
use crate::rng::{derive_seed, StreamFactory};
use crate::stats::estimators::{
    direction_autocorrelation, estimate_msd, estimate_msd_curve, subdiffusive_check, Process,
};
use crate::stats::martingale_tests::{martingale_tests_scaled, MartingaleTest};
use crate::stats::{accumulate, clt_diagnostic, collect, EstimateReport, RunConfig, BAND, KS_ALPHA};
use crate::timechange::{coupled_pair, senile_from_timechange, TimeIndex};
use crate::walk::{generate_walk, WalkKind};

const KINDS: [WalkKind; 2] = [WalkKind::Persistent, WalkKind::Reinforced];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// The documented sample sizes.
    Full,
    /// Roughly ten times fewer samples, for smoke runs.
    Quick,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Suite::Full),
            "quick" => Ok(Suite::Quick),
            _ => Err(Error::Parse(format!("unknown suite {s:?} (expected full or quick)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Halves the martingale correction coefficients, which must make the
    /// martingale criterion fail.
    pub sabotage: bool,
}

impl VerifyOptions {
    pub fn new(suite: Suite, seed: u64) -> Self {
        VerifyOptions {
            suite,
            seed,
            workers: None,
            sabotage: false,
        }
    }

    fn run(&self, label: &str, n_paths: u64) -> RunConfig {
        RunConfig {
            seed: derive_seed(self.seed, label),
            n_paths,
            workers: self.workers,
        }
    }

    fn scale(&self) -> Scale {
        match self.suite {
            Suite::Full => Scale {
                msd_paths: 100_000,
                martingale_paths: 100_000,
                coupled_pairs: 1000,
                senile_paths: 10_000,
                senile_n: 10_000,
                autocorr_paths: 100_000,
                clt_paths: 10_000,
                clt_n: 10_000,
                subdiffusive_paths: 10_000,
            },
            Suite::Quick => Scale {
                msd_paths: 10_000,
                martingale_paths: 10_000,
                coupled_pairs: 100,
                senile_paths: 2000,
                senile_n: 2000,
                autocorr_paths: 10_000,
                clt_paths: 2000,
                clt_n: 2000,
                subdiffusive_paths: 2000,
            },
        }
    }
}

struct Scale {
    msd_paths: u64,
    martingale_paths: u64,
    coupled_pairs: u64,
    senile_paths: u64,
    senile_n: u64,
    autocorr_paths: u64,
    clt_paths: u64,
    clt_n: u64,
    subdiffusive_paths: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub expected: Option<f64>,
    pub std_error: Option<f64>,
    pub z_score: Option<f64>,
    pub tolerance: String,
    pub passed: bool,
}

impl Check {
    fn band(label: impl Into<String>, report: &EstimateReport) -> Self {
        Check {
            label: label.into(),
            observed: report.estimate,
            expected: report.reference,
            std_error: Some(report.std_error),
            z_score: report.z_score,
            tolerance: format!("{BAND} SE"),
            passed: report.within(BAND).unwrap_or(false),
        }
    }

    fn absolute(label: impl Into<String>, observed: f64, expected: f64, tol: f64) -> Self {
        Check {
            label: label.into(),
            observed,
            expected: Some(expected),
            std_error: None,
            z_score: None,
            tolerance: format!("{tol:e}"),
            passed: (observed - expected).abs() <= tol,
        }
    }

    fn holds(label: impl Into<String>, observed: f64, passed: bool, tolerance: &str) -> Self {
        Check {
            label: label.into(),
            observed,
            expected: None,
            std_error: None,
            z_score: None,
            tolerance: tolerance.into(),
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "criterion {} {}: {} ({ok}/{} checks)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub sabotage: bool,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

pub const CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub fn run_suite(options: &VerifyOptions) -> Result<VerifyReport> {
    let criteria = CRITERIA
        .iter()
        .map(|&id| run_criterion(id, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        suite: options.suite,
        seed: options.seed,
        sabotage: options.sabotage,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

pub fn run_criterion(id: u8, options: &VerifyOptions) -> Result<CriterionResult> {
    let (title, checks) = match id {
        1 => ("exact second moments of the time-changed walks", exact_moments(options)?),
        2 => ("enumeration oracle for a three-point step time", enumeration_oracle()?),
        3 => ("martingale transforms", martingales(options)?),
        4 => ("coupling of the two senile constructions", coupling(options)?),
        5 => ("senile diffusion constants", senile_constants(options)?),
        6 => ("direction autocorrelation", autocorrelation(options)?),
        7 => ("invariance principle diagnostics", clt(options)?),
        8 => ("subdiffusive reinforced senile walk", subdiffusive(options)?),
        9 => ("reproducibility", reproducibility(options)?),
        _ => return Err(Error::InvalidSpec(format!("no criterion {id}"))),
    };
    Ok(CriterionResult {
        id,
        title: title.into(),
        passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
        checks,
    })
}

fn spec(d: usize, f: Reinforcement) -> Result<ReinforcementSpec> {
    ReinforcementSpec::new(d, f)
}

fn exact_moments(options: &VerifyOptions) -> Result<Vec<Check>> {
    let ns = [1, 2, 5, 10, 100];
    let mut checks = Vec::new();
    for kind in KINDS {
        for d in 1..=3 {
            for c in [0.0, 2.0] {
                let s = spec(d, Reinforcement::constant(c))?;
                let label = format!("{kind} d={d} {}", s.reinforcement());
                let run = options.run(&format!("c1/{label}"), options.scale().msd_paths);
                for r in estimate_msd_curve(kind, Process::TimeChanged, &s, &ns, &run)? {
                    checks.push(Check::band(format!("{label} {}", r.quantity), &r));
                }
            }
        }
    }
    Ok(checks)
}

/// Step-time law of `const:0` in `d = 1` restricted to `{1, 2, 3}`.
pub fn three_point_spec() -> Result<ReinforcementSpec> {
    let pmf = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    ReinforcementSpec::new(1, Reinforcement::from_step_time_pmf(&pmf, 1)?)
}

fn enumeration_oracle() -> Result<Vec<Check>> {
    let s = three_point_spec()?;
    let law = s.time_law()?;
    let mut checks = Vec::new();
    for kind in KINDS {
        let constants = WalkConstants::new(kind, &law)?;
        for n in 1..=3 {
            checks.push(Check::absolute(
                format!("{kind} d=1 E|W_{n}|^2"),
                exhaustive_second_moment(kind, &s, n)?,
                constants.exact_second_moment(n as u64),
                1e-10,
            ));
        }
    }
    Ok(checks)
}

fn martingales(options: &VerifyOptions) -> Result<Vec<Check>> {
    let ns = [1, 10, 100];
    let factor = if options.sabotage { 0.5 } else { 1.0 };
    let paths = options.scale().martingale_paths;
    let mut checks = Vec::new();
    for kind in KINDS {
        for d in [1, 2] {
            let s = spec(d, Reinforcement::constant(0.0))?;
            let label = format!("{kind} d={d} const:0");
            let run = options.run(&format!("c3/{label}"), paths);
            let report = martingale_tests_scaled(kind, &s, &ns, &run, factor)?;
            for c in &report.checks {
                checks.push(Check::band(format!("{label} {}", c.report.quantity), &c.report));
            }
            let skipped = report.skipped_strata;
            checks.push(Check::holds(format!("{label} skipped strata"), skipped as f64, skipped == 0, "= 0"));
        }
    }
    // power: a halved correction must be detected
    for kind in KINDS {
        let s = spec(2, Reinforcement::constant(0.0))?;
        let label = format!("{kind} d=2 const:0");
        let run = options.run(&format!("c3/power/{label}"), paths);
        let report = martingale_tests_scaled(kind, &s, &ns, &run, 0.5)?;
        let z = report.max_abs_z(MartingaleTest::StratifiedIncrement);
        checks.push(Check::holds(
            format!("{label} halved correction, max |z| of stratified increments"),
            z,
            z > BAND,
            "> 3",
        ));
    }
    Ok(checks)
}

fn coupling(options: &VerifyOptions) -> Result<Vec<Check>> {
    let horizon = 1000;
    let mut checks = Vec::new();
    for kind in KINDS {
        for d in [1, 2] {
            for f in [Reinforcement::constant(1.0), Reinforcement::affine(0.5, 0.0)] {
                let s = spec(d, f)?;
                let label = format!("{kind} d={d} {}", s.reinforcement());
                let run = options.run(&format!("c4/{label}"), options.scale().coupled_pairs);
                let mismatches = collect(&run, "coupled", |_, rng| {
                    let (walk, direct) = coupled_pair(kind, &s, horizon, rng)?;
                    let via_tau = senile_from_timechange(&walk, horizon)?;
                    let mut bad = (1..=horizon)
                        .filter(|&n| via_tau.position(n) != direct.position(n))
                        .count() as u64;
                    let index = TimeIndex::from_path(&walk);
                    for m in 1..=walk.len() {
                        let tau = index.tau(m);
                        if tau <= horizon && direct.position(tau) != walk.position(m) {
                            bad += 1;
                        }
                    }
                    Ok(bad)
                })?;
                let total: u64 = mismatches.iter().sum();
                checks.push(Check::absolute(
                    format!("{label} mismatched positions over {} pairs", run.n_paths),
                    total as f64,
                    0.0,
                    0.0,
                ));
            }
        }
    }
    Ok(checks)
}

fn senile_constants(options: &VerifyOptions) -> Result<Vec<Check>> {
    let scale = options.scale();
    let s = spec(1, Reinforcement::constant(0.0))?;
    let mut checks = Vec::new();
    for kind in KINDS {
        let run = options.run(&format!("c5/{kind}"), scale.senile_paths);
        let r = estimate_msd(kind, Process::Senile, &s, scale.senile_n, &run)?;
        checks.push(Check::band(format!("{kind} d=1 const:0 {}", r.quantity), &r));
    }
    Ok(checks)
}

fn autocorrelation(options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (kind, k_max) in [(WalkKind::Persistent, 6), (WalkKind::Reinforced, 4)] {
        for d in 1..=3 {
            let s = spec(d, Reinforcement::constant(0.0))?;
            let label = format!("{kind} d={d} const:0");
            let run = options.run(&format!("c6/{label}"), options.scale().autocorr_paths);
            for r in direction_autocorrelation(kind, &s, 4, k_max, &run)? {
                checks.push(Check::band(format!("{label} {}", r.quantity), &r));
            }
        }
    }
    Ok(checks)
}

fn clt(options: &VerifyOptions) -> Result<Vec<Check>> {
    let scale = options.scale();
    let mut checks = Vec::new();
    for kind in KINDS {
        for d in [1, 2] {
            let s = spec(d, Reinforcement::constant(0.0))?;
            let label = format!("{kind} d={d} const:0");
            let run = options.run(&format!("c7/{label}"), scale.clt_paths);
            let report = clt_diagnostic(kind, &s, scale.clt_n, &[0.5, 1.0], KS_ALPHA, &run)?;
            for k in &report.ks {
                checks.push(Check {
                    label: format!("{label} {} (uncorrected {:.5})", k.quantity, k.statistic),
                    observed: k.lattice_statistic,
                    expected: None,
                    std_error: None,
                    z_score: None,
                    tolerance: format!("< {:.5}", k.critical_value),
                    passed: k.passed,
                });
            }
            for r in report.cross.iter().chain(&report.temporal) {
                checks.push(Check::band(format!("{label} {}", r.quantity), r));
            }
        }
    }
    Ok(checks)
}

fn subdiffusive(options: &VerifyOptions) -> Result<Vec<Check>> {
    let s = spec(1, Reinforcement::affine(1.0, 0.0))?;
    let run = options.run("c8", options.scale().subdiffusive_paths);
    let report = subdiffusive_check(&s, &[100, 1000, 10_000], &run)?;
    let mut checks: Vec<Check> = report
        .reports
        .iter()
        .map(|r| {
            Check::holds(
                format!("reinforced d=1 affine:1,0 {} (SE {:.4})", r.quantity, r.std_error),
                r.estimate,
                true,
                "reported",
            )
        })
        .collect();
    checks.push(Check::holds(
        "estimates strictly decreasing",
        report.reports.last().map_or(f64::NAN, |r| r.estimate),
        report.decreasing == Some(true),
        "strict decrease",
    ));
    checks.push(Check::absolute(
        "runs truncated at the step-time cap",
        report.cap_breaches as f64,
        0.0,
        0.0,
    ));
    Ok(checks)
}

fn reproducibility(options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let s = spec(2, Reinforcement::constant(0.0))?;

    let base = RunConfig::new(derive_seed(options.seed, "c9"), 5000);
    let triples = |workers: usize| {
        accumulate(&base.with_workers(workers), "c9/msd", 2, |rng, acc| {
            let walk = generate_walk(WalkKind::Persistent, &s, 50, rng)?;
            acc[0].push(walk.squared_norm(50) as f64);
            acc[1].push(walk.total_time() as f64);
            Ok(())
        })
    };
    let one = triples(1)?;
    let four = triples(4)?;
    checks.push(Check::holds(
        "accumulator (count, sum, sum_sq) identical for 1 and 4 workers",
        one[0].sum,
        one == four,
        "bitwise",
    ));
    let msd = |workers: usize| {
        estimate_msd(WalkKind::Reinforced, Process::Senile, &s, 500, &base.with_workers(workers))
    };
    let (a, b) = (msd(1)?, msd(4)?);
    checks.push(Check::holds(
        "senile MSD report identical for 1 and 4 workers",
        a.estimate,
        a == b,
        "bitwise",
    ));

    let simulate = || -> Result<Vec<u8>> {
        let streams = StreamFactory::new(options.seed, "c9/simulate");
        let walks = (0..10)
            .map(|i| generate_walk(WalkKind::Persistent, &s, 100, &mut streams.stream(i)))
            .collect::<Result<Vec<_>>>()?;
        let mut buf = Vec::new();
        write_walk_csv(&mut buf, &walks)?;
        Ok(buf)
    };
    let (x, y) = (simulate()?, simulate()?);
    checks.push(Check::holds(
        "path CSV identical across two runs",
        x.len() as f64,
        x == y,
        "bytewise",
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_criterion_passes() {
        let r = run_criterion(2, &VerifyOptions::new(Suite::Quick, 1)).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.checks.len(), 6);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(10, &VerifyOptions::new(Suite::Quick, 1)).is_err());
        assert!("medium".parse::<Suite>().is_err());
        assert_eq!("quick".parse::<Suite>().unwrap(), Suite::Quick);
    }

    #[test]
    fn three_point_law() {
        let s = three_point_spec().unwrap();
        for (k, p) in [(1, 4.0 / 7.0), (2, 2.0 / 7.0), (3, 1.0 / 7.0), (4, 0.0)] {
            assert!((s.pmf(k) - p).abs() < 1e-15);
        }
    }
}
