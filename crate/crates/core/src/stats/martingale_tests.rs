//! Monte Carlo checks of the martingale transforms: mean-zero increments
//! (unconditionally and within each `(D_n, L_n)` stratum), constancy of the
//! compensated quadratic variation, and orthogonality of coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::{correction_scale, WalkConstants};
use crate::reinforcement::ReinforcementSpec;
use crate::stats::engine::{accumulate, RunConfig};
use crate::stats::{EstimateReport, BAND};
use crate::walk::{Direction, Step, StepSampler, WalkKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleTest {
    Increment,
    StratifiedIncrement,
    CompensatedQv,
    Orthogonality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    pub test: MartingaleTest,
    pub report: EstimateReport,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub kind: WalkKind,
    pub dimension: usize,
    pub correction_factor: f64,
    pub checks: Vec<MartingaleCheck>,
    /// Strata with fewer than two samples, which are not tested.
    pub skipped_strata: usize,
}

impl MartingaleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Largest `|z|` among the checks of one test.
    pub fn max_abs_z(&self, test: MartingaleTest) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.test == test)
            .filter_map(|c| c.report.z_score)
            .fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Runs the martingale checks at each `n` in `ns`.
pub fn martingale_tests(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    ns: &[u64],
    config: &RunConfig,
) -> Result<MartingaleReport> {
    martingale_tests_scaled(kind, spec, ns, config, 1.0)
}

/// As [`martingale_tests`], with the correction coefficient multiplied by
/// `correction_factor`. Any factor other than 1 breaks the martingale
/// property, which the stratified increment test should detect.
pub fn martingale_tests_scaled(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    ns: &[u64],
    config: &RunConfig,
    correction_factor: f64,
) -> Result<MartingaleReport> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "times must be a nonempty, positive, strictly increasing list".into(),
        ));
    }
    StepSampler::new(kind, spec)?;
    let constants = WalkConstants::new(kind, &spec.time_law()?)?.with_scaled_correction(correction_factor);
    let d = spec.dimension();
    let layout = Layout::new(kind, d, ns.len());
    let n_max = ns[ns.len() - 1];

    let acc = accumulate(config, &format!("martingale/{kind}"), layout.width(), |rng, acc| {
        let mut sampler = StepSampler::new(kind, spec)?;
        let mut w = vec![0i64; d];
        let mut prev_m = vec![0.0f64; d];
        let mut prev_step: Option<Step> = None;
        let mut m_vec = vec![0.0f64; d];
        let mut q = 0usize;
        let mut qv = vec![0.0f64; ns.len()];
        for n in 1..=n_max + 1 {
            let step = sampler.next_step(rng)?;
            step.direction.add_to(&mut w, step.length as i64);
            for (m, &x) in m_vec.iter_mut().zip(&w) {
                *m = x as f64;
            }
            let scale = correction_scale(kind, constants.correction_coefficient, step.length);
            m_vec[step.direction.axis()] += scale * step.direction.sign() as f64;

            if q < ns.len() && n == ns[q] + 1 {
                let last = prev_step.expect("n >= 2 here");
                let stratum = layout.stratum(kind, last);
                for i in 0..d {
                    let inc = m_vec[i] - prev_m[i];
                    acc[layout.increment(q, i)].push(inc);
                    acc[layout.stratified(q, stratum, i)].push(inc);
                }
                let mut pair = 0;
                for i in 0..d {
                    for j in i + 1..d {
                        acc[layout.orthogonality(q, pair)]
                            .push((m_vec[i] - prev_m[i]) * (m_vec[j] - prev_m[j]));
                        pair += 1;
                    }
                }
                q += 1;
            }
            if let Ok(k) = ns.binary_search(&n) {
                let norm2: f64 = m_vec.iter().map(|x| x * x).sum();
                qv[k] = norm2 - n as f64 * constants.diffusion_constant;
            }
            prev_m.copy_from_slice(&m_vec);
            prev_step = Some(step);
        }
        let mut pair = 0;
        for a in 0..ns.len() {
            for b in a + 1..ns.len() {
                acc[layout.qv(pair)].push(qv[b] - qv[a]);
                pair += 1;
            }
        }
        Ok(())
    })?;

    let mut checks = Vec::new();
    let mut skipped_strata = 0;
    let mut push = |test, report: EstimateReport| {
        let passed = report.within(BAND).unwrap_or(false);
        checks.push(MartingaleCheck { test, report, passed });
    };
    for (q, &n) in ns.iter().enumerate() {
        for i in 0..d {
            let a = &acc[layout.increment(q, i)];
            push(
                MartingaleTest::Increment,
                EstimateReport::from_accumulator(format!("increment_n{n}_coord{}", i + 1), a, Some(0.0))?,
            );
        }
    }
    for (q, &n) in ns.iter().enumerate() {
        for s in 0..layout.strata {
            let (dir, len) = layout.describe(kind, s);
            for i in 0..d {
                let a = &acc[layout.stratified(q, s, i)];
                if a.count < 2 {
                    skipped_strata += 1;
                    continue;
                }
                let label = match kind {
                    WalkKind::Persistent => format!("increment_n{n}_coord{}_given_D{dir}", i + 1),
                    WalkKind::Reinforced => {
                        format!("increment_n{n}_coord{}_given_D{dir}_L{len}", i + 1)
                    }
                };
                push(
                    MartingaleTest::StratifiedIncrement,
                    EstimateReport::from_accumulator(label, a, Some(0.0))?,
                );
            }
        }
    }
    let mut pair = 0;
    for a in 0..ns.len() {
        for b in a + 1..ns.len() {
            push(
                MartingaleTest::CompensatedQv,
                EstimateReport::from_accumulator(
                    format!("qv_diff_n{}_n{}", ns[a], ns[b]),
                    &acc[layout.qv(pair)],
                    Some(0.0),
                )?,
            );
            pair += 1;
        }
    }
    for (q, &n) in ns.iter().enumerate() {
        let mut pair = 0;
        for i in 0..d {
            for j in i + 1..d {
                push(
                    MartingaleTest::Orthogonality,
                    EstimateReport::from_accumulator(
                        format!("cross_increment_n{n}_coord{}{}", i + 1, j + 1),
                        &acc[layout.orthogonality(q, pair)],
                        Some(0.0),
                    )?,
                );
                pair += 1;
            }
        }
    }
    Ok(MartingaleReport {
        kind,
        dimension: d,
        correction_factor,
        checks,
        skipped_strata,
    })
}

/// Offsets of the accumulator groups.
struct Layout {
    d: usize,
    times: usize,
    strata: usize,
    pairs: usize,
}

impl Layout {
    fn new(kind: WalkKind, d: usize, times: usize) -> Self {
        let strata = match kind {
            WalkKind::Persistent => 2 * d,
            WalkKind::Reinforced => 4 * d,
        };
        Layout {
            d,
            times,
            strata,
            pairs: d * (d - 1) / 2,
        }
    }

    fn stratum(&self, kind: WalkKind, step: Step) -> usize {
        match kind {
            WalkKind::Persistent => step.direction.index(),
            WalkKind::Reinforced => 2 * step.direction.index() + step.length as usize,
        }
    }

    fn describe(&self, kind: WalkKind, stratum: usize) -> (Direction, usize) {
        match kind {
            WalkKind::Persistent => (Direction::from_index(stratum), 1),
            WalkKind::Reinforced => (Direction::from_index(stratum / 2), stratum % 2),
        }
    }

    fn increment(&self, q: usize, i: usize) -> usize {
        q * self.d + i
    }

    fn stratified(&self, q: usize, s: usize, i: usize) -> usize {
        self.times * self.d + (q * self.strata + s) * self.d + i
    }

    fn orthogonality(&self, q: usize, pair: usize) -> usize {
        self.times * self.d * (1 + self.strata) + q * self.pairs + pair
    }

    fn qv(&self, pair: usize) -> usize {
        self.times * (self.d * (1 + self.strata) + self.pairs) + pair
    }

    fn width(&self) -> usize {
        self.qv(self.times * self.times.saturating_sub(1) / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reinforcement::Reinforcement;

    #[test]
    fn layout_is_dense() {
        for kind in [WalkKind::Persistent, WalkKind::Reinforced] {
            for d in 1..=3 {
                let l = Layout::new(kind, d, 3);
                let mut seen = vec![false; l.width()];
                for q in 0..3 {
                    for i in 0..d {
                        seen[l.increment(q, i)] = true;
                        for s in 0..l.strata {
                            seen[l.stratified(q, s, i)] = true;
                        }
                    }
                    for p in 0..l.pairs {
                        seen[l.orthogonality(q, p)] = true;
                    }
                }
                for p in 0..3 {
                    seen[l.qv(p)] = true;
                }
                assert!(seen.iter().all(|&s| s), "{kind} d={d}");
            }
        }
    }

    #[test]
    fn small_run_passes_and_sabotage_is_detected() {
        let spec = ReinforcementSpec::new(1, Reinforcement::constant(0.0)).unwrap();
        let cfg = RunConfig::new(17, 20_000);
        let ok = martingale_tests(WalkKind::Persistent, &spec, &[1, 10], &cfg).unwrap();
        assert!(ok.max_abs_z(MartingaleTest::StratifiedIncrement) < 4.5, "{ok:#?}");
        assert_eq!(ok.skipped_strata, 0);
        let bad = martingale_tests_scaled(WalkKind::Persistent, &spec, &[1, 10], &cfg, 0.5).unwrap();
        assert!(bad.max_abs_z(MartingaleTest::StratifiedIncrement) > 10.0);
        assert!(!bad.passed());
    }

    #[test]
    fn rejects_bad_grid() {
        let spec = ReinforcementSpec::new(1, Reinforcement::constant(0.0)).unwrap();
        let cfg = RunConfig::new(1, 10);
        assert!(martingale_tests(WalkKind::Persistent, &spec, &[], &cfg).is_err());
        assert!(martingale_tests(WalkKind::Persistent, &spec, &[2, 1], &cfg).is_err());
    }
}
