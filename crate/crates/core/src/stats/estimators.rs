use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::WalkConstants;
use crate::reinforcement::{ReinforcementSpec, TimeLaw};
use crate::stats::engine::{accumulate, RunConfig};
use crate::stats::EstimateReport;
use crate::timechange::sample_senile_at;
use crate::walk::{StepSampler, WalkKind};

/// Which process an MSD estimate is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// `W_n`, one macro-step per run.
    TimeChanged,
    /// `S_n`, unit time.
    Senile,
}

fn check_grid(ns: &[u64]) -> Result<()> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "times must be a nonempty, positive, strictly increasing list".into(),
        ));
    }
    Ok(())
}

fn norm2(x: &[i64]) -> f64 {
    x.iter().map(|&v| (v * v) as f64).sum()
}

/// `E(|X_n|^2) / n` for one `n`.
pub fn estimate_msd(
    kind: WalkKind,
    process: Process,
    spec: &ReinforcementSpec,
    n: u64,
    config: &RunConfig,
) -> Result<EstimateReport> {
    Ok(estimate_msd_curve(kind, process, spec, &[n], config)?.remove(0))
}

/// `E(|X_n|^2) / n` along an increasing grid, from one set of paths.
///
/// The reference is the exact finite-`n` value for time-changed walks and
/// the limit `C / E(T)` for senile walks. Outside the diffusive regime the
/// reports carry no reference and a warning.
pub fn estimate_msd_curve(
    kind: WalkKind,
    process: Process,
    spec: &ReinforcementSpec,
    ns: &[u64],
    config: &RunConfig,
) -> Result<Vec<EstimateReport>> {
    check_grid(ns)?;
    StepSampler::new(kind, spec)?;
    let law = spec.time_law()?;
    let (reference, warning) = msd_reference(kind, process, &law);
    let label = format!("msd/{kind}/{process:?}");
    let acc = accumulate(config, &label, ns.len(), |rng, acc| {
        match process {
            Process::TimeChanged => {
                let mut sampler = StepSampler::new(kind, spec)?;
                let mut position = vec![0i64; spec.dimension()];
                let mut q = 0;
                for m in 1..=ns[ns.len() - 1] {
                    let step = sampler.next_step(rng)?;
                    step.direction.add_to(&mut position, step.length as i64);
                    if m == ns[q] {
                        acc[q].push(norm2(&position) / m as f64);
                        q += 1;
                    }
                }
            }
            Process::Senile => {
                let sample = sample_senile_at(kind, spec, ns, false, rng)?;
                let d = spec.dimension();
                for (q, &n) in ns.iter().enumerate() {
                    acc[q].push(norm2(&sample.positions[q * d..(q + 1) * d]) / n as f64);
                }
            }
        }
        Ok(())
    })?;
    ns.iter()
        .zip(&acc)
        .map(|(&n, a)| {
            let report = EstimateReport::from_accumulator(
                format!("msd_over_n_{n}"),
                a,
                reference.as_ref().map(|r| r(n)),
            )?;
            Ok(match &warning {
                Some(w) => report.with_warning(w.clone()),
                None => report,
            })
        })
        .collect()
}

type Reference = Box<dyn Fn(u64) -> f64>;

fn msd_reference(kind: WalkKind, process: Process, law: &TimeLaw) -> (Option<Reference>, Option<String>) {
    let constants = match WalkConstants::new(kind, law) {
        Ok(c) => c,
        Err(e) => return (None, Some(e.to_string())),
    };
    match process {
        Process::TimeChanged => (
            Some(Box::new(move |n| constants.exact_second_moment(n) / n as f64)),
            None,
        ),
        Process::Senile if constants.mean_time.is_finite() => {
            let limit = constants.senile_diffusion_constant();
            (Some(Box::new(move |_| limit)), None)
        }
        Process::Senile => (None, Some("E(T) = inf: the senile walk is subdiffusive".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdiffusiveReport {
    pub reports: Vec<EstimateReport>,
    /// Runs truncated at the step-time cap, over all paths.
    pub cap_breaches: u64,
    /// Strict decrease of the point estimates; `None` for a single time.
    pub decreasing: Option<bool>,
}

/// `E(|S^r_n|^2) / n` for a reinforced senile walk whose runs have infinite
/// mean, where the estimates should decrease towards 0. Use a grid spanning
/// at least a factor of 100. Runs longer than the cap are truncated and
/// counted rather than failing the check.
pub fn subdiffusive_check(
    spec: &ReinforcementSpec,
    ns: &[u64],
    config: &RunConfig,
) -> Result<SubdiffusiveReport> {
    check_grid(ns)?;
    let kind = WalkKind::Reinforced;
    StepSampler::new(kind, spec)?;
    let law = spec.time_law()?;
    let (reference, warning) = match WalkConstants::new(kind, &law) {
        Ok(c) if c.mean_time.is_finite() => (
            Some(c.senile_diffusion_constant()),
            Some("E(T) < inf: diffusive control case".to_string()),
        ),
        Ok(_) => (None, None),
        Err(e) => (None, Some(e.to_string())),
    };
    let d = spec.dimension();
    let width = ns.len();
    let acc = accumulate(config, "subdiffusive", width + 1, |rng, acc| {
        let sample = sample_senile_at(kind, spec, ns, true, rng)?;
        for (q, &n) in ns.iter().enumerate() {
            acc[q].push(norm2(&sample.positions[q * d..(q + 1) * d]) / n as f64);
        }
        acc[width].push(sample.cap_breaches as f64);
        Ok(())
    })?;
    let reports = ns
        .iter()
        .zip(&acc)
        .map(|(&n, a)| {
            let r = EstimateReport::from_accumulator(format!("msd_over_n_{n}"), a, reference)?;
            Ok(match &warning {
                Some(w) => r.with_warning(w.clone()),
                None => r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = (reports.len() > 1)
        .then(|| reports.windows(2).all(|w| w[1].estimate < w[0].estimate));
    Ok(SubdiffusiveReport {
        reports,
        cap_breaches: acc[width].sum as u64,
        decreasing,
    })
}

/// Reference value of [`direction_autocorrelation`] at lag `k`.
pub fn autocorrelation_reference(kind: WalkKind, dimension: usize, p: f64, k: u32) -> f64 {
    let dd = 2.0 * dimension as f64 - 1.0;
    match (kind, k) {
        (WalkKind::Persistent, _) => (-1.0 / dd).powi(k as i32),
        (WalkKind::Reinforced, 0) => p,
        (WalkKind::Reinforced, _) => p * p / dd * ((2.0 * p - 1.0) / dd).powi(k as i32 - 1),
    }
}

/// `E(D_m . D_{m+k})` (persistent) or `E(D_m . D_{m+k} L_m L_{m+k})`
/// (reinforced) for `k = 0..=k_max`.
pub fn direction_autocorrelation(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    m: usize,
    k_max: usize,
    config: &RunConfig,
) -> Result<Vec<EstimateReport>> {
    if m == 0 || k_max == 0 {
        return Err(Error::InvalidSpec("need m >= 1 and k_max >= 1".into()));
    }
    StepSampler::new(kind, spec)?;
    let p = match kind {
        WalkKind::Persistent => 0.0,
        WalkKind::Reinforced => spec.time_law()?.p_odd,
    };
    let acc = accumulate(config, &format!("autocorr/{kind}"), k_max + 1, |rng, acc| {
        let mut sampler = StepSampler::new(kind, spec)?;
        let mut steps = Vec::with_capacity(m + k_max);
        for _ in 0..m + k_max {
            steps.push(sampler.next_step(rng)?);
        }
        let base = steps[m - 1];
        for (k, a) in acc.iter_mut().enumerate() {
            let other = steps[m - 1 + k];
            let mut x = base.direction.dot(other.direction) as f64;
            if kind == WalkKind::Reinforced {
                x *= (base.length * other.length) as f64;
            }
            a.push(x);
        }
        Ok(())
    })?;
    acc.iter()
        .enumerate()
        .map(|(k, a)| {
            let reference = autocorrelation_reference(kind, spec.dimension(), p, k as u32);
            EstimateReport::from_accumulator(format!("autocorr_{k}"), a, Some(reference))
        })
        .collect()
}

/// `tau^{-1}_n / n`, whose almost sure limit is `1 / E(T)`.
pub fn renewal_rate(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    n: u64,
    config: &RunConfig,
) -> Result<EstimateReport> {
    check_grid(&[n])?;
    StepSampler::new(kind, spec)?;
    let law = spec.time_law()?;
    let acc = accumulate(config, &format!("renewal/{kind}"), 1, |rng, acc| {
        let sample = sample_senile_at(kind, spec, &[n], false, rng)?;
        acc[0].push(sample.renewal_index[0] as f64 / n as f64);
        Ok(())
    })?;
    EstimateReport::from_accumulator(
        format!("renewal_rate_{n}"),
        &acc[0],
        Some(1.0 / law.mean.as_f64()),
    )
}
