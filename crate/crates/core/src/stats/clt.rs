//! Finite-dimensional checks of the invariance principle for the senile
//! walks: `Z^n_t = sqrt(d E(T) / (n C)) S_{floor(nt)}` should be close to a
//! standard Brownian motion in `R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::WalkConstants;
use crate::reinforcement::ReinforcementSpec;
use crate::stats::accum::Accumulator;
use crate::stats::engine::{collect, RunConfig};
use crate::stats::ks::{ks_critical_value, ks_statistic, ks_statistic_lattice, normal_cdf};
use crate::stats::{EstimateReport, BAND};
use crate::timechange::sample_senile_at;
use crate::walk::{StepSampler, WalkKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledProcessSample {
    pub t_grid: Vec<f64>,
    pub dimension: usize,
    pub n_paths: usize,
    /// Spacing of the lattice carrying each coordinate of `Z^n_t`: `S_n`
    /// has the parity of `n` in `d = 1`, so the spacing is twice the scale
    /// there.
    pub lattice_spacing: f64,
    /// `Z^n_t(i)` at `[(path * t_grid.len() + t) * dimension + i]`.
    pub values: Vec<f64>,
}

impl ScaledProcessSample {
    pub fn value(&self, path: usize, t: usize, i: usize) -> f64 {
        self.values[(path * self.t_grid.len() + t) * self.dimension + i]
    }

    fn column(&self, t: usize, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_paths).map(move |p| self.value(p, t, i))
    }
}

/// Samples `Z^n_t` on `t_grid` for `config.n_paths` independent paths.
pub fn scaled_process_sample(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    n: u64,
    t_grid: &[f64],
    config: &RunConfig,
) -> Result<ScaledProcessSample> {
    if n == 0 {
        return Err(Error::InvalidSpec("n must be positive".into()));
    }
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0))
        || t_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidSpec(
            "t grid must be a nonempty, nonnegative, strictly increasing list".into(),
        ));
    }
    StepSampler::new(kind, spec)?;
    let constants = WalkConstants::new(kind, &spec.time_law()?)?;
    if !constants.mean_time.is_finite() {
        return Err(Error::Regime("E(T) < inf"));
    }
    let d = spec.dimension();
    let scale = (d as f64 * constants.mean_time / (n as f64 * constants.diffusion_constant)).sqrt();
    let units: Vec<u64> = t_grid.iter().map(|t| (n as f64 * t).floor() as u64).collect();
    let mut times: Vec<u64> = units.iter().copied().filter(|&u| u > 0).collect();
    times.dedup();

    let rows = collect(config, &format!("clt/{kind}"), |_, rng| {
        let sample = if times.is_empty() {
            None
        } else {
            Some(sample_senile_at(kind, spec, &times, false, rng)?)
        };
        let mut row = vec![0.0; units.len() * d];
        for (k, &u) in units.iter().enumerate() {
            if u == 0 {
                continue;
            }
            let q = times.binary_search(&u).expect("time is in the query list");
            let positions = &sample.as_ref().expect("queries were made").positions;
            for i in 0..d {
                row[k * d + i] = scale * positions[q * d + i] as f64;
            }
        }
        Ok(row)
    })?;
    Ok(ScaledProcessSample {
        t_grid: t_grid.to_vec(),
        dimension: d,
        n_paths: rows.len(),
        lattice_spacing: if d == 1 { 2.0 * scale } else { scale },
        values: rows.concat(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsCheck {
    pub quantity: String,
    pub t: f64,
    pub coordinate: usize,
    /// Distance to the continuous standard normal law.
    pub statistic: f64,
    /// Distance to the standard normal law discretised onto the lattice of
    /// the sample; this is what `passed` compares with the critical value.
    pub lattice_statistic: f64,
    pub critical_value: f64,
    pub n_samples: u64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub kind: WalkKind,
    pub dimension: usize,
    pub n: u64,
    pub ks: Vec<KsCheck>,
    /// `E(Z_t(i) Z_t(j))` for `i < j`, reference 0.
    pub cross: Vec<EstimateReport>,
    /// `E(Z_s(i) Z_t(i))` for `s < t`, reference `s`.
    pub temporal: Vec<EstimateReport>,
}

impl CltReport {
    pub fn passed(&self) -> bool {
        self.ks.iter().all(|k| k.passed)
            && self
                .cross
                .iter()
                .chain(&self.temporal)
                .all(|r| r.within(BAND).unwrap_or(false))
    }
}

/// KS tests of each coordinate of `Z_t / sqrt(t)` against the standard
/// normal law for every `t > 0` in the grid, plus cross-coordinate and
/// temporal covariances. Coordinates have mean zero by symmetry, so
/// covariances are estimated as means of products.
pub fn clt_diagnostic(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    n: u64,
    t_grid: &[f64],
    alpha: f64,
    config: &RunConfig,
) -> Result<CltReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidSpec(format!("significance level {alpha} must lie in (0, 1)")));
    }
    let sample = scaled_process_sample(kind, spec, n, t_grid, config)?;
    let d = sample.dimension;
    let critical_value = ks_critical_value(alpha, sample.n_paths);
    let mut ks = Vec::new();
    let mut cross = Vec::new();
    let mut temporal = Vec::new();
    for (k, &t) in t_grid.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        for i in 0..d {
            let mut xs: Vec<f64> = sample.column(k, i).map(|z| z / t.sqrt()).collect();
            xs.sort_by(f64::total_cmp);
            let statistic = ks_statistic(&xs, normal_cdf)?;
            let lattice_statistic =
                ks_statistic_lattice(&xs, normal_cdf, sample.lattice_spacing / t.sqrt())?;
            ks.push(KsCheck {
                quantity: format!("ks_stat_coord_{}_t{t}", i + 1),
                t,
                coordinate: i + 1,
                statistic,
                lattice_statistic,
                critical_value,
                n_samples: xs.len() as u64,
                passed: lattice_statistic < critical_value,
            });
            for j in i + 1..d {
                let acc: Accumulator = sample.column(k, i).zip(sample.column(k, j)).map(|(a, b)| a * b).collect();
                cross.push(EstimateReport::from_accumulator(
                    format!("cov_coord_{}_{}_t{t}", i + 1, j + 1),
                    &acc,
                    Some(0.0),
                )?);
            }
        }
        for (l, &s) in t_grid[..k].iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..d {
                let acc: Accumulator = sample.column(l, i).zip(sample.column(k, i)).map(|(a, b)| a * b).collect();
                temporal.push(EstimateReport::from_accumulator(
                    format!("cov_coord_{}_s{s}_t{t}", i + 1),
                    &acc,
                    Some(s),
                )?);
            }
        }
    }
    Ok(CltReport {
        kind,
        dimension: d,
        n,
        ks,
        cross,
        temporal,
    })
}
