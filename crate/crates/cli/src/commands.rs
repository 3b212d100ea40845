use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use senile_walks::io::{write_csv_records, write_json_lines, write_senile_csv, write_walk_csv};
use senile_walks::martingale::{exact_curve, ExactCurvePoint};
use senile_walks::stats::{collect, scaled_process_sample, RunConfig};
use senile_walks::{
    coupled_pair, generate_walk, generate_walk_until, run_criterion, run_suite, senile_direct,
    senile_from_timechange, to_martingale, Error, Moment, ReinforcementSpec, Result, Suite,
    VerifyOptions, VerifyReport, WalkConstants, WalkKind,
};

use crate::config::{ExperimentConfig, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Time-changed walk W, `--steps` macro-steps.
    Walk,
    /// Senile walk through the time change, `--horizon` unit steps.
    Senile,
    /// Senile walk by direct unit-time simulation.
    Direct,
    /// Both senile constructions from shared randomness, written to
    /// `<out>.timechange.csv` and `<out>.direct.csv`.
    Coupled,
    /// Martingale transform of the time-changed walk.
    Martingale,
    /// Scaled senile walk `Z^n_t` on `--tgrid`, with `n = --horizon`.
    Scaled,
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn moment_value(m: Moment) -> Value {
    match m {
        Moment::Finite(x) => json!(x),
        Moment::Infinite => json!("inf"),
    }
}

#[derive(Serialize)]
struct RegimeReport {
    regime: String,
    diffusion_constant: Option<f64>,
    senile_diffusion_constant: Option<f64>,
    correction: Option<f64>,
}

fn regime(kind: WalkKind, spec: &ReinforcementSpec, law: &senile_walks::TimeLaw) -> RegimeReport {
    if kind == WalkKind::Reinforced && spec.dimension() == 1 && spec.always_odd() {
        return RegimeReport {
            regime: "excluded: d = 1 and P(T odd) = 1".into(),
            diffusion_constant: None,
            senile_diffusion_constant: None,
            correction: None,
        };
    }
    match WalkConstants::new(kind, law) {
        Ok(c) => {
            let regime = if c.mean_time.is_finite() {
                "diffusive"
            } else {
                "subdiffusive senile walk: E(T) = inf"
            };
            RegimeReport {
                regime: regime.into(),
                diffusion_constant: Some(c.diffusion_constant),
                senile_diffusion_constant: Some(c.senile_diffusion_constant()),
                correction: Some(c.correction_coefficient),
            }
        }
        Err(e) => RegimeReport {
            regime: format!("not diffusive: {e}"),
            diffusion_constant: None,
            senile_diffusion_constant: None,
            correction: None,
        },
    }
}

pub fn moments(config: &ExperimentConfig) -> Result<()> {
    let spec = config.spec()?;
    let kinds: Vec<WalkKind> = match config.model {
        Some(m) => vec![m.into()],
        None => vec![WalkKind::Persistent, WalkKind::Reinforced],
    };
    let law = spec.time_law()?;
    let mut curve: Vec<ExactCurvePoint> = Vec::new();
    if let Some(steps) = config.steps {
        for &kind in &kinds {
            if let Ok(c) = WalkConstants::new(kind, &law) {
                if !(kind == WalkKind::Reinforced && spec.dimension() == 1 && spec.always_odd()) {
                    curve.extend(exact_curve(&c, &(1..=steps).collect::<Vec<_>>()));
                }
            }
        }
    }
    let mut out = output(&config.out)?;
    match config.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut regimes = serde_json::Map::new();
            for &kind in &kinds {
                regimes.insert(kind.name().into(), serde_json::to_value(regime(kind, &spec, &law))?);
            }
            let report = json!({
                "dimension": spec.dimension(),
                "f": spec.reinforcement().to_string(),
                "mean": moment_value(law.mean),
                "second_moment": moment_value(law.second_moment),
                "p_odd": law.p_odd,
                "truncation_index": law.truncation_index,
                "regimes": regimes,
            });
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            write_json_lines(&mut out, &curve)?;
        }
        Format::Csv if config.steps.is_some() => write_csv_records(&mut out, &curve)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                dimension: usize,
                f: String,
                mean: f64,
                second_moment: f64,
                p_odd: f64,
            }
            let row = Row {
                dimension: spec.dimension(),
                f: spec.reinforcement().to_string(),
                mean: law.mean.as_f64(),
                second_moment: law.second_moment.as_f64(),
                p_odd: law.p_odd,
            };
            write_csv_records(&mut out, &[row])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn simulate(mode: Mode, config: &ExperimentConfig) -> Result<()> {
    let kind = config.kind()?;
    let spec = config.spec()?;
    senile_walks::walk::StepSampler::new(kind, &spec)?;
    let n_paths = ExperimentConfig::positive(config.paths.or(Some(1)), "--paths")?;
    let run = RunConfig {
        seed: config.seed(),
        n_paths,
        workers: config.workers,
    };
    let format = config.format.unwrap_or(Format::Csv);
    let label = format!("simulate/{mode:?}");
    match mode {
        Mode::Walk => {
            let steps = ExperimentConfig::positive(config.steps, "--steps")?;
            let walks = collect(&run, &label, |_, rng| generate_walk(kind, &spec, steps as usize, rng))?;
            write_with(&config.out, format, |w| write_walk_csv(w, &walks), &walks)
        }
        Mode::Senile | Mode::Direct => {
            let horizon = ExperimentConfig::positive(config.horizon, "--horizon")?;
            let paths = collect(&run, &label, |_, rng| {
                if mode == Mode::Senile {
                    senile_from_timechange(&generate_walk_until(kind, &spec, horizon, rng)?, horizon)
                } else {
                    senile_direct(kind, &spec, horizon, rng)
                }
            })?;
            write_with(&config.out, format, |w| write_senile_csv(w, &paths), &paths)
        }
        Mode::Coupled => {
            let horizon = ExperimentConfig::positive(config.horizon, "--horizon")?;
            let prefix = config
                .out
                .clone()
                .ok_or_else(|| Error::InvalidSpec("coupled mode needs --out as a file prefix".into()))?;
            let pairs = collect(&run, &label, |_, rng| {
                let (walk, direct) = coupled_pair(kind, &spec, horizon, rng)?;
                Ok((senile_from_timechange(&walk, horizon)?, direct))
            })?;
            let (via_tau, direct): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "jsonl",
            };
            for (name, paths) in [("timechange", &via_tau), ("direct", &direct)] {
                let path = with_suffix(&prefix, &format!("{name}.{ext}"));
                write_with(&Some(path), format, |w| write_senile_csv(w, paths), paths)?;
            }
            Ok(())
        }
        Mode::Martingale => {
            let steps = ExperimentConfig::positive(config.steps, "--steps")?;
            let constants = WalkConstants::new(kind, &spec.time_law()?)?;
            let rows = collect(&run, &label, |_, rng| {
                to_martingale(&generate_walk(kind, &spec, steps as usize, rng)?, &constants)
            })?;
            let d = spec.dimension();
            write_with(
                &config.out,
                format,
                |w| {
                    let mut csv = Vec::new();
                    for (p, m) in rows.iter().enumerate() {
                        for n in 1..=m.len() {
                            let mut row = vec![p.to_string(), n.to_string()];
                            row.extend(m.value(n).iter().map(|x| x.to_string()));
                            row.push(m.compensated_qv[n - 1].to_string());
                            csv.push(row);
                        }
                    }
                    let mut header = vec!["path".to_string(), "n".to_string()];
                    header.extend((1..=d).map(|i| format!("m{i}")));
                    header.push("compensated_qv".into());
                    write_table(w, &header, &csv)
                },
                &rows,
            )
        }
        Mode::Scaled => {
            let n = ExperimentConfig::positive(config.horizon, "--horizon")?;
            let sample = scaled_process_sample(kind, &spec, n, &config.t_grid()?, &run)?;
            write_with(
                &config.out,
                format,
                |w| {
                    let mut rows = Vec::new();
                    for p in 0..sample.n_paths {
                        for (k, t) in sample.t_grid.iter().enumerate() {
                            let mut row = vec![p.to_string(), t.to_string()];
                            row.extend((0..sample.dimension).map(|i| sample.value(p, k, i).to_string()));
                            rows.push(row);
                        }
                    }
                    let mut header = vec!["path".to_string(), "t".to_string()];
                    header.extend((1..=sample.dimension).map(|i| format!("z{i}")));
                    write_table(w, &header, &rows)
                },
                std::slice::from_ref(&sample),
            )
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn write_with<T: Serialize>(
    out: &Option<PathBuf>,
    format: Format,
    csv: impl FnOnce(&mut dyn Write) -> Result<()>,
    records: &[T],
) -> Result<()> {
    let mut w = output(out)?;
    match format {
        Format::Csv => csv(&mut w)?,
        Format::Json => write_json_lines(&mut w, records)?,
    }
    w.flush()?;
    Ok(())
}

fn write_table(w: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Runs the acceptance suite, or the criteria in `only`. Returns whether
/// every criterion passed.
pub fn verify(config: &ExperimentConfig, sabotage: bool, only: &[u8]) -> Result<bool> {
    let options = VerifyOptions {
        suite: config.suite.map(Suite::from).unwrap_or(Suite::Full),
        seed: config.seed(),
        workers: config.workers,
        sabotage,
    };
    let report = if only.is_empty() {
        run_suite(&options)?
    } else {
        let criteria = only
            .iter()
            .map(|&id| run_criterion(id, &options))
            .collect::<Result<Vec<_>>>()?;
        VerifyReport {
            suite: options.suite,
            seed: options.seed,
            sabotage,
            passed: criteria.iter().all(|c| c.passed),
            criteria,
        }
    };
    let mut stdout = io::stdout().lock();
    for c in &report.criteria {
        writeln!(stdout, "{c}")?;
        for check in c.checks.iter().filter(|k| !k.passed) {
            writeln!(
                stdout,
                "    failed: {} observed {} expected {} ({})",
                check.label,
                check.observed,
                check.expected.map_or("-".into(), |e| e.to_string()),
                check.tolerance
            )?;
        }
    }
    writeln!(stdout, "{}", if report.passed { "all criteria passed" } else { "verification failed" })?;
    if let Some(path) = &config.out {
        let mut w = BufWriter::new(File::create(path)?);
        match config.format.unwrap_or(Format::Json) {
            Format::Json => write_json_lines(&mut w, &report.criteria)?,
            Format::Csv => {
                #[derive(Serialize)]
                struct Row<'a> {
                    criterion: u8,
                    label: &'a str,
                    observed: f64,
                    expected: Option<f64>,
                    std_error: Option<f64>,
                    z_score: Option<f64>,
                    tolerance: &'a str,
                    passed: bool,
                }
                let rows: Vec<Row> = report
                    .criteria
                    .iter()
                    .flat_map(|c| {
                        c.checks.iter().map(move |k| Row {
                            criterion: c.id,
                            label: &k.label,
                            observed: k.observed,
                            expected: k.expected,
                            std_error: k.std_error,
                            z_score: k.z_score,
                            tolerance: &k.tolerance,
                            passed: k.passed,
                        })
                    })
                    .collect();
                write_csv_records(&mut w, &rows)?;
            }
        }
        w.flush()?;
    }
    Ok(report.passed)
}
