use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use senile_walks::{Error, ReinforcementSpec, Result, Suite, WalkKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Persistent,
    Reinforced,
}

impl From<Model> for WalkKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Persistent => WalkKind::Persistent,
            Model::Reinforced => WalkKind::Reinforced,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Full,
    Quick,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Full => Suite::Full,
            SuiteArg::Quick => Suite::Quick,
        }
    }
}

/// Settings shared by every subcommand. Each can come from the `--config`
/// TOML file; flags win over the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Lattice dimension d.
    #[arg(long = "dim")]
    #[serde(alias = "dim")]
    pub dimension: Option<usize>,
    /// Reinforcement family: const:c, affine:a,b or table:PATH.
    #[arg(long = "f")]
    pub f: Option<String>,
    /// Master seed (default 1)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent paths (default 1)
    #[arg(long)]
    pub paths: Option<u64>,
    /// Macro-steps of the time-changed walk.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Unit-time horizon of the senile walk.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Comma-separated times for the scaled process, e.g. "0.1,0.5,1.0".
    #[arg(long)]
    pub tgrid: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Largest step time sampled before giving up.
    #[arg(long)]
    pub tcap: Option<u64>,
    #[arg(long, value_enum)]
    pub suite: Option<SuiteArg>,
    /// TOML file with any of the settings above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    /// Reads `--config` if given and lays the flags over it.
    pub fn resolve(flags: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut merged = match &flags.config {
            Some(path) => load(path)?,
            None => ExperimentConfig::default(),
        };
        overlay!(
            merged, flags, model, dimension, f, seed, paths, steps, horizon, tgrid, out, format,
            workers, tcap, suite
        );
        if merged.workers == Some(0) {
            return Err(Error::InvalidSpec("--workers must be positive".into()));
        }
        Ok(merged)
    }

    pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| Error::InvalidSpec(format!("missing required setting {name}")))
    }

    pub fn kind(&self) -> Result<WalkKind> {
        Ok(Self::require(&self.model, "--model")?.into())
    }

    pub fn spec(&self) -> Result<ReinforcementSpec> {
        let d = Self::require(&self.dimension, "--dim")?;
        let family = Self::require(&self.f, "--f")?;
        let spec = ReinforcementSpec::parse(d, &family)?;
        match self.tcap {
            Some(cap) => spec.with_t_cap(cap),
            None => Ok(spec),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn positive(value: Option<u64>, name: &str) -> Result<u64> {
        match Self::require(&value, name)? {
            0 => Err(Error::InvalidSpec(format!("{name} must be positive"))),
            v => Ok(v),
        }
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        let text = self.tgrid.as_deref().unwrap_or("0.5,1.0");
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad time {s:?} in --tgrid")))
            })
            .collect()
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if parsed == ExperimentConfig::default() {
        return Err(Error::InvalidSpec(format!(
            "configuration file {} sets no values",
            path.display()
        )));
    }
    Ok(parsed)
}
