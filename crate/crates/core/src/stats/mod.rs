//! Monte Carlo estimators and statistical diagnostics.

pub mod accum;
pub mod clt;
pub mod engine;
pub mod estimators;
pub mod ks;
pub mod martingale_tests;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use accum::Accumulator;
pub use clt::{clt_diagnostic, scaled_process_sample, CltReport, KsCheck, ScaledProcessSample};
pub use engine::{accumulate, collect, RunConfig};
pub use estimators::{
    direction_autocorrelation, estimate_msd, estimate_msd_curve, renewal_rate, subdiffusive_check,
    Process, SubdiffusiveReport,
};
pub use ks::{ks_critical_value, ks_statistic, ks_statistic_lattice, normal_cdf};
pub use martingale_tests::{martingale_tests, MartingaleCheck, MartingaleReport, MartingaleTest};

/// Half-width of the acceptance band, in standard errors.
pub const BAND: f64 = 3.0;
/// Significance level of the KS tests.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub reference: Option<f64>,
    pub z_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl EstimateReport {
    pub fn from_accumulator(
        quantity: impl Into<String>,
        acc: &Accumulator,
        reference: Option<f64>,
    ) -> Result<Self> {
        if acc.count == 0 {
            return Err(Error::EmptySample);
        }
        let estimate = acc.mean();
        let std_error = acc.std_error();
        let z_score = reference.map(|r| {
            let diff = estimate - r;
            if std_error > 0.0 {
                diff / std_error
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        });
        Ok(EstimateReport {
            quantity: quantity.into(),
            estimate,
            std_error,
            n_samples: acc.count,
            reference,
            z_score,
            warning: None,
        })
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warning = Some(warning.into());
        self
    }

    /// Whether the estimate lies within `band` standard errors of the
    /// reference. A zero standard error requires agreement to 1e-12.
    pub fn within(&self, band: f64) -> Option<bool> {
        let r = self.reference?;
        Some(if self.std_error > 0.0 {
            (self.estimate - r).abs() <= band * self.std_error
        } else {
            (self.estimate - r).abs() < 1e-12
        })
    }
}
