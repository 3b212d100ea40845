//! Diffusion constants, exact finite-`n` second moments, and the martingale
//! transforms of the time-changed walks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reinforcement::TimeLaw;
use crate::walk::{WalkKind, WalkPath};

const NEED_SECOND_MOMENT: &str = "E(T^2) < inf";
const NEED_P_BELOW_ONE: &str = "p = P(T odd) < 1 when d = 1";

/// Constants of one walk kind under one step-time law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConstants {
    pub kind: WalkKind,
    pub dimension: usize,
    /// `E(T)`, or `+inf`.
    pub mean_time: f64,
    /// `E(T^2)`, or `+inf`.
    pub second_moment_time: f64,
    pub p_odd: f64,
    pub diffusion_constant: f64,
    /// `E(T)/(2d)` (persistent) or `p/(2(d - p))` (reinforced).
    pub correction_coefficient: f64,
}

impl WalkConstants {
    pub fn new(kind: WalkKind, law: &TimeLaw) -> Result<Self> {
        let dimension = law.dimension();
        let d = dimension as f64;
        let mean_time = law.mean.as_f64();
        let second_moment_time = law.second_moment.as_f64();
        let p = law.p_odd;
        let correction_coefficient = match kind {
            WalkKind::Persistent => mean_time / (2.0 * d),
            WalkKind::Reinforced => p / (2.0 * (d - p)),
        };
        Ok(WalkConstants {
            kind,
            dimension,
            mean_time,
            second_moment_time,
            p_odd: p,
            diffusion_constant: diffusion_constant(kind, law)?,
            correction_coefficient,
        })
    }

    /// Same constants with the martingale correction scaled by `factor`.
    /// Only useful to check that the martingale tests have power.
    pub fn with_scaled_correction(&self, factor: f64) -> Self {
        WalkConstants {
            correction_coefficient: self.correction_coefficient * factor,
            ..self.clone()
        }
    }

    /// `C / E(T)`, the diffusion constant of the senile walk (0 when `E(T) = inf`).
    pub fn senile_diffusion_constant(&self) -> f64 {
        if self.mean_time.is_finite() {
            self.diffusion_constant / self.mean_time
        } else {
            0.0
        }
    }

    pub fn exact_second_moment(&self, n: u64) -> f64 {
        exact_second_moment_raw(
            self.kind,
            self.dimension,
            self.mean_time,
            self.second_moment_time,
            self.p_odd,
            n,
        )
    }
}

/// `C^p = (d E(T^2) - E(T)^2) / d` or `C^r = d p / (d - p)`.
pub fn diffusion_constant(kind: WalkKind, law: &TimeLaw) -> Result<f64> {
    let d = law.dimension() as f64;
    match kind {
        WalkKind::Persistent => {
            let m1 = law.mean.finite().ok_or(Error::Regime(NEED_SECOND_MOMENT))?;
            let m2 = law
                .second_moment
                .finite()
                .ok_or(Error::Regime(NEED_SECOND_MOMENT))?;
            Ok((d * m2 - m1 * m1) / d)
        }
        WalkKind::Reinforced => {
            let p = law.p_odd;
            if law.dimension() == 1 && p >= 1.0 {
                return Err(Error::Regime(NEED_P_BELOW_ONE));
            }
            Ok(d * p / (d - p))
        }
    }
}

/// Exact `E|W_n|^2` for every `n >= 1`.
pub fn exact_second_moment(kind: WalkKind, law: &TimeLaw, n: u64) -> Result<f64> {
    diffusion_constant(kind, law)?;
    Ok(exact_second_moment_raw(
        kind,
        law.dimension(),
        law.mean.as_f64(),
        law.second_moment.as_f64(),
        law.p_odd,
        n,
    ))
}

fn exact_second_moment_raw(
    kind: WalkKind,
    dimension: usize,
    m1: f64,
    m2: f64,
    p: f64,
    n: u64,
) -> f64 {
    let d = dimension as f64;
    let nf = n as f64;
    match kind {
        WalkKind::Persistent => {
            let rho = -1.0 / (2.0 * d - 1.0);
            nf * m2 - m1 * m1 * (nf / d + (2.0 * d - 1.0) / (2.0 * d * d) * (pow(rho, n) - 1.0))
        }
        WalkKind::Reinforced => {
            let rho = (2.0 * p - 1.0) / (2.0 * d - 1.0);
            nf * d * p / (d - p)
                + p * p * (2.0 * d - 1.0) / (2.0 * (d - p).powi(2)) * (pow(rho, n) - 1.0)
        }
    }
}

fn pow(x: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

/// Values `M_1..M_n` and `|M_n|^2 - n C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingalePath {
    pub kind: WalkKind,
    pub dimension: usize,
    /// Flattened with stride `dimension`; entry `n - 1` is `M_n`.
    pub values: Vec<f64>,
    pub compensated_qv: Vec<f64>,
}

impl MartingalePath {
    pub fn len(&self) -> usize {
        self.compensated_qv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compensated_qv.is_empty()
    }

    /// `M_n`, 1-based.
    pub fn value(&self, n: usize) -> &[f64] {
        &self.values[(n - 1) * self.dimension..n * self.dimension]
    }
}

/// Signed multiple of `D_n` added to `W_n`.
#[inline]
pub fn correction_scale(kind: WalkKind, coefficient: f64, length: u64) -> f64 {
    match kind {
        WalkKind::Persistent => -coefficient,
        WalkKind::Reinforced => coefficient * (2.0 * length as f64 - 1.0),
    }
}

/// `M_n = W_n - (E(T)/2d) D_n` or `M_n = W_n + (p/(2(d-p))) D_n (2 L_n - 1)`.
pub fn to_martingale(path: &WalkPath, constants: &WalkConstants) -> Result<MartingalePath> {
    if path.kind != constants.kind {
        return Err(Error::KindMismatch {
            expected: constants.kind.name(),
            found: path.kind.name(),
        });
    }
    if path.dimension != constants.dimension {
        return Err(Error::InvalidSpec(format!(
            "path dimension {} does not match constants dimension {}",
            path.dimension, constants.dimension
        )));
    }
    let d = path.dimension;
    let mut values = Vec::with_capacity(path.len() * d);
    let mut compensated_qv = Vec::with_capacity(path.len());
    for n in 1..=path.len() {
        let step = path.step(n);
        let start = values.len();
        values.extend(path.position(n).iter().map(|&x| x as f64));
        let scale = correction_scale(path.kind, constants.correction_coefficient, step.length);
        values[start + step.direction.axis()] += scale * step.direction.sign() as f64;
        let norm2: f64 = values[start..].iter().map(|x| x * x).sum();
        compensated_qv.push(norm2 - n as f64 * constants.diffusion_constant);
    }
    Ok(MartingalePath {
        kind: path.kind,
        dimension: d,
        values,
        compensated_qv,
    })
}

/// JSON record for constants and exact curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCurvePoint {
    pub kind: WalkKind,
    pub d: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub correction: f64,
    pub n: u64,
    pub exact_msd: f64,
}

pub fn exact_curve(constants: &WalkConstants, ns: &[u64]) -> Vec<ExactCurvePoint> {
    ns.iter()
        .map(|&n| ExactCurvePoint {
            kind: constants.kind,
            d: constants.dimension,
            c: constants.diffusion_constant,
            correction: constants.correction_coefficient,
            n,
            exact_msd: constants.exact_second_moment(n),
        })
        .collect()
}
