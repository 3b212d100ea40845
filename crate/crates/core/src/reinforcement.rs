//! Reinforcement functions and the law of the step time `T`.
//!
//! The walk repeats its current direction (persistent) or edge (reinforced)
//! after a run of length `l` with probability `(1 + f(l)) / (2d + f(l))`, so
//!
//! ```text
//! P(T >= 1) = 1,    P(T >= k) = prod_{l=1}^{k-1} (1 + f(l)) / (2d + f(l)).
//! ```

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_T_CAP: u64 = 10_000_000;
pub const DEFAULT_MOMENT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;

/// The reinforcement function `f: N -> [-1, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Reinforcement {
    Constant { value: f64 },
    /// `f(l) = slope * l + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `f(l) = values[l - 1]`, with the last value extended to all larger `l`.
    Table { values: Vec<f64> },
}

impl Reinforcement {
    pub fn constant(value: f64) -> Self {
        Reinforcement::Constant { value }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Reinforcement::Affine { slope, intercept }
    }

    pub fn table(values: Vec<f64>) -> Self {
        Reinforcement::Table { values }
    }

    /// Parses `const:c`, `affine:a,b` or `table:PATH`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with(s, |path| {
            std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read table file {path}: {e}")))
        })
    }

    /// Like [`Reinforcement::parse`] but with a caller-supplied table loader.
    pub fn parse_with<F>(s: &str, load_table: F) -> Result<Self>
    where
        F: FnOnce(&str) -> Result<String>,
    {
        let (family, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected FAMILY:ARGS, got {s:?}")))?;
        match family {
            "const" => Ok(Reinforcement::constant(parse_f64(args)?)),
            "affine" => {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("affine expects a,b, got {args:?}")))?;
                Ok(Reinforcement::affine(parse_f64(a)?, parse_f64(b)?))
            }
            "table" => Self::parse_table(&load_table(args.trim())?),
            other => Err(Error::Parse(format!("unknown reinforcement family {other:?}"))),
        }
    }

    /// One `f(l)` value per line; blank lines and `#` comments are skipped.
    pub fn parse_table(contents: &str) -> Result<Self> {
        let values = contents
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(parse_f64)
            .collect::<Result<Vec<_>>>()?;
        Ok(Reinforcement::table(values))
    }

    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_table(&std::fs::read_to_string(path)?)
    }

    /// The table reproducing a finitely supported step-time law `P(T = k) = pmf[k - 1]`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
    pub fn from_step_time_pmf(pmf: &[f64], dimension: usize) -> Result<Self> {
        let total: f64 = pmf.iter().sum();
        if pmf.is_empty() || pmf.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(
                "step-time pmf must be nonnegative and sum to 1".into(),
            ));
        }
        let two_d = 2.0 * dimension as f64;
        let mut tail = 1.0;
        let mut values = Vec::with_capacity(pmf.len());
        for (i, p) in pmf.iter().enumerate() {
            let next = if i + 1 == pmf.len() { 0.0 } else { (tail - p).max(0.0) };
            let q = next / tail;
            if q >= 1.0 {
                return Err(Error::InvalidSpec(format!(
                    "P(T = {}) = 0 inside the support cannot be produced by a finite f",
                    i + 1
                )));
            }
            values.push((two_d * q - 1.0) / (1.0 - q));
            if next == 0.0 {
                break;
            }
            tail = next;
        }
        Ok(Reinforcement::table(values))
    }

    pub fn value(&self, l: u64) -> f64 {
        match self {
            Reinforcement::Constant { value } => *value,
            Reinforcement::Affine { slope, intercept } => {
                let v = slope * l as f64 + intercept;
                // decreasing affine f is only valid when it lands on -1; absorb rounding there
                if *slope < 0.0 && v < -1.0 + 1e-9 {
                    -1.0
                } else {
                    v
                }
            }
            Reinforcement::Table { values } => {
                let idx = (l.max(1) as usize).min(values.len()) - 1;
                values[idx]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            Reinforcement::Constant { value } => {
                if !value.is_finite() || *value < -1.0 {
                    return bad(format!("constant f = {value} must be finite and >= -1"));
                }
            }
            Reinforcement::Table { values } => {
                if values.is_empty() {
                    return bad("table reinforcement needs at least one value".into());
                }
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !v.is_finite() || **v < -1.0)
                {
                    return bad(format!("f({}) = {v} must be finite and >= -1", i + 1));
                }
            }
            Reinforcement::Affine { slope, intercept } => {
                if !slope.is_finite() || !intercept.is_finite() {
                    return bad("affine coefficients must be finite".into());
                }
                if slope + intercept < -1.0 {
                    return bad(format!("f(1) = {} < -1", slope + intercept));
                }
                if *slope < 0.0 {
                    // f decreases past -1 eventually; only valid if it hits -1 exactly,
                    // which truncates T before any f(l) < -1 matters
                    let l0 = (-1.0 - intercept) / slope;
                    if (l0 - l0.round()).abs() > 1e-9 * l0.abs().max(1.0) {
                        return bad(format!(
                            "decreasing affine f crosses -1 at non-integer l = {l0}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn nondecreasing(&self) -> bool {
        match self {
            Reinforcement::Constant { .. } => true,
            Reinforcement::Affine { slope, .. } => *slope >= 0.0,
            Reinforcement::Table { values } => values.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

impl fmt::Display for Reinforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reinforcement::Constant { value } => write!(f, "const:{value}"),
            Reinforcement::Affine { slope, intercept } => write!(f, "affine:{slope},{intercept}"),
            Reinforcement::Table { values } => write!(f, "table[{} values]", values.len()),
        }
    }
}

/// `E(T)` and `E(T^2)` when `q(l) = 1 - gamma/(l + beta)` for all `l >= 1`.
///
/// Then `P(T >= k) = G(k + beta - gamma) G(1 + beta) / (G(1 + beta - gamma) G(k + beta))`
/// and `sum_{k>=1} G(k + a) / G(k + b) = G(1 + a) / ((b - a - 1) G(b))`, which
/// gives `E(T) = beta / (gamma - 1)` and
/// `sum k P(T >= k) = beta (1 + beta - gamma) / (gamma - 2) - (beta - gamma) E(T)`.
fn power_law_moments(gamma: f64, beta: f64) -> (Option<f64>, Option<f64>) {
    if gamma <= 1.0 {
        return (None, None);
    }
    let mean = beta / (gamma - 1.0);
    if gamma <= 2.0 {
        return (Some(mean), None);
    }
    let first = beta * (1.0 + beta - gamma) / (gamma - 2.0) - (beta - gamma) * mean;
    (Some(mean), Some(2.0 * first - mean))
}

fn uncertified(r1: f64, r2: f64, rp: f64, tol: f64) -> &'static str {
    if r1 >= tol {
        "E(T)"
    } else if r2 >= tol {
        "E(T^2)"
    } else {
        debug_assert!(rp >= tol);
        "P(T odd)"
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

/// Reinforcement function together with the lattice dimension and the
/// sampling cap. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReinforcementSpec {
    dimension: usize,
    f: Reinforcement,
    t_cap: u64,
}

impl ReinforcementSpec {
    pub fn new(dimension: usize, f: Reinforcement) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if dimension > i32::MAX as usize / 2 {
            return Err(Error::InvalidSpec(format!("dimension {dimension} too large")));
        }
        f.validate()?;
        Ok(ReinforcementSpec {
            dimension,
            f,
            t_cap: DEFAULT_T_CAP,
        })
    }

    pub fn parse(dimension: usize, family: &str) -> Result<Self> {
        Self::new(dimension, Reinforcement::parse(family)?)
    }

    pub fn with_t_cap(mut self, t_cap: u64) -> Result<Self> {
        if t_cap == 0 {
            return Err(Error::InvalidSpec("t_cap must be positive".into()));
        }
        self.t_cap = t_cap;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn reinforcement(&self) -> &Reinforcement {
        &self.f
    }

    pub fn t_cap(&self) -> u64 {
        self.t_cap
    }

    /// Probability of repeating after a run of length `l`.
    #[inline]
    pub fn continuation(&self, l: u64) -> f64 {
        let f = self.f.value(l);
        let two_d = 2.0 * self.dimension as f64;
        ((1.0 + f) / (two_d + f)).clamp(0.0, 1.0)
    }

    /// `T` is odd almost surely exactly when `f(1) = -1` (then `T = 1`):
    /// otherwise `P(T = 2) = q(1) (1 - q(2)) > 0` because `q < 1` everywhere.
    pub fn always_odd(&self) -> bool {
        self.continuation(1) == 0.0
    }

    /// `P(T >= k)`; equals 1 for `k <= 1`.
    pub fn tail_probability(&self, k: u64) -> f64 {
        let mut tail = 1.0;
        for l in 1..k {
            tail *= self.continuation(l);
            if tail == 0.0 {
                break;
            }
        }
        tail
    }

    /// `P(T = k)`; zero for `k = 0`.
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let tail = self.tail_probability(k);
        tail * (1.0 - self.continuation(k))
    }

    /// Samples `T` by running the continuation coin from `l = 1`.
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        match self.sample_time_censored(rng) {
            (t, false) => Ok(t),
            (_, true) => Err(Error::CapExceeded { cap: self.t_cap }),
        }
    }

    /// Samples `T`, truncating at `t_cap`. The flag reports a breach (`T > t_cap`).
    pub fn sample_time_censored<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, bool) {
        let mut t = 1;
        loop {
            if rng.gen::<f64>() >= self.continuation(t) {
                return (t, false);
            }
            if t == self.t_cap {
                return (t, true);
            }
            t += 1;
        }
    }

    pub fn time_law(&self) -> Result<TimeLaw> {
        self.time_law_with(DEFAULT_MOMENT_TOL, DEFAULT_MAX_TERMS)
    }

    /// Computes `E(T)`, `E(T^2)` and `P(T odd)` by truncated summation,
    /// stopping once a rigorous remainder bound drops below `tol`. For
    /// increasing affine `f` the first two moments are exact instead (see
    /// [`power_law_moments`]) and only `P(T odd)` is summed.
    ///
    /// Uses `E(T) = sum P(T >= k)`, `E(T^2) = sum (2k - 1) P(T >= k)` and
    /// `P(T odd) = sum (-1)^(k+1) P(T >= k)`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
    pub fn time_law_with(&self, tol: f64, max_terms: u64) -> Result<TimeLaw> {
        if !(tol > 0.0) {
            return Err(Error::InvalidSpec(format!("tolerance {tol} must be positive")));
        }
        let envelope = self.envelope();
        let (mean_infinite, second_infinite) = match envelope {
            Envelope::PowerLaw { gamma, .. } => (gamma <= 1.0, gamma <= 2.0),
            _ => (false, false),
        };
        let mut tail = 1.0f64;
        let mut s1 = 0.0f64;
        let mut s2 = 0.0f64;
        let mut alt = 0.0f64;
        let mut k = 0u64;
        let mut pending = "E(T)";
        loop {
            k += 1;
            let kf = k as f64;
            s1 += tail;
            s2 += (2.0 * kf - 1.0) * tail;
            if k % 2 == 1 {
                alt += tail;
            } else {
                alt -= tail;
            }
            let t = tail * self.continuation(k);
            if t == 0.0 {
                return Ok(self.finish(s1, s2, alt, k, false, false));
            }
            match envelope {
                Envelope::Geometric { from, rho } if k + 1 >= from => {
                    let r1 = t / (1.0 - rho);
                    let r2 = t * ((2.0 * kf + 1.0) / (1.0 - rho) + 2.0 * rho / (1.0 - rho).powi(2));
                    if r1 < tol && r2 < tol && t < tol {
                        return Ok(self.finish(s1, s2, alt, k, false, false));
                    }
                    pending = uncertified(r1, r2, t, tol);
                }
                Envelope::PowerLaw { gamma, beta } => {
                    // tail is convex for nondecreasing f: the alternating remainder
                    // lies in [t/2, (t + pmf)/2]; take the midpoint
                    let pmf_next = t * (1.0 - self.continuation(k + 1));
                    if pmf_next / 4.0 < tol {
                        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                        let alt = alt + sign * (t / 2.0 + pmf_next / 4.0);
                        let mut law = self.finish(s1, s2, alt, k, mean_infinite, second_infinite);
                        let (mean, second) = power_law_moments(gamma, beta);
                        if let Some(m) = mean {
                            law.mean = Moment::Finite(m);
                        }
                        if let Some(m) = second {
                            law.second_moment = Moment::Finite(m);
                        }
                        return Ok(law);
                    }
                    pending = "P(T odd)";
                }
                _ => {}
            }
            tail = t;
            if k >= max_terms {
                return Err(Error::IndeterminateMoment {
                    moment: pending,
                    terms: max_terms,
                });
            }
        }
    }

    fn finish(
        &self,
        s1: f64,
        s2: f64,
        alt: f64,
        k: u64,
        mean_infinite: bool,
        second_infinite: bool,
    ) -> TimeLaw {
        TimeLaw {
            spec: self.clone(),
            mean: if mean_infinite { Moment::Infinite } else { Moment::Finite(s1) },
            second_moment: if second_infinite {
                Moment::Infinite
            } else {
                Moment::Finite(s2)
            },
            p_odd: alt.clamp(0.0, 1.0),
            truncation_index: k,
        }
    }

    fn envelope(&self) -> Envelope {
        let two_d = 2.0 * self.dimension as f64;
        let q = |f: f64| ((1.0 + f) / (two_d + f)).clamp(0.0, 1.0);
        match &self.f {
            Reinforcement::Constant { value } => Envelope::Geometric {
                from: 1,
                rho: q(*value),
            },
            Reinforcement::Table { values } => Envelope::Geometric {
                from: values.len() as u64,
                rho: q(*values.last().expect("validated nonempty")),
            },
            Reinforcement::Affine { slope, intercept } if *slope == 0.0 => Envelope::Geometric {
                from: 1,
                rho: q(*intercept),
            },
            Reinforcement::Affine { slope, .. } if *slope < 0.0 => Envelope::Terminating,
            Reinforcement::Affine { slope, intercept } => {
                debug_assert!(self.f.nondecreasing());
                Envelope::PowerLaw {
                    gamma: (two_d - 1.0) / slope,
                    beta: (two_d + intercept) / slope,
                }
            }
        }
    }
}

/// How `P(T >= k)` decays, used to bound truncated moment sums.
#[derive(Clone, Copy, Debug)]
enum Envelope {
    /// `q(l) <= rho < 1` for every `l >= from`.
    Geometric { from: u64, rho: f64 },
    /// `q(l) = 1 - gamma / (l + beta)`, so `P(T >= k) ~ k^-gamma`.
    PowerLaw { gamma: f64, beta: f64 },
    /// `P(T >= k) = 0` for some finite `k`.
    Terminating,
}

/// Extended-real moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Moment::Finite(v) => write!(f, "{v}"),
            Moment::Infinite => write!(f, "inf"),
        }
    }
}

/// The derived law of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeLaw {
    pub spec: ReinforcementSpec,
    pub mean: Moment,
    pub second_moment: Moment,
    pub p_odd: f64,
    pub truncation_index: u64,
}

impl TimeLaw {
    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }
}
