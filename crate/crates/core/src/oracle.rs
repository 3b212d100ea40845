//! Exact expectations over every step sequence, for step-time laws with
//! finite support. Independent of the closed-form moment formulas.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::reinforcement::ReinforcementSpec;
use crate::walk::{Direction, Step, WalkKind};

/// Largest supported step time accepted by the enumeration.
pub const MAX_SUPPORT: u64 = 64;

fn support(spec: &ReinforcementSpec) -> Result<Vec<(u64, f64)>> {
    let end = (1..=MAX_SUPPORT + 1)
        .find(|&k| spec.tail_probability(k) == 0.0)
        .ok_or_else(|| {
            Error::InvalidSpec(format!(
                "enumeration needs a step time bounded by {MAX_SUPPORT}"
            ))
        })?;
    Ok((1..end).map(|k| (k, spec.pmf(k))).filter(|&(_, p)| p > 0.0).collect())
}

/// Every direction allowed after `last`, with its probability.
fn transitions(kind: WalkKind, d: usize, last: Option<Step>) -> Vec<(Direction, f64)> {
    let excluded = match (kind, last) {
        (_, None) => None,
        (WalkKind::Persistent, Some(s)) => Some(s.direction),
        (WalkKind::Reinforced, Some(s)) if s.length == 0 => Some(s.direction),
        (WalkKind::Reinforced, Some(s)) => Some(s.direction.reversed()),
    };
    let choices: Vec<Direction> = Direction::all(d).filter(|&e| Some(e) != excluded).collect();
    let p = 1.0 / choices.len() as f64;
    choices.into_iter().map(|e| (e, p)).collect()
}

/// Law of `W_n` as a map from position to probability.
pub fn walk_distribution(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    n: usize,
) -> Result<BTreeMap<Vec<i64>, f64>> {
    if kind == WalkKind::Reinforced && spec.dimension() == 1 && spec.always_odd() {
        return Err(Error::InvalidSpec("reinforced walk in d = 1 needs P(T odd) < 1".into()));
    }
    let times = support(spec)?;
    let mut out = BTreeMap::new();
    let mut position = vec![0i64; spec.dimension()];
    visit(kind, spec.dimension(), &times, n, None, 1.0, &mut position, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn visit(
    kind: WalkKind,
    d: usize,
    times: &[(u64, f64)],
    remaining: usize,
    last: Option<Step>,
    prob: f64,
    position: &mut Vec<i64>,
    out: &mut BTreeMap<Vec<i64>, f64>,
) {
    if remaining == 0 {
        *out.entry(position.clone()).or_insert(0.0) += prob;
        return;
    }
    for (direction, pd) in transitions(kind, d, last) {
        for &(time, pt) in times {
            let length = kind.length(time);
            direction.add_to(position, length as i64);
            let step = Step {
                direction,
                time,
                length,
            };
            visit(kind, d, times, remaining - 1, Some(step), prob * pd * pt, position, out);
            direction.add_to(position, -(length as i64));
        }
    }
}

/// `E(|W_n|^2)` by enumeration.
pub fn exhaustive_second_moment(kind: WalkKind, spec: &ReinforcementSpec, n: usize) -> Result<f64> {
    Ok(walk_distribution(kind, spec, n)?
        .iter()
        .map(|(x, p)| p * x.iter().map(|v| (v * v) as f64).sum::<f64>())
        .sum())
}
