//! Time-changed walks `W_n = sum_{m <= n} D_m L_m` on `Z^d`.
//!
//! Persistent kind: `L_m = T_m` and each direction differs from the previous
//! one. Reinforced kind: `L_m = 1(T_m odd)`; after a zero-length step the
//! direction may not repeat, after a unit step it may not reverse.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reinforcement::ReinforcementSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Persistent,
    Reinforced,
}

impl WalkKind {
    pub fn name(self) -> &'static str {
        match self {
            WalkKind::Persistent => "persistent",
            WalkKind::Reinforced => "reinforced",
        }
    }

    /// Step length associated with a step time.
    #[inline]
    pub fn length(self, time: u64) -> u64 {
        match self {
            WalkKind::Persistent => time,
            WalkKind::Reinforced => time & 1,
        }
    }
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WalkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "persistent" => Ok(WalkKind::Persistent),
            "reinforced" => Ok(WalkKind::Reinforced),
            other => Err(Error::Parse(format!(
                "unknown model {other:?} (expected persistent or reinforced)"
            ))),
        }
    }
}

/// Unit vector `±e_i`, stored as the signed axis `±i` with `i` in `1..=d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction(i32);

impl Direction {
    pub fn new(signed_axis: i32, dimension: usize) -> Result<Self> {
        let axis = signed_axis.unsigned_abs() as usize;
        if axis == 0 || axis > dimension {
            return Err(Error::InvalidSpec(format!(
                "signed axis {signed_axis} outside ±1..=±{dimension}"
            )));
        }
        Ok(Direction(signed_axis))
    }

    pub fn signed_axis(self) -> i32 {
        self.0
    }

    /// Zero-based coordinate index.
    #[inline]
    pub fn axis(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    #[inline]
    pub fn sign(self) -> i64 {
        if self.0 > 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn reversed(self) -> Self {
        Direction(-self.0)
    }

    /// Position in the enumeration `+e_1, -e_1, +e_2, -e_2, ...`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.axis() + usize::from(self.0 < 0)
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        let axis = (index / 2 + 1) as i32;
        Direction(if index.is_multiple_of(2) { axis } else { -axis })
    }

    pub fn all(dimension: usize) -> impl Iterator<Item = Direction> {
        (0..2 * dimension).map(Direction::from_index)
    }

    /// Dot product of two unit vectors.
    #[inline]
    pub fn dot(self, other: Direction) -> i64 {
        if self.axis() == other.axis() {
            self.sign() * other.sign()
        } else {
            0
        }
    }

    /// Adds `scale * self` to a position vector.
    #[inline]
    pub fn add_to(self, position: &mut [i64], scale: i64) {
        position[self.axis()] += self.sign() * scale;
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.0 > 0 { '+' } else { '-' };
        write!(f, "{s}e{}", self.0.unsigned_abs())
    }
}

/// Uniform over all `2d` unit vectors.
pub fn initial_direction<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> Direction {
    Direction::from_index(rng.gen_range(0..2 * dimension))
}

/// Uniform over the `2d - 1` unit vectors other than `excluded`, by index shifting.
#[inline]
pub fn uniform_excluding<R: Rng + ?Sized>(
    excluded: Direction,
    dimension: usize,
    rng: &mut R,
) -> Direction {
    if dimension == 1 {
        return excluded.reversed();
    }
    let j = rng.gen_range(0..2 * dimension - 1);
    let skip = excluded.index();
    Direction::from_index(if j >= skip { j + 1 } else { j })
}

pub fn next_direction_persistent<R: Rng + ?Sized>(
    prev: Direction,
    dimension: usize,
    rng: &mut R,
) -> Direction {
    uniform_excluding(prev, dimension, rng)
}

pub fn next_direction_reinforced<R: Rng + ?Sized>(
    prev: Direction,
    prev_length: u64,
    dimension: usize,
    rng: &mut R,
) -> Direction {
    if prev_length == 0 {
        uniform_excluding(prev, dimension, rng)
    } else {
        uniform_excluding(prev.reversed(), dimension, rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub direction: Direction,
    pub time: u64,
    pub length: u64,
}

/// Draws the `(D_m, T_m)` sequence of one walk, step by step.
///
/// Each step consumes the random stream in a fixed order: first the
/// direction, then the continuation coins of `T_m`. Every construction in
/// this crate that reads a stream follows the same order, which is what
/// makes coupled and streaming constructions agree exactly.
#[derive(Clone, Debug)]
pub struct StepSampler<'a> {
    kind: WalkKind,
    spec: &'a ReinforcementSpec,
    last: Option<Step>,
}

impl<'a> StepSampler<'a> {
    pub fn new(kind: WalkKind, spec: &'a ReinforcementSpec) -> Result<Self> {
        if kind == WalkKind::Reinforced && spec.dimension() == 1 && spec.always_odd() {
            return Err(Error::InvalidSpec(
                "reinforced walk with d = 1 and p = P(T odd) = 1 is excluded (the walk moves \
                 deterministically in one direction)"
                    .into(),
            ));
        }
        Ok(StepSampler {
            kind,
            spec,
            last: None,
        })
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn spec(&self) -> &'a ReinforcementSpec {
        self.spec
    }

    /// Draws the direction of the next step from the kernel.
    #[inline]
    pub fn next_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        let d = self.spec.dimension();
        match (self.kind, self.last) {
            (_, None) => initial_direction(d, rng),
            (WalkKind::Persistent, Some(prev)) => next_direction_persistent(prev.direction, d, rng),
            (WalkKind::Reinforced, Some(prev)) => {
                next_direction_reinforced(prev.direction, prev.length, d, rng)
            }
        }
    }

    /// Records a completed step.
    #[inline]
    pub fn commit(&mut self, direction: Direction, time: u64) -> Step {
        let step = Step {
            direction,
            time,
            length: self.kind.length(time),
        };
        self.last = Some(step);
        step
    }

    pub fn next_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let direction = self.next_direction(rng);
        let time = self.spec.sample_time(rng)?;
        Ok(self.commit(direction, time))
    }
}

/// One realization of a time-changed walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub kind: WalkKind,
    pub dimension: usize,
    pub steps: Vec<Step>,
    /// `W_0 = 0, W_1, ..., W_n`, flattened with stride `dimension`.
    positions: Vec<i64>,
}

impl WalkPath {
    pub fn new(kind: WalkKind, dimension: usize) -> Self {
        WalkPath {
            kind,
            dimension,
            steps: Vec::new(),
            positions: vec![0; dimension],
        }
    }

    /// Builds a path from explicit steps, computing `L_m` from `T_m`.
    pub fn from_primitives(
        kind: WalkKind,
        dimension: usize,
        primitives: &[(Direction, u64)],
    ) -> Self {
        let mut path = WalkPath::new(kind, dimension);
        for &(direction, time) in primitives {
            path.push(Step {
                direction,
                time,
                length: kind.length(time),
            });
        }
        path
    }

    pub fn push(&mut self, step: Step) {
        let start = self.positions.len() - self.dimension;
        self.positions.extend_from_within(start..);
        let end = self.positions.len();
        step.direction
            .add_to(&mut self.positions[end - self.dimension..], step.length as i64);
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `W_n` for `n` in `0..=len`.
    pub fn position(&self, n: usize) -> &[i64] {
        &self.positions[n * self.dimension..(n + 1) * self.dimension]
    }

    /// `m`-th step, 1-based.
    pub fn step(&self, m: usize) -> &Step {
        &self.steps[m - 1]
    }

    pub fn total_time(&self) -> u64 {
        self.steps.iter().map(|s| s.time).sum()
    }

    pub fn squared_norm(&self, n: usize) -> i64 {
        self.position(n).iter().map(|x| x * x).sum()
    }

    /// Checks the structural invariants of the path.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |m: usize, what: &str| Err(Error::Inconsistent(format!("step {m}: {what}")));
        for (i, step) in self.steps.iter().enumerate() {
            let m = i + 1;
            if step.direction.axis() >= self.dimension {
                return fail(m, "direction outside dimension");
            }
            if step.time == 0 || step.length != self.kind.length(step.time) {
                return fail(m, "length does not match time");
            }
            let mut expected = self.position(m - 1).to_vec();
            step.direction.add_to(&mut expected, step.length as i64);
            if expected != self.position(m) {
                return fail(m, "position is not previous position plus D L");
            }
            if i > 0 {
                let prev = self.steps[i - 1];
                let ok = match self.kind {
                    WalkKind::Persistent => step.direction != prev.direction,
                    WalkKind::Reinforced if prev.length == 0 => step.direction != prev.direction,
                    WalkKind::Reinforced => step.direction != prev.direction.reversed(),
                };
                if !ok {
                    return fail(m, "direction violates the kernel");
                }
            }
        }
        Ok(())
    }
}

/// Generates `n_steps` steps of a time-changed walk.
pub fn generate_walk<R: Rng + ?Sized>(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    n_steps: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    if n_steps == 0 {
        return Err(Error::InvalidSpec("n_steps must be at least 1".into()));
    }
    let mut sampler = StepSampler::new(kind, spec)?;
    let mut path = WalkPath::new(kind, spec.dimension());
    path.steps.reserve(n_steps);
    for _ in 0..n_steps {
        path.push(sampler.next_step(rng)?);
    }
    Ok(path)
}

/// Generates steps until the accumulated time `sum T_m` reaches `horizon`.
pub fn generate_walk_until<R: Rng + ?Sized>(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    horizon: u64,
    rng: &mut R,
) -> Result<WalkPath> {
    let mut sampler = StepSampler::new(kind, spec)?;
    let mut path = WalkPath::new(kind, spec.dimension());
    let mut elapsed = 0;
    while elapsed < horizon.max(1) {
        let step = sampler.next_step(rng)?;
        elapsed += step.time;
        path.push(step);
    }
    Ok(path)
}
