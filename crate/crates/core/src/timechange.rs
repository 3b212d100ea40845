//! Time change `tau_m = T_1 + ... + T_m`, its inverse, and the senile walks.
//!
//! The senile walks are built two ways: from a time-changed [`WalkPath`]
//! through `tau^{-1}`, and by direct unit-time simulation of the original
//! model (repeat the current direction/edge with probability
//! `(1 + f(n)) / (2d + f(n))` after a run of length `n`, otherwise choose
//! uniformly among the other `2d - 1` options). [`coupled_pair`] drives
//! both from the same primitives.
//!
//! Reinforced runs: `D_m` is the direction of the first traversal of the
//! edge used during run `m`. Inside the run the walk alternates between
//! `W_{m-1}` and `W_{m-1} + D_m`, so
//! `S_n = W_m - D_m (2 L_m - 1) 1(tau_m - n odd)` with `m = tau^{-1}_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reinforcement::ReinforcementSpec;
use crate::walk::{generate_walk_until, initial_direction, uniform_excluding};
use crate::walk::{Direction, StepSampler, WalkKind, WalkPath};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeIndex {
    partial_sums: Vec<u64>,
}

impl TimeIndex {
    pub fn from_times<I: IntoIterator<Item = u64>>(times: I) -> Result<Self> {
        let mut total = 0u64;
        let mut partial_sums = Vec::new();
        for t in times {
            if t == 0 {
                return Err(Error::InvalidSpec("step times must be positive".into()));
            }
            total += t;
            partial_sums.push(total);
        }
        Ok(TimeIndex { partial_sums })
    }

    pub fn from_path(path: &WalkPath) -> Self {
        let mut total = 0;
        TimeIndex {
            partial_sums: path
                .steps
                .iter()
                .map(|s| {
                    total += s.time;
                    total
                })
                .collect(),
        }
    }

    pub fn partial_sums(&self) -> &[u64] {
        &self.partial_sums
    }

    pub fn len(&self) -> usize {
        self.partial_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_sums.is_empty()
    }

    /// `tau_m` for `m` in `0..=len`, with `tau_0 = 0`.
    pub fn tau(&self, m: usize) -> u64 {
        if m == 0 {
            0
        } else {
            self.partial_sums[m - 1]
        }
    }

    pub fn horizon(&self) -> u64 {
        self.partial_sums.last().copied().unwrap_or(0)
    }

    /// `inf { m : tau_m >= n }`.
    pub fn tau_inverse(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.horizon() {
            return Err(Error::OutOfRange {
                n,
                horizon: self.horizon(),
            });
        }
        Ok(self.partial_sums.partition_point(|&s| s < n) + 1)
    }
}

/// Unit-time positions `S_0 = 0, S_1, ..., S_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenilePath {
    pub kind: WalkKind,
    pub dimension: usize,
    /// Flattened with stride `dimension`, including the origin.
    positions: Vec<i64>,
}

impl SenilePath {
    fn with_capacity(kind: WalkKind, dimension: usize, horizon: u64) -> Self {
        let mut positions = Vec::with_capacity((horizon as usize + 1) * dimension);
        positions.resize(dimension, 0);
        SenilePath {
            kind,
            dimension,
            positions,
        }
    }

    /// Number of unit steps `N`.
    pub fn horizon(&self) -> u64 {
        (self.positions.len() / self.dimension - 1) as u64
    }

    /// `S_n` for `n` in `0..=N`.
    pub fn position(&self, n: u64) -> &[i64] {
        let n = n as usize;
        &self.positions[n * self.dimension..(n + 1) * self.dimension]
    }

    pub fn squared_norm(&self, n: u64) -> i64 {
        self.position(n).iter().map(|x| x * x).sum()
    }

    /// Checks that consecutive positions are lattice neighbours.
    pub fn check_unit_steps(&self) -> Result<()> {
        for n in 1..=self.horizon() {
            let dist: i64 = self
                .position(n)
                .iter()
                .zip(self.position(n - 1))
                .map(|(a, b)| (a - b).abs())
                .sum();
            if dist != 1 {
                return Err(Error::Inconsistent(format!(
                    "|S_{n} - S_{}|_1 = {dist}",
                    n - 1
                )));
            }
        }
        Ok(())
    }
}

/// Position during run `m` after `offset` of its unit steps, given `W_{m-1}`.
#[inline]
pub(crate) fn position_in_run(
    kind: WalkKind,
    start: &[i64],
    direction: Direction,
    offset: u64,
    out: &mut [i64],
) {
    out.copy_from_slice(start);
    let travelled = match kind {
        WalkKind::Persistent => offset as i64,
        WalkKind::Reinforced => (offset & 1) as i64,
    };
    direction.add_to(out, travelled);
}

/// `S_1..S_horizon` from a time-changed path through `tau^{-1}`.
pub fn senile_from_timechange(path: &WalkPath, horizon: u64) -> Result<SenilePath> {
    let index = TimeIndex::from_path(path);
    if index.horizon() < horizon {
        return Err(Error::PathTooShort {
            needed: horizon,
            available: index.horizon(),
        });
    }
    let d = path.dimension;
    let mut senile = SenilePath::with_capacity(path.kind, d, horizon);
    let mut buf = vec![0i64; d];
    let mut m = 1usize;
    for n in 1..=horizon {
        while index.tau(m) < n {
            m += 1;
        }
        let step = path.step(m);
        let gap = index.tau(m) - n;
        buf.copy_from_slice(path.position(m));
        match path.kind {
            WalkKind::Persistent => step.direction.add_to(&mut buf, -(gap as i64)),
            WalkKind::Reinforced => {
                if gap % 2 == 1 {
                    step.direction
                        .add_to(&mut buf, -(2 * step.length as i64 - 1));
                }
            }
        }
        senile.positions.extend_from_slice(&buf);
    }
    Ok(senile)
}

/// Source of the randomness consumed by the direct unit-time simulation.
pub trait RunDriver {
    fn first_direction(&mut self) -> Result<Direction>;
    /// Whether the walk repeats after a run of length `run_length`.
    fn continue_run(&mut self, run_length: u64) -> Result<bool>;
    /// New direction, uniform over all but `excluded`.
    fn next_direction(&mut self, excluded: Direction) -> Result<Direction>;
}

/// Draws the direct simulation's choices from a random stream.
pub struct RandomDriver<'a, R: ?Sized> {
    spec: &'a ReinforcementSpec,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> RandomDriver<'a, R> {
    pub fn new(spec: &'a ReinforcementSpec, rng: &'a mut R) -> Self {
        RandomDriver { spec, rng }
    }
}

impl<R: Rng + ?Sized> RunDriver for RandomDriver<'_, R> {
    fn first_direction(&mut self) -> Result<Direction> {
        Ok(initial_direction(self.spec.dimension(), self.rng))
    }

    fn continue_run(&mut self, run_length: u64) -> Result<bool> {
        Ok(self.rng.gen::<f64>() < self.spec.continuation(run_length))
    }

    fn next_direction(&mut self, excluded: Direction) -> Result<Direction> {
        Ok(uniform_excluding(excluded, self.spec.dimension(), self.rng))
    }
}

/// Replays the `(T_m, D_m)` of a time-changed path in renewal order.
pub struct ReplayDriver<'a> {
    path: &'a WalkPath,
    run: usize,
}

impl<'a> ReplayDriver<'a> {
    pub fn new(path: &'a WalkPath) -> Self {
        ReplayDriver { path, run: 0 }
    }

    fn exhausted(&self) -> Error {
        Error::PathTooShort {
            needed: self.path.total_time() + 1,
            available: self.path.total_time(),
        }
    }
}

impl RunDriver for ReplayDriver<'_> {
    fn first_direction(&mut self) -> Result<Direction> {
        self.run = 0;
        self.path
            .steps
            .first()
            .map(|s| s.direction)
            .ok_or_else(|| self.exhausted())
    }

    fn continue_run(&mut self, run_length: u64) -> Result<bool> {
        Ok(run_length < self.path.steps[self.run].time)
    }

    fn next_direction(&mut self, excluded: Direction) -> Result<Direction> {
        self.run += 1;
        let step = self.path.steps.get(self.run).ok_or_else(|| self.exhausted())?;
        if step.direction == excluded {
            return Err(Error::Inconsistent(format!(
                "step {} direction {} is excluded by the unit-time model",
                self.run + 1,
                step.direction
            )));
        }
        Ok(step.direction)
    }
}

/// Direct unit-time simulation of a senile walk.
pub fn senile_direct<R: Rng + ?Sized>(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    horizon: u64,
    rng: &mut R,
) -> Result<SenilePath> {
    senile_direct_with(kind, spec.dimension(), horizon, &mut RandomDriver::new(spec, rng))
}

pub fn senile_direct_with<D: RunDriver + ?Sized>(
    kind: WalkKind,
    dimension: usize,
    horizon: u64,
    driver: &mut D,
) -> Result<SenilePath> {
    if horizon == 0 {
        return Err(Error::InvalidSpec("horizon must be at least 1".into()));
    }
    let mut senile = SenilePath::with_capacity(kind, dimension, horizon);
    let mut position = vec![0i64; dimension];
    let mut last = driver.first_direction()?;
    let mut run_length = 1u64;
    last.add_to(&mut position, 1);
    senile.positions.extend_from_slice(&position);
    for _ in 2..=horizon {
        // persistent walks repeat their direction, reinforced walks re-traverse
        // their edge, i.e. step back
        let repeat = match kind {
            WalkKind::Persistent => last,
            WalkKind::Reinforced => last.reversed(),
        };
        if driver.continue_run(run_length)? {
            last = repeat;
            run_length += 1;
        } else {
            last = driver.next_direction(repeat)?;
            run_length = 1;
        }
        last.add_to(&mut position, 1);
        senile.positions.extend_from_slice(&position);
    }
    Ok(senile)
}

/// Draws one primitive sequence and builds both the time-changed walk (which
/// covers `horizon`) and the directly simulated senile walk from it.
pub fn coupled_pair<R: Rng + ?Sized>(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    horizon: u64,
    rng: &mut R,
) -> Result<(WalkPath, SenilePath)> {
    let walk = generate_walk_until(kind, spec, horizon, rng)?;
    let direct = senile_direct_with(kind, spec.dimension(), horizon, &mut ReplayDriver::new(&walk))?;
    Ok((walk, direct))
}

/// Senile positions at selected times, with `tau^{-1}` at those times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SenileSample {
    /// Flattened with stride `d`, one row per query time.
    pub positions: Vec<i64>,
    pub renewal_index: Vec<u64>,
    pub cap_breaches: u64,
}

/// Evaluates `S_n` at increasing `times` run by run, without materialising
/// the path. Consumes the stream exactly like [`generate_walk_until`], but
/// stops drawing continuation coins once the last query time is reached, so
/// the final run is never sampled past the horizon.
///
/// With `censor`, runs longer than `t_cap` are cut at the cap and counted in
/// `cap_breaches` instead of failing.
pub fn sample_senile_at<R: Rng + ?Sized>(
    kind: WalkKind,
    spec: &ReinforcementSpec,
    times: &[u64],
    censor: bool,
    rng: &mut R,
) -> Result<SenileSample> {
    if times.windows(2).any(|w| w[0] >= w[1]) || times.first() == Some(&0) {
        return Err(Error::InvalidSpec(
            "query times must be positive and strictly increasing".into(),
        ));
    }
    let d = spec.dimension();
    let mut sampler = StepSampler::new(kind, spec)?;
    let mut out = SenileSample {
        positions: vec![0; times.len() * d],
        renewal_index: vec![0; times.len()],
        cap_breaches: 0,
    };
    let mut start = vec![0i64; d];
    let mut elapsed = 0u64;
    let mut run = 0u64;
    let mut q = 0usize;
    while q < times.len() {
        run += 1;
        let direction = sampler.next_direction(rng);
        let mut t = 1u64;
        loop {
            while q < times.len() && times[q] == elapsed + t {
                position_in_run(kind, &start, direction, t, &mut out.positions[q * d..(q + 1) * d]);
                out.renewal_index[q] = run;
                q += 1;
            }
            if q == times.len() || rng.gen::<f64>() >= spec.continuation(t) {
                break;
            }
            if t == spec.t_cap() {
                if !censor {
                    return Err(Error::CapExceeded { cap: spec.t_cap() });
                }
                out.cap_breaches += 1;
                break;
            }
            t += 1;
        }
        let step = sampler.commit(direction, t);
        direction.add_to(&mut start, step.length as i64);
        elapsed += t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reinforcement::Reinforcement;
    use crate::rng::StreamFactory;

    fn dir(a: i32, d: usize) -> Direction {
        Direction::new(a, d).unwrap()
    }

    fn xs(s: &SenilePath) -> Vec<i64> {
        (1..=s.horizon()).map(|n| s.position(n)[0]).collect()
    }

    #[test]
    fn tau_inverse_examples() {
        let idx = TimeIndex::from_times([3, 2, 4]).unwrap();
        assert_eq!(idx.partial_sums(), &[3, 5, 9]);
        assert_eq!(idx.tau_inverse(4).unwrap(), 2);
        assert_eq!(idx.tau_inverse(3).unwrap(), 1);
        assert_eq!(idx.tau_inverse(9).unwrap(), 3);
        assert!(matches!(idx.tau_inverse(10), Err(Error::OutOfRange { .. })));
        assert!(idx.tau_inverse(0).is_err());
        let unit = TimeIndex::from_times(std::iter::repeat_n(1, 50)).unwrap();
        for n in 1..=50 {
            assert_eq!(unit.tau_inverse(n).unwrap() as u64, n);
        }
        assert!(TimeIndex::from_times([1, 0]).is_err());
    }

    #[test]
    fn persistent_hand_example() {
        let path = WalkPath::from_primitives(
            WalkKind::Persistent,
            1,
            &[(dir(1, 1), 3), (dir(-1, 1), 2)],
        );
        let s = senile_from_timechange(&path, 5).unwrap();
        assert_eq!(xs(&s), vec![1, 2, 3, 2, 1]);
        assert!(matches!(
            senile_from_timechange(&path, 6),
            Err(Error::PathTooShort { needed: 6, available: 5 })
        ));
    }

    #[test]
    fn reinforced_hand_example() {
        let path = WalkPath::from_primitives(WalkKind::Reinforced, 1, &[(dir(1, 1), 3)]);
        let s = senile_from_timechange(&path, 3).unwrap();
        assert_eq!(xs(&s), vec![1, 0, 1]);
    }

    #[test]
    fn reinforced_even_run_starts_along_its_direction() {
        // T = (1, 2): first edge {0,1}, then a new edge {1,2} traversed twice
        let path = WalkPath::from_primitives(
            WalkKind::Reinforced,
            1,
            &[(dir(1, 1), 1), (dir(1, 1), 2)],
        );
        path.check_invariants().unwrap();
        let s = senile_from_timechange(&path, 3).unwrap();
        assert_eq!(xs(&s), vec![1, 2, 1]);
        assert_eq!(s.position(3), path.position(2));
    }

    #[test]
    fn identity_time_change() {
        let spec = ReinforcementSpec::new(2, Reinforcement::constant(-1.0)).unwrap();
        let mut rng = StreamFactory::new(4, "id").stream(0);
        let walk = crate::walk::generate_walk(WalkKind::Persistent, &spec, 40, &mut rng).unwrap();
        let s = senile_from_timechange(&walk, 40).unwrap();
        for n in 1..=40 {
            assert_eq!(s.position(n), walk.position(n as usize));
        }
    }

    #[test]
    fn direct_unit_time_examples() {
        let spec = ReinforcementSpec::new(1, Reinforcement::constant(-1.0)).unwrap();
        let mut rng = StreamFactory::new(8, "direct").stream(0);
        for _ in 0..20 {
            let s = senile_direct(WalkKind::Persistent, &spec, 4, &mut rng).unwrap();
            let x = xs(&s);
            assert!(x == vec![1, 0, 1, 0] || x == vec![-1, 0, -1, 0], "{x:?}");
            let s = senile_direct(WalkKind::Reinforced, &spec, 3, &mut rng).unwrap();
            let x = xs(&s);
            assert!(x == vec![1, 2, 3] || x == vec![-1, -2, -3], "{x:?}");
        }
    }

    #[test]
    fn coupling_is_exact() {
        let cases = [
            (WalkKind::Persistent, 2, Reinforcement::constant(0.0)),
            (WalkKind::Reinforced, 1, Reinforcement::constant(1.0)),
            (WalkKind::Reinforced, 3, Reinforcement::affine(0.5, 0.0)),
        ];
        for (kind, d, f) in cases {
            let spec = ReinforcementSpec::new(d, f).unwrap();
            let streams = StreamFactory::new(11, "couple");
            for i in 0..20 {
                let mut rng = streams.stream(i);
                let (walk, direct) = coupled_pair(kind, &spec, 1000, &mut rng).unwrap();
                let via_tau = senile_from_timechange(&walk, 1000).unwrap();
                assert_eq!(via_tau, direct);
                direct.check_unit_steps().unwrap();
            }
        }
    }

    #[test]
    fn horizon_one() {
        for kind in [WalkKind::Persistent, WalkKind::Reinforced] {
            let spec = ReinforcementSpec::new(2, Reinforcement::constant(0.0)).unwrap();
            let mut rng = StreamFactory::new(1, "h1").stream(0);
            let (walk, direct) = coupled_pair(kind, &spec, 1, &mut rng).unwrap();
            assert_eq!(direct.squared_norm(1), 1);
            assert_eq!(senile_from_timechange(&walk, 1).unwrap(), direct);
        }
    }

    #[test]
    fn replay_rejects_excluded_direction() {
        // a reinforced path that reverses after a unit step cannot come from the kernel
        let path = WalkPath::from_primitives(
            WalkKind::Reinforced,
            2,
            &[(dir(1, 2), 1), (dir(-1, 2), 1)],
        );
        let err = senile_direct_with(WalkKind::Reinforced, 2, 2, &mut ReplayDriver::new(&path));
        assert!(matches!(err, Err(Error::Inconsistent(_))));
    }

    #[test]
    fn streaming_matches_materialised() {
        for (kind, d, f) in [
            (WalkKind::Persistent, 2, Reinforcement::constant(0.0)),
            (WalkKind::Reinforced, 1, Reinforcement::constant(0.0)),
            (WalkKind::Reinforced, 2, Reinforcement::affine(1.0, 0.0)),
        ] {
            let spec = ReinforcementSpec::new(d, f).unwrap();
            let times = [1u64, 2, 5, 17, 100, 101, 500];
            let streams = StreamFactory::new(21, "stream");
            for i in 0..25 {
                let sample =
                    sample_senile_at(kind, &spec, &times, false, &mut streams.stream(i)).unwrap();
                let walk = generate_walk_until(kind, &spec, 500, &mut streams.stream(i)).unwrap();
                let s = senile_from_timechange(&walk, 500).unwrap();
                let idx = TimeIndex::from_path(&walk);
                for (q, &n) in times.iter().enumerate() {
                    assert_eq!(&sample.positions[q * d..(q + 1) * d], s.position(n));
                    assert_eq!(sample.renewal_index[q], idx.tau_inverse(n).unwrap() as u64);
                }
            }
        }
    }

    #[test]
    fn streaming_rejects_bad_times() {
        let spec = ReinforcementSpec::new(1, Reinforcement::constant(0.0)).unwrap();
        let mut rng = StreamFactory::new(1, "bad").stream(0);
        assert!(sample_senile_at(WalkKind::Persistent, &spec, &[3, 3], false, &mut rng).is_err());
        assert!(sample_senile_at(WalkKind::Persistent, &spec, &[0, 3], false, &mut rng).is_err());
    }

    #[test]
    fn censored_streaming_counts_breaches() {
        let spec = ReinforcementSpec::new(1, Reinforcement::affine(1.0, 0.0))
            .unwrap()
            .with_t_cap(3)
            .unwrap();
        let streams = StreamFactory::new(2, "cens");
        let mut breaches = 0;
        for i in 0..200 {
            let s = sample_senile_at(WalkKind::Reinforced, &spec, &[50], true, &mut streams.stream(i))
                .unwrap();
            breaches += s.cap_breaches;
        }
        assert!(breaches > 0);
        let strict = (0..200).any(|i| {
            sample_senile_at(WalkKind::Reinforced, &spec, &[50], false, &mut streams.stream(i))
                .is_err()
        });
        assert!(strict);
    }
}
