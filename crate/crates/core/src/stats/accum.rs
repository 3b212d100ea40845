use serde::{Deserialize, Serialize};

/// Running `(count, sum, sum of squares)` of a scalar sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Sample variance with the `n - 1` denominator; 0 below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl Extend<f64> for Accumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::default();
        acc.extend(iter);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let acc: Accumulator = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(acc.mean(), 2.5);
        assert!((acc.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!((acc.std_error() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let single: Accumulator = [7.0].into_iter().collect();
        assert_eq!(single.variance(), 0.0);
    }

    #[test]
    fn merge_matches_serial() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let all: Accumulator = xs.iter().copied().collect();
        let mut left: Accumulator = xs[..37].iter().copied().collect();
        left.merge(&xs[37..].iter().copied().collect());
        assert_eq!(left.count, all.count);
        assert!((left.sum - all.sum).abs() < 1e-12);
        assert!((left.sum_sq - all.sum_sq).abs() < 1e-12);
    }
}
