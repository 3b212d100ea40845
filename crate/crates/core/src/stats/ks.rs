use crate::error::{Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical law of
/// `sorted` and `cdf`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted);
    }
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(sup)
}

/// Kolmogorov-Smirnov distance for data on a lattice of spacing `h`,
/// measured against `cdf` discretised onto the same lattice, i.e. the cell
/// around `v` receives `cdf(v + h/2) - cdf(v - h/2)`. With `h = 0` this is
/// [`ks_statistic`].
///
/// Only the lattice spacing matters, not its offset. The supremum is attained
/// at observed values: between them the empirical function is flat and the
/// discretised `cdf` is monotone.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
pub fn ks_statistic_lattice<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F, h: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted);
    }
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        sup = sup
            .max((below - cdf(v - h / 2.0)).abs())
            .max((upto - cdf(v + h / 2.0)).abs());
        i = j;
    }
    Ok(sup)
}

/// Large-sample critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.9750021048517795).abs() < 1e-15);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.220960574271785e-16).abs() < 1e-27);
        assert!((normal_cdf(-0.7) - 1.0 + normal_cdf(0.7)).abs() < 1e-15);
    }

    #[test]
    fn ks_definition() {
        assert_eq!(ks_statistic(&[0.0], normal_cdf).unwrap(), 0.5);
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&grid, uniform).unwrap() - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert!(matches!(ks_statistic(&[], normal_cdf), Err(Error::EmptySample)));
        assert!(matches!(ks_statistic(&[1.0, 0.0], normal_cdf), Err(Error::Unsorted)));
    }

    #[test]
    fn lattice_ks() {
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        let raw = ks_statistic(&grid, uniform).unwrap();
        assert!((ks_statistic_lattice(&grid, uniform, 0.0).unwrap() - raw).abs() < 1e-15);
        // four equally likely points 0..3 against uniform on [-0.5, 3.5]
        let pts = [0.0, 1.0, 2.0, 3.0];
        let wide = |x: f64| ((x + 0.5) / 4.0).clamp(0.0, 1.0);
        assert!(ks_statistic_lattice(&pts, wide, 1.0).unwrap() < 1e-15);
        assert!((ks_statistic(&pts, wide).unwrap() - 0.125).abs() < 1e-15);
        // a doubled point
        let gap = [0.0, 0.0, 2.0, 3.0];
        assert!((ks_statistic_lattice(&gap, wide, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(ks_statistic_lattice(&[1.0, 0.0], wide, 1.0).is_err());
    }

    #[test]
    fn critical_value() {
        assert!((ks_critical_value(0.01, 10_000) - 0.016276).abs() < 1e-6);
    }
}
