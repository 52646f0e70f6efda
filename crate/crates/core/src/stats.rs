//! Small statistics helpers: regression, moments, bootstrap intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linreg(xs: &[f64], ys: &[f64]) -> LinFit {
    let n = xs.len().min(ys.len()) as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    // a perfectly flat response is a perfect fit
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LinFit { slope, intercept: my - slope * mx, r2 }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Unbiased sample covariance.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for a statistic of one sample.
pub fn bootstrap_ci<R: Rng + ?Sized>(data: &[f64], stat: impl Fn(&[f64]) -> f64, reps: usize, level: f64, rng: &mut R) -> (f64, f64) {
    let n = data.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = data[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    (quantile(&stats, a), quantile(&stats, 1.0 - a))
}

/// Paired percentile bootstrap interval for a statistic of two aligned samples.
pub fn bootstrap_ci_paired<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    stat: impl Fn(&[f64], &[f64]) -> f64,
    reps: usize,
    level: f64,
    rng: &mut R,
) -> (f64, f64) {
    let n = a.len();
    let (mut ba, mut bb) = (vec![0.0; n], vec![0.0; n]);
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            for i in 0..n {
                let j = rng.random_range(0..n);
                ba[i] = a[j];
                bb[i] = b[j];
            }
            stat(&ba, &bb)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = (1.0 - level) / 2.0;
    (quantile(&stats, q), quantile(&stats, 1.0 - q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let f = linreg(&xs, &ys);
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13 && (f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moments_and_bootstrap() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(mean(&v), 3.0);
        assert_eq!(variance(&v), 2.5);
        assert_eq!(covariance(&v, &v), 2.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (lo, hi) = bootstrap_ci(&v, mean, 2000, 0.95, &mut rng);
        assert!(lo < 3.0 && hi > 3.0 && lo >= 1.0 && hi <= 5.0);
    }
}
