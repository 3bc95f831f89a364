use alloc::vec;
use alloc::vec::Vec;

use libm::{floor, log10, pow, sqrt};
use serde::Serialize;

use crate::{Error, Result};

/// Density histogram on logarithmically spaced bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHistogram {
    pub edges: Vec<f64>,
    /// Geometric bin centers.
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
}

impl LogHistogram {
    pub fn total_mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

fn edge(k: i64, per_decade: f64) -> f64 {
    pow(10.0, k as f64 / per_decade)
}

/// Index `k` with `10^(k/b) <= x < 10^((k+1)/b)`.
fn bin_index(x: f64, per_decade: f64) -> i64 {
    let mut k = floor(per_decade * log10(x)) as i64;
    while edge(k, per_decade) > x {
        k -= 1;
    }
    while edge(k + 1, per_decade) <= x {
        k += 1;
    }
    k
}

/// Exponentially binned probability density: edges at `10^(k/bins_per_decade)`,
/// density `count / (n · width)`.
pub fn exponential_binned_pdf(samples: &[f64], bins_per_decade: u32) -> Result<LogHistogram> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    if bins_per_decade == 0 {
        return Err(Error::InvalidArgument("bins_per_decade must be at least 1".into()));
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("samples must be positive, got {bad}")));
    }
    let b = f64::from(bins_per_decade);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let k_lo = bin_index(lo, b);
    let k_hi = bin_index(hi, b);
    let bins = (k_hi - k_lo + 1) as usize;

    let edges: Vec<f64> = (k_lo..=k_hi + 1).map(|k| edge(k, b)).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        counts[(bin_index(x, b) - k_lo) as usize] += 1;
    }
    let n = samples.len() as f64;
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
        .collect();
    let centers = edges.windows(2).map(|e| sqrt(e[0] * e[1])).collect();
    Ok(LogHistogram { edges, centers, densities, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_bin_per_decade() {
        let h = exponential_binned_pdf(&[1.0, 10.0, 100.0], 1).unwrap();
        assert_eq!(h.counts, vec![1, 1, 1]);
        assert_eq!(h.edges.len(), 4);
        assert_abs_diff_eq!(h.edges[3], 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h.densities[0], 1.0 / (3.0 * 9.0), epsilon = 1e-15);
        assert_abs_diff_eq!(h.densities[2], 1.0 / (3.0 * 900.0), epsilon = 1e-15);
        assert_abs_diff_eq!(h.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn every_sample_falls_inside_its_bin() {
        let xs = [0.013, 0.9, 1.0, 1.26, 3.3, 57.0, 57.0, 1e4];
        let h = exponential_binned_pdf(&xs, 10).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), xs.len() as u64);
        assert!(h.edges[0] <= 0.013 && *h.edges.last().unwrap() > 1e4);
        assert_abs_diff_eq!(h.total_mass(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(exponential_binned_pdf(&[], 10), Err(Error::Empty));
        assert!(exponential_binned_pdf(&[1.0, -2.0], 10).is_err());
        assert!(exponential_binned_pdf(&[1.0], 0).is_err());
    }
}
