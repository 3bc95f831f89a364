use alloc::vec::Vec;

use libm::{log, sqrt};
use serde::Serialize;

use crate::numeric::Accumulator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizationScore {
    pub z_l: f64,
    pub z_d: f64,
    pub pol: f64,
}

fn standardize_log(counts: &[u64]) -> Result<Vec<f64>> {
    if counts.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: counts.len() });
    }
    if let Some(&c) = counts.iter().find(|&&c| c == 0) {
        return Err(Error::InvalidArgument(alloc::format!("counts must be at least 1, got {c}")));
    }
    let logs: Vec<f64> = counts.iter().map(|&c| log(c as f64)).collect();
    let n = logs.len() as f64;
    let mean = logs.iter().copied().collect::<Accumulator>().value() / n;
    let ss = logs.iter().map(|v| (v - mean) * (v - mean)).collect::<Accumulator>().value();
    let sd = sqrt(ss / (n - 1.0));
    if !(sd > 0.0) {
        return Err(Error::InsufficientSpread);
    }
    Ok(logs.iter().map(|v| (v - mean) / sd).collect())
}

/// z-scores of `ln L` and `ln D` using the sample standard deviation.
pub fn standardize_logcounts(likes: &[u64], dislikes: &[u64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if likes.len() != dislikes.len() {
        return Err(Error::InvalidArgument("likes and dislikes differ in length".into()));
    }
    Ok((standardize_log(likes)?, standardize_log(dislikes)?))
}

/// Geometric mean of the positive parts of both z-scores.
pub fn polarization(z_l: f64, z_d: f64) -> f64 {
    sqrt(z_l.max(0.0) * z_d.max(0.0))
}

pub fn polarization_scores(likes: &[u64], dislikes: &[u64]) -> Result<Vec<PolarizationScore>> {
    let (zl, zd) = standardize_logcounts(likes, dislikes)?;
    Ok(zl
        .into_iter()
        .zip(zd)
        .map(|(z_l, z_d)| PolarizationScore { z_l, z_d, pol: polarization(z_l, z_d) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_standardization() {
        // any two distinct points standardize to ±1/√2
        let (zl, _) = standardize_logcounts(&[1, 100], &[2, 3]).unwrap();
        assert_abs_diff_eq!(zl[0], -core::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(zl[1], core::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn equal_counts_are_rejected() {
        assert_eq!(standardize_logcounts(&[5, 5, 5], &[1, 2, 3]), Err(Error::InsufficientSpread));
        assert!(standardize_logcounts(&[0, 5], &[1, 2]).is_err());
        assert!(standardize_logcounts(&[5], &[1]).is_err());
    }

    #[test]
    fn polarization_examples() {
        assert_eq!(polarization(1.0, 4.0), 2.0);
        assert_eq!(polarization(-0.5, 2.0), 0.0);
        assert_eq!(polarization(0.0, 0.0), 0.0);
    }
}
