//! Normalization and fitting of the truncated power law
//! `p(x) ∝ x^(-alpha) · exp(-lambda · x)` on `[xmin, ∞)`.
//!
//! Integrals are taken in log space, `x = xmin · e^t`, where the integrand
//! `exp((1 - alpha)·t - lambda·xmin·e^t)` is smooth and decays doubly
//! exponentially, so a composite Gauss-Legendre rule on a finite window is
//! accurate to near machine precision.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use super::optimize::{Minimum, NelderMead};
use crate::numeric::{integrate, Accumulator};
use crate::{Error, Result};

/// Log-space integrand with its maximum factored out.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    alpha: f64,
    z: f64,
    shift: f64,
    upper: f64,
    panel: f64,
}

impl Kernel {
    /// `lambda` must be positive.
    pub(crate) fn new(alpha: f64, lambda: f64, xmin: f64) -> Self {
        let z = lambda * xmin;
        let exponent = |t: f64| (1.0 - alpha) * t - z * exp(t);
        let peak = if alpha < 1.0 { log((1.0 - alpha) / z).max(0.0) } else { 0.0 };
        let shift = exponent(peak);
        let mut upper = peak;
        for _ in 0..5000 {
            upper += 1.0;
            if exponent(upper) < shift - 60.0 {
                break;
            }
        }
        let panel = (0.5 / sqrt((1.0 - alpha).abs() + 1.0)).min(0.25);
        Self { alpha, z, shift, upper, panel }
    }

    #[inline]
    fn scaled(&self, t: f64) -> f64 {
        exp((1.0 - self.alpha) * t - self.z * exp(t) - self.shift)
    }

    /// Scaled integral over `[t0, t1]` clipped to the support window.
    fn partial(&self, t0: f64, t1: f64) -> f64 {
        let hi = t1.min(self.upper);
        if hi <= t0 {
            return 0.0;
        }
        integrate(&|t| self.scaled(t), t0, hi, self.panel)
    }

    fn total(&self) -> f64 {
        self.partial(0.0, self.upper)
    }
}

/// `ln Z` with `Z = ∫_{xmin}^∞ x^(-alpha) e^(-lambda x) dx`.
pub(crate) fn ln_normalizer(alpha: f64, lambda: f64, xmin: f64) -> f64 {
    if lambda == 0.0 {
        return if alpha > 1.0 {
            (1.0 - alpha) * log(xmin) - log(alpha - 1.0)
        } else {
            f64::INFINITY
        };
    }
    let kernel = Kernel::new(alpha, lambda, xmin);
    (1.0 - alpha) * log(xmin) + kernel.shift + log(kernel.total())
}

/// Conditional CDF at ascending points (all ≥ xmin), integrating segment by segment.
pub(crate) fn cdf_sorted(alpha: f64, lambda: f64, xmin: f64, sorted: &[f64]) -> Vec<f64> {
    if lambda == 0.0 {
        return sorted.iter().map(|&x| 1.0 - libm::pow(x / xmin, 1.0 - alpha)).collect();
    }
    let kernel = Kernel::new(alpha, lambda, xmin);
    let total = kernel.total();
    let mut acc = Accumulator::new();
    let mut prev = 0.0;
    sorted
        .iter()
        .map(|&x| {
            let t = log(x / xmin).max(0.0);
            if t > prev {
                acc.add(kernel.partial(prev, t));
                prev = t;
            }
            (acc.value() / total).clamp(0.0, 1.0)
        })
        .collect()
}

/// Sufficient statistics of a sample for the truncated power law likelihood.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub mean_ln: f64,
    pub mean: f64,
    pub xmin: f64,
}

impl Moments {
    /// Negative mean log-likelihood at `(alpha, ln(lambda·xmin))`.
    fn objective(&self, alpha: f64, log_rate: f64) -> f64 {
        if !(-50.0..=50.0).contains(&alpha) || !(-40.0..=10.0).contains(&log_rate) {
            return f64::INFINITY;
        }
        let lambda = exp(log_rate) / self.xmin;
        let ln_z = ln_normalizer(alpha, lambda, self.xmin);
        if !ln_z.is_finite() {
            return f64::INFINITY;
        }
        alpha * self.mean_ln + lambda * self.mean + ln_z
    }
}

/// Maximum-likelihood `(alpha, lambda)`.
///
/// Starts from the pure power-law exponent with `lambda = 1/mean`, and from
/// the exponential fit (`alpha = 0`); the better optimum is polished with a
/// restarted simplex.
pub(crate) fn fit(m: &Moments, alpha_pl: f64, lambda_exp: f64) -> Result<(f64, f64, usize)> {
    let nm = NelderMead { step: [0.25, 1.0], f_tolerance: 1e-13, x_tolerance: 1e-7, max_iterations: 4000 };
    let f = |p: &[f64; 2]| m.objective(p[0], p[1]);
    let starts = [
        [alpha_pl.clamp(-49.0, 49.0), log(m.xmin / m.mean).clamp(-39.0, 9.0)],
        [0.0, log(lambda_exp * m.xmin).clamp(-39.0, 9.0)],
    ];
    let mut best: Option<Minimum<2>> = None;
    let mut failure = None;
    for start in starts {
        match nm.minimize(&f, start) {
            Ok(found) if best.is_none_or(|b| found.value < b.value) => best = Some(found),
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    }
    let Some(mut best) = best else {
        return Err(failure.unwrap_or(Error::Degenerate("truncated power law objective")));
    };
    let mut iterations = best.iterations;
    for _ in 0..3 {
        let polished = nm.minimize(&f, best.point)?;
        iterations += polished.iterations;
        let improved = polished.value < best.value - 1e-13;
        if polished.value <= best.value {
            best = polished;
        }
        if !improved {
            break;
        }
    }
    Ok((best.point[0], exp(best.point[1]) / m.xmin, iterations))
}
