//! Maximum-likelihood fits of four heavy-tail candidates on `[xmin, ∞)`,
//! pairwise log-likelihood-ratio model selection and the Kolmogorov-Smirnov
//! distance of the winner.
//!
//! All densities are continuous and normalized on `[xmin, ∞)`:
//!
//! | family              | density                                   |
//! |---------------------|-------------------------------------------|
//! | power law           | `(a-1)/xmin · (x/xmin)^(-a)`              |
//! | log-normal          | log-normal pdf divided by its mass above `xmin` |
//! | truncated power law | `x^(-a) e^(-λx) / Z(a, λ)`                |
//! | exponential         | `λ e^(-λ(x - xmin))`                      |
//!
//! Log-likelihoods are compensated sums in sample order, so results do not
//! depend on thread scheduling.

mod binning;
mod optimize;
mod truncated;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use libm::{exp, expm1, log, pow, sqrt};
use serde::{Deserialize, Serialize};

pub use self::binning::{exponential_binned_pdf, LogHistogram};
pub use self::optimize::{Minimum, NelderMead};
use crate::numeric::{chi2_sf, norm_sf, norm_two_sided, Accumulator};
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Significance level used for model selection.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerLaw,
    Lognormal,
    TruncatedPowerLaw,
    Exponential,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::PowerLaw, Family::Lognormal, Family::TruncatedPowerLaw, Family::Exponential];

    pub fn name(self) -> &'static str {
        match self {
            Family::PowerLaw => "power_law",
            Family::Lognormal => "lognormal",
            Family::TruncatedPowerLaw => "truncated_power_law",
            Family::Exponential => "exponential",
        }
    }

    /// True when `self` is a boundary special case of `other`.
    pub fn nested_in(self, other: Family) -> bool {
        matches!(
            (self, other),
            (Family::PowerLaw, Family::TruncatedPowerLaw) | (Family::Exponential, Family::TruncatedPowerLaw)
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    PowerLaw { alpha: f64 },
    Lognormal { mu: f64, sigma: f64 },
    TruncatedPowerLaw { alpha: f64, lambda: f64 },
    Exponential { lambda: f64 },
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::PowerLaw { .. } => Family::PowerLaw,
            Params::Lognormal { .. } => Family::Lognormal,
            Params::TruncatedPowerLaw { .. } => Family::TruncatedPowerLaw,
            Params::Exponential { .. } => Family::Exponential,
        }
    }
}

/// A distribution restricted to `[xmin, ∞)`, ready for density and CDF
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    params: Params,
    xmin: f64,
    /// Family-specific normalizing term (log tail mass, or ln Z).
    ln_norm: f64,
}

impl Model {
    pub fn new(params: Params, xmin: f64) -> Result<Self> {
        if !(xmin > 0.0 && xmin.is_finite()) {
            return Err(Error::InvalidArgument(format!("xmin must be positive, got {xmin}")));
        }
        let ln_norm = match params {
            Params::PowerLaw { alpha } => {
                if !(alpha > 1.0) {
                    return Err(Error::InvalidArgument(format!("power-law exponent must exceed 1, got {alpha}")));
                }
                0.0
            }
            Params::Lognormal { mu, sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
                }
                log(norm_sf((log(xmin) - mu) / sigma))
            }
            Params::TruncatedPowerLaw { alpha, lambda } => {
                if !(lambda >= 0.0) || (lambda == 0.0 && alpha <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "truncated power law is not normalizable at alpha={alpha}, lambda={lambda}"
                    )));
                }
                truncated::ln_normalizer(alpha, lambda, xmin)
            }
            Params::Exponential { lambda } => {
                if !(lambda > 0.0) {
                    return Err(Error::InvalidArgument(format!("rate must be positive, got {lambda}")));
                }
                0.0
            }
        };
        if !ln_norm.is_finite() {
            return Err(Error::Degenerate("normalizing constant is not finite"));
        }
        Ok(Self { params, xmin, ln_norm })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < self.xmin {
            return f64::NEG_INFINITY;
        }
        match self.params {
            Params::PowerLaw { alpha } => log(alpha - 1.0) - log(self.xmin) - alpha * log(x / self.xmin),
            Params::Lognormal { mu, sigma } => {
                let z = (log(x) - mu) / sigma;
                -log(x) - log(sigma) - LN_SQRT_2PI - 0.5 * z * z - self.ln_norm
            }
            Params::TruncatedPowerLaw { alpha, lambda } => -alpha * log(x) - lambda * x - self.ln_norm,
            Params::Exponential { lambda } => log(lambda) - lambda * (x - self.xmin),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        exp(self.ln_pdf(x))
    }

    /// CDF conditioned on `x ≥ xmin`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_sorted(&[x])[0]
    }

    /// CDF at ascending points; cheaper than repeated [`Model::cdf`] for the
    /// truncated power law.
    pub fn cdf_sorted(&self, sorted: &[f64]) -> Vec<f64> {
        let xmin = self.xmin;
        match self.params {
            Params::TruncatedPowerLaw { alpha, lambda } => {
                let clipped: Vec<f64> = sorted.iter().map(|&x| x.max(xmin)).collect();
                truncated::cdf_sorted(alpha, lambda, xmin, &clipped)
            }
            _ => sorted
                .iter()
                .map(|&x| {
                    if x <= xmin {
                        return 0.0;
                    }
                    match self.params {
                        Params::PowerLaw { alpha } => 1.0 - pow(x / xmin, 1.0 - alpha),
                        Params::Lognormal { mu, sigma } => 1.0 - exp(log(norm_sf((log(x) - mu) / sigma)) - self.ln_norm),
                        Params::Exponential { lambda } => -expm1(-lambda * (x - xmin)),
                        Params::TruncatedPowerLaw { .. } => unreachable!(),
                    }
                    .clamp(0.0, 1.0)
                })
                .collect(),
        }
    }

    /// Compensated log-likelihood in sample order.
    pub fn loglik(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.ln_pdf(x)).collect::<Accumulator>().value()
    }
}

/// Fitted distribution parameters with the log-likelihood they attain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistFit {
    pub params: Params,
    pub xmin: f64,
    pub loglik: f64,
    pub n: usize,
    #[serde(skip)]
    model: Model,
}

impl DistFit {
    /// Evaluates a fixed parameter set on `samples`.
    pub fn evaluate(params: Params, xmin: f64, samples: &[f64]) -> Result<Self> {
        let model = Model::new(params, xmin)?;
        let loglik = model.loglik(samples);
        if !loglik.is_finite() {
            return Err(Error::Degenerate("log-likelihood is not finite"));
        }
        Ok(Self { params, xmin, loglik, n: samples.len(), model })
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }
}

fn check_samples(samples: &[f64], xmin: f64) -> Result<()> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: samples.len() });
    }
    if !(xmin > 0.0 && xmin.is_finite()) {
        return Err(Error::InvalidArgument(format!("xmin must be positive, got {xmin}")));
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x >= xmin) || !x.is_finite()) {
        return Err(Error::BelowXmin { value: bad, xmin });
    }
    Ok(())
}

fn power_law_alpha(samples: &[f64], xmin: f64) -> Result<f64> {
    let s = samples.iter().map(|&x| log(x / xmin)).collect::<Accumulator>().value();
    if s <= 0.0 {
        return Err(Error::Degenerate("all samples equal xmin"));
    }
    Ok(1.0 + samples.len() as f64 / s)
}

fn exponential_rate(samples: &[f64], xmin: f64) -> Result<f64> {
    let excess = samples.iter().map(|&x| x - xmin).collect::<Accumulator>().value() / samples.len() as f64;
    if excess <= 0.0 {
        return Err(Error::Degenerate("all samples equal xmin"));
    }
    Ok(1.0 / excess)
}

/// Continuous maximum-likelihood fit of `family` to `samples ≥ xmin`.
///
/// Power law, log-normal and exponential use closed forms; the truncated
/// power law is maximized numerically.
pub fn fit_distribution(samples: &[f64], family: Family, xmin: f64) -> Result<DistFit> {
    check_samples(samples, xmin)?;
    let n = samples.len() as f64;
    let params = match family {
        Family::PowerLaw => Params::PowerLaw { alpha: power_law_alpha(samples, xmin)? },
        Family::Exponential => Params::Exponential { lambda: exponential_rate(samples, xmin)? },
        Family::Lognormal => {
            let mu = samples.iter().map(|&x| log(x)).collect::<Accumulator>().value() / n;
            let ss = samples.iter().map(|&x| (log(x) - mu) * (log(x) - mu)).collect::<Accumulator>().value();
            let sigma = sqrt(ss / n);
            if !(sigma > 0.0) {
                return Err(Error::Degenerate("all samples identical"));
            }
            Params::Lognormal { mu, sigma }
        }
        Family::TruncatedPowerLaw => {
            let alpha_pl = power_law_alpha(samples, xmin)?;
            let lambda_exp = exponential_rate(samples, xmin)?;
            let moments = truncated::Moments {
                mean_ln: samples.iter().map(|&x| log(x)).collect::<Accumulator>().value() / n,
                mean: samples.iter().copied().collect::<Accumulator>().value() / n,
                xmin,
            };
            let (alpha, lambda, _) = truncated::fit(&moments, alpha_pl, lambda_exp)?;
            Params::TruncatedPowerLaw { alpha, lambda }
        }
    };
    DistFit::evaluate(params, xmin, samples)
}

/// Log-likelihood ratio between two fits on the same sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlrResult {
    pub first: Family,
    pub second: Family,
    /// `ln(L_first / L_second)`; positive favours `first`.
    pub r: f64,
    pub p: f64,
}

fn pointwise_differences(a: &DistFit, b: &DistFit, samples: &[f64]) -> Result<Vec<f64>> {
    if a.xmin != b.xmin {
        return Err(Error::XminMismatch { first: a.xmin, second: b.xmin });
    }
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    Ok(samples.iter().map(|&x| a.model.ln_pdf(x) - b.model.ln_pdf(x)).collect())
}

/// Non-nested comparison: `r = Σ ln p_a(x) - ln p_b(x)` with a two-sided
/// p-value from the normalized ratio `r / (σ √n)`.
pub fn compare_fits(fit_a: &DistFit, fit_b: &DistFit, samples: &[f64]) -> Result<LlrResult> {
    let diffs = pointwise_differences(fit_a, fit_b, samples)?;
    let n = diffs.len() as f64;
    let r = diffs.iter().copied().collect::<Accumulator>().value();
    let mean = r / n;
    let ss = diffs.iter().map(|d| (d - mean) * (d - mean)).collect::<Accumulator>().value();
    let var = if diffs.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    let p = if var > 0.0 {
        norm_two_sided(r / (sqrt(var) * sqrt(n)))
    } else if r == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(LlrResult { first: fit_a.family(), second: fit_b.family(), r, p })
}

/// Nested comparison (one family is a boundary case of the other): the
/// p-value is the chi-squared(1) tail of `2|r|` when the larger family is
/// ahead, and 1 otherwise.
pub fn compare_nested(fit_a: &DistFit, fit_b: &DistFit, samples: &[f64]) -> Result<LlrResult> {
    let (fa, fb) = (fit_a.family(), fit_b.family());
    if !(fa.nested_in(fb) || fb.nested_in(fa)) {
        return Err(Error::InvalidArgument(format!("{fa} and {fb} are not nested")));
    }
    let diffs = pointwise_differences(fit_a, fit_b, samples)?;
    let r = diffs.iter().copied().collect::<Accumulator>().value();
    let larger_ahead = if fb.nested_in(fa) { r > 0.0 } else { r < 0.0 };
    let p = if larger_ahead { chi2_sf(2.0 * r.abs(), 1.0) } else { 1.0 };
    Ok(LlrResult { first: fa, second: fb, r, p })
}

/// Supremum distance between the empirical and model CDFs, both restricted
/// to `x ≥ xmin`.
pub fn ks_distance(fit: &DistFit, samples: &[f64]) -> Result<f64> {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|&x| x >= fit.xmin).collect();
    if sorted.is_empty() {
        return Err(Error::Empty);
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;

    // ECDF jumps once per distinct value
    let mut distinct = Vec::new();
    let mut cumulative = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if distinct.last() == Some(&x) {
            *cumulative.last_mut().unwrap() = i + 1;
        } else {
            distinct.push(x);
            cumulative.push(i + 1);
        }
    }
    let model_cdf = fit.model.cdf_sorted(&distinct);
    let mut before = 0.0;
    let mut d: f64 = 0.0;
    for (f, &c) in model_cdf.iter().zip(cumulative.iter()) {
        let after = c as f64 / n;
        d = d.max((f - before).abs()).max((after - f).abs());
        before = after;
    }
    Ok(d.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub family: Family,
    pub reason: String,
}

/// All four fits, the log-normal-versus-other comparisons and the selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistFitReport {
    pub fits: Vec<DistFit>,
    pub excluded: Vec<Exclusion>,
    pub comparisons: Vec<LlrResult>,
    pub best: Family,
    /// False when no family won all its pairwise comparisons; `best` then
    /// falls back to the highest log-likelihood.
    pub significant_winner: bool,
    pub ks: f64,
}

impl DistFitReport {
    pub fn fit(&self, family: Family) -> Option<&DistFit> {
        self.fits.iter().find(|f| f.family() == family)
    }

    pub fn comparison(&self, second: Family) -> Option<&LlrResult> {
        self.comparisons.iter().find(|c| c.second == second)
    }
}

/// Does `a` beat `b` at [`SIGNIFICANCE`]? A simpler family nested in a larger
/// one survives unless the larger one is significantly better.
fn wins(a: &DistFit, b: &DistFit, samples: &[f64]) -> Result<bool> {
    let (fa, fb) = (a.family(), b.family());
    if fa.nested_in(fb) {
        let c = compare_nested(a, b, samples)?;
        Ok(!(c.r < 0.0 && c.p < SIGNIFICANCE))
    } else if fb.nested_in(fa) {
        let c = compare_nested(a, b, samples)?;
        Ok(c.r > 0.0 && c.p < SIGNIFICANCE)
    } else {
        let c = compare_fits(a, b, samples)?;
        Ok(c.r > 0.0 && c.p < SIGNIFICANCE)
    }
}

/// Fits every family, compares log-normal against the other three and
/// selects the family that wins all of its pairwise comparisons.
///
/// A truncated power law that fails to converge is excluded and recorded in
/// [`DistFitReport::excluded`]; other fit failures propagate.
pub fn best_fit(samples: &[f64], xmin: f64) -> Result<DistFitReport> {
    check_samples(samples, xmin)?;
    let mut fits = Vec::with_capacity(4);
    let mut excluded = Vec::new();
    for family in Family::ALL {
        match fit_distribution(samples, family, xmin) {
            Ok(fit) => fits.push(fit),
            Err(e) if family == Family::TruncatedPowerLaw => {
                excluded.push(Exclusion { family, reason: format!("{e}") })
            }
            Err(e) => return Err(e),
        }
    }

    let lognormal = fits.iter().find(|f| f.family() == Family::Lognormal).copied();
    let mut comparisons = Vec::new();
    if let Some(ln) = lognormal {
        for other in fits.iter().filter(|f| f.family() != Family::Lognormal) {
            comparisons.push(compare_fits(&ln, other, samples)?);
        }
    }

    let mut winner = None;
    for a in &fits {
        let mut all = true;
        for b in fits.iter().filter(|b| b.family() != a.family()) {
            if !wins(a, b, samples)? {
                all = false;
                break;
            }
        }
        if all {
            winner = Some(*a);
            break;
        }
    }
    let significant_winner = winner.is_some();
    let best = match winner {
        Some(w) => w,
        None => *fits
            .iter()
            .max_by(|a, b| a.loglik.total_cmp(&b.loglik))
            .ok_or(Error::Empty)?,
    };
    let ks = ks_distance(&best, samples)?;
    Ok(DistFitReport { fits, excluded, comparisons, best: best.family(), significant_winner, ks })
}
