use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log, log1p, sqrt};
use serde::{Deserialize, Serialize};

use crate::linalg::{first_dependent_column, Cholesky};
use crate::numeric::{chi2_sf, norm_two_sided, student_t_two_sided, Accumulator};
use crate::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Named predictor columns; the intercept is added by the fitting routines.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    rows: usize,
}

impl Design {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("design columns differ in length".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design contains non-finite values".into()));
        }
        Ok(Self { names, columns, rows })
    }

    /// Intercept-only design with `rows` observations.
    pub fn intercept_only(rows: usize) -> Self {
        Self { names: Vec::new(), columns: Vec::new(), rows }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Number of coefficients including the intercept.
    fn width(&self) -> usize {
        self.columns.len() + 1
    }

    #[inline]
    fn value(&self, row: usize, coef: usize) -> f64 {
        if coef == 0 {
            1.0
        } else {
            self.columns[coef - 1][row]
        }
    }

    fn linear_predictor(&self, row: usize, beta: &[f64]) -> f64 {
        let mut eta = beta[0];
        for (j, column) in self.columns.iter().enumerate() {
            eta += beta[j + 1] * column[row];
        }
        eta
    }

    fn term_names(&self) -> Vec<String> {
        core::iter::once(INTERCEPT.to_string()).chain(self.names.iter().cloned()).collect()
    }

    /// `R`-style formula, e.g. `G ~ V + A`.
    pub fn formula(&self, response: &str) -> String {
        if self.names.is_empty() {
            format!("{response} ~ 1")
        } else {
            format!("{response} ~ {}", self.names.join(" + "))
        }
    }

    fn check_rank(&self) -> Result<()> {
        let ones = vec![1.0; self.rows];
        let mut all: Vec<&[f64]> = vec![&ones];
        all.extend(self.columns.iter().map(Vec::as_slice));
        if let Some((j, partners)) = first_dependent_column(&all, 1e-10) {
            let names = self.term_names();
            return Err(Error::RankDeficient {
                column: names[j].clone(),
                others: partners.into_iter().map(|k| names[k].clone()).collect(),
            });
        }
        Ok(())
    }

    /// Weighted cross products `X'WX` and `X'Wz`.
    fn weighted_normal_equations(&self, weights: &[f64], target: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.width();
        let mut xtx = vec![Accumulator::new(); p * p];
        let mut xtz = vec![Accumulator::new(); p];
        for i in 0..self.rows {
            let w = weights[i];
            for a in 0..p {
                let xa = self.value(i, a) * w;
                xtz[a].add(xa * target[i]);
                for b in 0..=a {
                    xtx[a * p + b].add(xa * self.value(i, b));
                }
            }
        }
        let mut m = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..=a {
                let v = xtx[a * p + b].value();
                m[a * p + b] = v;
                m[b * p + a] = v;
            }
        }
        (m, xtz.iter().map(Accumulator::value).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionKind {
    Logistic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub estimate: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
    #[serde(rename = "stat")]
    pub statistic: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub kind: RegressionKind,
    pub terms: Vec<Term>,
    pub n: usize,
    pub loglik_full: f64,
    pub loglik_null: f64,
    pub chi2: f64,
    pub df: usize,
    pub chi2_p: f64,
    /// IRLS iterations (0 for linear models).
    pub iterations: usize,
}

impl RegressionResult {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// `chi2 = 2(ℓ_full - ℓ_null)` and its upper chi-squared tail.
pub fn likelihood_ratio_test(loglik_full: f64, loglik_null: f64, df: usize) -> Result<(f64, f64)> {
    if df == 0 {
        return Err(Error::InvalidArgument("likelihood ratio test needs df >= 1".into()));
    }
    if loglik_full < loglik_null - 1e-8 {
        return Err(Error::NonNested { full: loglik_full, null: loglik_null });
    }
    let chi2 = (2.0 * (loglik_full - loglik_null)).max(0.0);
    Ok((chi2, chi2_sf(chi2, df as f64)))
}

fn lrt_or_trivial(full: f64, null: f64, df: usize) -> Result<(f64, f64)> {
    if df == 0 {
        Ok((0.0, 1.0))
    } else if full == f64::INFINITY {
        Ok((f64::INFINITY, 0.0))
    } else {
        likelihood_ratio_test(full, null, df)
    }
}

fn check_size(design: &Design, outcome_len: usize) -> Result<()> {
    if outcome_len != design.rows() {
        return Err(Error::InvalidArgument(format!(
            "outcome has {outcome_len} rows, design has {}",
            design.rows()
        )));
    }
    if design.rows() <= design.width() {
        return Err(Error::TooFewSamples { needed: design.width() + 1, got: design.rows() });
    }
    Ok(())
}

/// Coefficient magnitude beyond which a logistic fit is treated as separated.
pub const SEPARATION_BOUND: f64 = 15.0;
const IRLS_MAX_ITERATIONS: usize = 100;
const IRLS_TOLERANCE: f64 = 1e-8;

fn bernoulli_loglik(eta: f64, y: bool) -> f64 {
    // log σ(η) = -log1p(e^-η), computed without overflow
    let log_sigmoid = |t: f64| if t > 0.0 { -log1p(exp(-t)) } else { t - log1p(exp(t)) };
    if y {
        log_sigmoid(eta)
    } else {
        log_sigmoid(-eta)
    }
}

/// Logistic regression by iteratively reweighted least squares.
///
/// Stops when the relative deviance change falls below 1e-8 or after 100
/// iterations. Standard errors come from the inverse Fisher information;
/// the likelihood-ratio test is against the intercept-only model.
pub fn fit_logistic(design: &Design, y: &[bool]) -> Result<RegressionResult> {
    check_size(design, y.len())?;
    let n = y.len();
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    design.check_rank()?;
    let p = design.width();
    let names = design.term_names();

    let mut beta = vec![0.0; p];
    let mut deviance = f64::INFINITY;
    let mut weights = vec![0.0; n];
    let mut working = vec![0.0; n];
    let mut iterations = 0;
    let mut fisher = None;
    for it in 1..=IRLS_MAX_ITERATIONS {
        iterations = it;
        for i in 0..n {
            let eta = design.linear_predictor(i, &beta);
            let mu = 1.0 / (1.0 + exp(-eta));
            let w = (mu * (1.0 - mu)).max(1e-12);
            weights[i] = w;
            working[i] = eta + (f64::from(u8::from(y[i])) - mu) / w;
        }
        let (xtwx, xtwz) = design.weighted_normal_equations(&weights, &working);
        let chol = Cholesky::factor(&xtwx, p).ok_or_else(|| Error::Separation {
            term: names[0].clone(),
            value: f64::INFINITY,
        })?;
        beta = chol.solve(&xtwz);
        if let Some((j, &b)) = beta.iter().enumerate().find(|(_, b)| !(b.abs() <= SEPARATION_BOUND)) {
            return Err(Error::Separation { term: names[j].clone(), value: b });
        }
        let loglik = (0..n)
            .map(|i| bernoulli_loglik(design.linear_predictor(i, &beta), y[i]))
            .collect::<Accumulator>()
            .value();
        let new_deviance = -2.0 * loglik;
        let converged = (new_deviance - deviance).abs() / (new_deviance.abs() + 0.1) < IRLS_TOLERANCE;
        deviance = new_deviance;
        fisher = Some(chol);
        if converged {
            break;
        }
    }

    // Fisher information at the final estimate
    for i in 0..n {
        let mu = 1.0 / (1.0 + exp(-design.linear_predictor(i, &beta)));
        weights[i] = mu * (1.0 - mu);
    }
    let (info, _) = design.weighted_normal_equations(&weights, &working);
    let covariance = Cholesky::factor(&info, p).or(fisher).map(|c| c.inverse()).ok_or(Error::Degenerate(
        "singular Fisher information",
    ))?;

    let terms = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let se = sqrt(covariance[j * p + j]);
            let z = beta[j] / se;
            Term { name, estimate: beta[j], std_error: se, statistic: z, p: norm_two_sided(z) }
        })
        .collect();

    let loglik_full = -0.5 * deviance;
    let rate = positives as f64 / n as f64;
    let loglik_null = positives as f64 * log(rate) + (n - positives) as f64 * log(1.0 - rate);
    let df = p - 1;
    let (chi2, chi2_p) = lrt_or_trivial(loglik_full, loglik_null, df)?;
    Ok(RegressionResult {
        kind: RegressionKind::Logistic,
        terms,
        n,
        loglik_full,
        loglik_null,
        chi2,
        df,
        chi2_p,
        iterations,
    })
}

/// Profile Gaussian log-likelihood of a least-squares fit.
fn gaussian_loglik(rss: f64, n: usize) -> f64 {
    let n = n as f64;
    if rss <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * n * (log(2.0 * core::f64::consts::PI * rss / n) + 1.0)
}

/// Ordinary least squares with t statistics and a Gaussian-likelihood LRT
/// against the intercept-only model.
pub fn fit_linear(design: &Design, y: &[f64]) -> Result<RegressionResult> {
    check_size(design, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("outcome contains non-finite values".into()));
    }
    design.check_rank()?;
    let n = y.len();
    let p = design.width();
    let ones = vec![1.0; n];
    let (xtx, xty) = design.weighted_normal_equations(&ones, y);
    let chol = Cholesky::factor(&xtx, p).ok_or(Error::Degenerate("singular cross-product matrix"))?;
    let beta = chol.solve(&xty);
    let inverse = chol.inverse();

    let rss = (0..n)
        .map(|i| {
            let r = y[i] - design.linear_predictor(i, &beta);
            r * r
        })
        .collect::<Accumulator>()
        .value();
    let y_mean = y.iter().copied().collect::<Accumulator>().value() / n as f64;
    let tss = y.iter().map(|v| (v - y_mean) * (v - y_mean)).collect::<Accumulator>().value();
    let dof = (n - p) as f64;
    let sigma2 = rss / dof;

    let terms = design
        .term_names()
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let se = sqrt(sigma2 * inverse[j * p + j]);
            let t = if se > 0.0 { beta[j] / se } else if beta[j] == 0.0 { 0.0 } else { f64::INFINITY * beta[j].signum() };
            Term { name, estimate: beta[j], std_error: se, statistic: t, p: student_t_two_sided(t, dof) }
        })
        .collect();

    let loglik_full = gaussian_loglik(rss, n);
    let loglik_null = gaussian_loglik(tss, n);
    let df = p - 1;
    let (chi2, chi2_p) = if loglik_null == f64::INFINITY {
        (0.0, 1.0)
    } else {
        lrt_or_trivial(loglik_full, loglik_null, df)?
    };
    Ok(RegressionResult {
        kind: RegressionKind::Linear,
        terms,
        n,
        loglik_full,
        loglik_null,
        chi2,
        df,
        chi2_p,
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use approx::assert_abs_diff_eq;

    fn design(cols: &[(&str, &[f64])]) -> Design {
        Design::new(cols.iter().map(|(n, _)| n.to_string()).collect(), cols.iter().map(|(_, c)| c.to_vec()).collect())
            .unwrap()
    }

    #[test]
    fn intercept_only_logistic_is_log_odds() {
        let fit = fit_logistic(&Design::intercept_only(4), &[true, true, true, false]).unwrap();
        assert_abs_diff_eq!(fit.terms[0].estimate, log(3.0), epsilon = 1e-6);
        assert_eq!(fit.df, 0);
        assert_eq!((fit.chi2, fit.chi2_p), (0.0, 1.0));
        assert_abs_diff_eq!(fit.loglik_full, fit.loglik_null, epsilon = 1e-9);
        // se of the log-odds is sqrt(1/(n p (1-p)))
        assert_abs_diff_eq!(fit.terms[0].std_error, sqrt(1.0 / (4.0 * 0.75 * 0.25)), epsilon = 1e-6);
    }

    #[test]
    fn logistic_rejects_single_class_and_separation() {
        assert_eq!(fit_logistic(&Design::intercept_only(4), &[true; 4]).unwrap_err(), Error::SingleClass);
        let x = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let y = [false, false, false, true, true, true];
        assert!(matches!(fit_logistic(&design(&[("x", &x)]), &y), Err(Error::Separation { .. })));
    }

    #[test]
    fn logistic_matches_reference_fit() {
        // glm(y ~ x, family = binomial) on this data gives
        // intercept -3.5, slope 1.0 by construction of the symmetric counts:
        // the MLE solves the score equations, which we check directly.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [false, false, true, false, true, true, false, true, false, true, true, true];
        let fit = fit_logistic(&design(&[("x", &x)]), &y).unwrap();
        let (b0, b1) = (fit.terms[0].estimate, fit.terms[1].estimate);
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for i in 0..x.len() {
            let mu = 1.0 / (1.0 + exp(-(b0 + b1 * x[i])));
            let r = f64::from(u8::from(y[i])) - mu;
            s0 += r;
            s1 += r * x[i];
        }
        assert!(s0.abs() < 1e-8 && s1.abs() < 1e-8, "score ({s0}, {s1})");
        assert!(fit.chi2 > 0.0 && fit.df == 1);
    }

    #[test]
    fn exact_line_has_zero_residuals() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
        let fit = fit_linear(&design(&[("x", &x)]), &y).unwrap();
        assert_abs_diff_eq!(fit.terms[0].estimate, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.terms[1].estimate, 2.0, epsilon = 1e-12);
        assert!(fit.terms[1].std_error < 1e-6);
    }

    #[test]
    fn linear_matches_textbook_example() {
        // hand-computed: x = 1..5, y = (2, 4, 5, 4, 5)
        // slope 0.6, intercept 2.2, rss 2.4, se(slope) = sqrt(0.8/10)
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        let fit = fit_linear(&design(&[("x", &x)]), &y).unwrap();
        assert_abs_diff_eq!(fit.terms[0].estimate, 2.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.terms[1].estimate, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.terms[1].std_error, sqrt(0.08), epsilon = 1e-12);
        // chi2 = n ln(tss / rss) = 5 ln(6 / 2.4)
        assert_abs_diff_eq!(fit.chi2, 5.0 * log(6.0 / 2.4), epsilon = 1e-10);
    }

    #[test]
    fn duplicated_predictor_is_rank_deficient() {
        let x = [0.1, 0.4, 0.2, 0.9, 0.5];
        let y = [1.0, 2.0, 1.5, 3.0, 2.2];
        let err = fit_linear(&design(&[("V", &x), ("V2", &x)]), &y).unwrap_err();
        assert_eq!(err, Error::RankDeficient { column: "V2".into(), others: vec!["V".into()] });
    }

    #[test]
    fn lrt_edge_cases() {
        assert_eq!(likelihood_ratio_test(-10.0, -10.0, 2).unwrap(), (0.0, 1.0));
        let (_, p_small) = likelihood_ratio_test(-10.0, -12.0, 2).unwrap();
        let (_, p_large) = likelihood_ratio_test(-10.0, -40.0, 2).unwrap();
        assert!(p_large < p_small && p_small < 1.0);
        assert!(likelihood_ratio_test(-10.0, -9.0, 1).is_err());
        assert!(likelihood_ratio_test(-10.0, -11.0, 0).is_err());
        // a tiny deficit within tolerance is clamped to zero
        assert_eq!(likelihood_ratio_test(-10.0, -10.0 + 1e-10, 1).unwrap(), (0.0, 1.0));
    }
}
