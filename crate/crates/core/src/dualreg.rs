//! Single-knot hinge regression of `ln D` on `ln L`.
//!
//! The dual-regime model is `y = I + α1·max(0, x - c) + α2·max(0, c - x)`
//! with `x = ln L`, `y = ln D`. Below the knot the local exponent is
//! `λ = -α2`, above it the global exponent is `γ = α1`. The knot is found by
//! exhaustive search over observed `x` values and compared against a plain
//! least-squares line by GCV and k-fold cross-validation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, exp, log, sqrt};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{EvaluationDataset, Item, RegimeLabel};
use crate::linalg::Cholesky;
use crate::numeric::Accumulator;
use crate::synth::stream_rng;
use crate::{Error, Result};

pub const OLS_ENP: f64 = 2.0;
/// Three coefficients plus a penalty of 2 for the knot.
pub const SINGLE_KNOT_ENP: f64 = 5.0;
pub const DEFAULT_MIN_SEGMENT_FRAC: f64 = 0.05;
pub const MIN_SEGMENT_POINTS: usize = 10;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_HIST_BINS: usize = 50;

/// `(ln L, ln D)` pairs with their item ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogLogPoints {
    pub ids: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl LogLogPoints {
    pub fn new(ids: Vec<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if ids.len() != x.len() || x.len() != y.len() {
            return Err(Error::InvalidArgument("ids, x and y differ in length".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("log-log points must be finite".into()));
        }
        Ok(Self { ids, x, y })
    }

    /// Points without ids, for tests and direct use.
    pub fn from_xy(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let ids = (0..x.len()).map(|i| alloc::format!("{i}")).collect();
        Self::new(ids, x, y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

fn log_counts(item: &Item) -> Result<(f64, f64)> {
    if item.likes == 0 || item.dislikes == 0 {
        return Err(Error::ZeroCount(item.id.clone()));
    }
    Ok((log(item.likes as f64), log(item.dislikes as f64)))
}

/// Natural logs of likes and dislikes; every count must be at least 1.
pub fn to_loglog(ds: &EvaluationDataset) -> Result<LogLogPoints> {
    let mut points = LogLogPoints::default();
    for item in ds.items() {
        let (x, y) = log_counts(item)?;
        points.ids.push(item.id.clone());
        points.x.push(x);
        points.y.push(y);
    }
    Ok(points)
}

/// Generalized cross-validation score `rss / (n (1 - enp/n)²)`.
pub fn gcv(rss: f64, n: usize, enp: f64) -> Result<f64> {
    let nf = n as f64;
    if !(enp >= 0.0 && enp < nf) {
        return Err(Error::InvalidArgument(alloc::format!("gcv needs 0 <= enp < n, got enp={enp}, n={n}")));
    }
    if !(rss >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("rss must be non-negative, got {rss}")));
    }
    let shrink = 1.0 - enp / nf;
    Ok(rss / (nf * shrink * shrink))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().copied().collect::<Accumulator>().value() / values.len() as f64
}

fn total_ss(y: &[f64]) -> f64 {
    let m = mean(y);
    y.iter().map(|v| (v - m) * (v - m)).collect::<Accumulator>().value()
}

/// `1 - rss/tss`; a constant response counts as perfectly fitted.
fn r_squared(rss: f64, tss: f64) -> f64 {
    if tss > 0.0 {
        1.0 - rss / tss
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
    pub r2: f64,
    pub gcv: f64,
    pub n: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn fit_ols(points: &LogLogPoints) -> Result<LinearFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let (mx, my) = (mean(&points.x), mean(&points.y));
    let mut sxx = Accumulator::new();
    let mut sxy = Accumulator::new();
    for (x, y) in points.x.iter().zip(&points.y) {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
    }
    if !(sxx.value() > 0.0) {
        return Err(Error::InsufficientSpread);
    }
    let slope = sxy.value() / sxx.value();
    let intercept = my - slope * mx;
    let rss = points
        .x
        .iter()
        .zip(&points.y)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .collect::<Accumulator>()
        .value();
    Ok(LinearFit { intercept, slope, rss, r2: r_squared(rss, total_ss(&points.y)), gcv: gcv(rss, n, OLS_ENP)?, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualRegimeFit {
    #[serde(rename = "I")]
    pub intercept: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub knot: f64,
    #[serde(rename = "Lc")]
    pub lc: f64,
    pub d_at_lc: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub rss: f64,
    pub r2: f64,
    pub gcv: f64,
    pub n: usize,
}

impl DualRegimeFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.alpha1 * (x - self.knot).max(0.0) + self.alpha2 * (self.knot - x).max(0.0)
    }

    /// Threshold in like counts, rounded for display.
    pub fn lc_rounded(&self) -> f64 {
        libm::round(self.lc)
    }
}

/// Least squares on a few columns by modified Gram-Schmidt.
fn least_squares<const P: usize>(columns: &[Vec<f64>; P], y: &[f64]) -> Option<([f64; P], f64)> {
    let n = y.len();
    let mut q: [Vec<f64>; P] = columns.clone();
    let mut r = [[0.0; P]; P];
    for j in 0..P {
        for k in 0..j {
            let dot = (0..n).map(|i| q[k][i] * q[j][i]).collect::<Accumulator>().value();
            r[k][j] = dot;
            for i in 0..n {
                q[j][i] -= dot * q[k][i];
            }
        }
        let norm = sqrt(q[j].iter().map(|v| v * v).collect::<Accumulator>().value());
        let scale = sqrt(columns[j].iter().map(|v| v * v).collect::<Accumulator>().value());
        if !(norm > 1e-12 * scale) {
            return None;
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut qty = [0.0; P];
    for j in 0..P {
        qty[j] = (0..n).map(|i| q[j][i] * y[i]).collect::<Accumulator>().value();
    }
    let mut beta = [0.0; P];
    for j in (0..P).rev() {
        let tail: f64 = (j + 1..P).map(|k| r[j][k] * beta[k]).sum();
        beta[j] = (qty[j] - tail) / r[j][j];
    }
    let rss = (0..n)
        .map(|i| {
            let fitted: f64 = (0..P).map(|j| beta[j] * columns[j][i]).sum();
            (y[i] - fitted) * (y[i] - fitted)
        })
        .collect::<Accumulator>()
        .value();
    Some((beta, rss))
}

fn hinge_fit(points: &LogLogPoints, knot: f64) -> Result<DualRegimeFit> {
    let n = points.len();
    let columns = [
        vec![1.0; n],
        points.x.iter().map(|x| (x - knot).max(0.0)).collect(),
        points.x.iter().map(|x| (knot - x).max(0.0)).collect(),
    ];
    let ([intercept, alpha1, alpha2], rss) =
        least_squares(&columns, &points.y).ok_or(Error::Degenerate("hinge basis is rank deficient"))?;
    Ok(DualRegimeFit {
        intercept,
        alpha1,
        alpha2,
        knot,
        lc: exp(knot),
        d_at_lc: intercept,
        lambda: -alpha2,
        gamma: alpha1,
        rss,
        r2: r_squared(rss, total_ss(&points.y)),
        gcv: gcv(rss, n, SINGLE_KNOT_ENP)?,
        n,
    })
}

/// Admissible knots: distinct `x` values with at least `max(10, ⌈frac·n⌉)`
/// points strictly on each side, in ascending order.
pub fn knot_candidates(points: &LogLogPoints, min_segment_frac: f64) -> Vec<f64> {
    let n = points.len();
    let min_side = MIN_SEGMENT_POINTS.max(ceil(min_segment_frac * n as f64) as usize);
    let mut xs = points.x.clone();
    xs.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && xs[j] == xs[i] {
            j += 1;
        }
        if i >= min_side && n - j >= min_side {
            out.push(xs[i]);
        }
        i = j;
    }
    out
}

/// Exhaustive single-knot search; the best candidate by RSS (ties to the
/// smaller knot) is then refit directly.
pub fn fit_single_knot(points: &LogLogPoints, min_segment_frac: f64) -> Result<DualRegimeFit> {
    let n = points.len();
    if n < 20 {
        return Err(Error::TooFewSamples { needed: 20, got: n });
    }
    if !(0.0..0.5).contains(&min_segment_frac) {
        return Err(Error::InvalidArgument(alloc::format!(
            "min_segment_frac must be in [0, 0.5), got {min_segment_frac}"
        )));
    }
    let candidates = knot_candidates(points, min_segment_frac);
    if candidates.is_empty() {
        return Err(Error::InsufficientSpread);
    }

    // Centered data sorted by x, with prefix sums for O(1) normal equations per knot.
    let (mx, my) = (mean(&points.x), mean(&points.y));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points.x[a].total_cmp(&points.x[b]));
    let xs: Vec<f64> = order.iter().map(|&i| points.x[i] - mx).collect();
    let ys: Vec<f64> = order.iter().map(|&i| points.y[i] - my).collect();
    let mut prefix = vec![[0.0; 4]; n + 1];
    for i in 0..n {
        let (x, y) = (xs[i], ys[i]);
        let p = prefix[i];
        prefix[i + 1] = [p[0] + x, p[1] + x * x, p[2] + y, p[3] + x * y];
    }
    let syy: f64 = ys.iter().map(|y| y * y).sum();

    let mut best: Option<(f64, f64)> = None;
    for &knot in &candidates {
        let c = knot - mx;
        let left = xs.partition_point(|&x| x < c);
        let right_start = xs.partition_point(|&x| x <= c);
        let (nl, nr) = (left as f64, (n - right_start) as f64);
        let l = prefix[left];
        let total = prefix[n];
        let rs = prefix[right_start];
        let r = [total[0] - rs[0], total[1] - rs[1], total[2] - rs[2], total[3] - rs[3]];

        let sp = r[0] - c * nr;
        let spp = r[1] - 2.0 * c * r[0] + c * c * nr;
        let syp = r[3] - c * r[2];
        let sm = c * nl - l[0];
        let smm = c * c * nl - 2.0 * c * l[0] + l[1];
        let sym = c * l[2] - l[3];
        let xtx = [n as f64, sp, sm, sp, spp, 0.0, sm, 0.0, smm];
        let xty = [0.0, syp, sym];
        let Some(chol) = Cholesky::factor(&xtx, 3) else { continue };
        let beta = chol.solve(&xty);
        let rss = (syy - beta[1] * syp - beta[2] * sym).max(0.0);
        if best.is_none_or(|(best_rss, _)| rss < best_rss) {
            best = Some((rss, knot));
        }
    }
    let (_, knot) = best.ok_or(Error::InsufficientSpread)?;
    hinge_fit(points, knot)
}

/// True when the hinge model wins on both GCV and R².
pub fn dual_regime_confirmed(ols: &LinearFit, dual: &DualRegimeFit) -> bool {
    dual.gcv < ols.gcv && dual.r2 > ols.r2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    SingleKnot,
}

/// Mean over `k` seeded folds of the held-out mean squared error.
pub fn kfold_cv_error(points: &LogLogPoints, model: ModelKind, k: usize, seed: u64) -> Result<f64> {
    let n = points.len();
    if k < 2 {
        return Err(Error::InvalidArgument("k-fold cross-validation needs k >= 2".into()));
    }
    if k > n {
        return Err(Error::TooFewSamples { needed: k, got: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(seed, "kfold_cv"));
    let mut total = Accumulator::new();
    for f in 0..k {
        let (lo, hi) = (f * n / k, (f + 1) * n / k);
        let held = &perm[lo..hi];
        let train: Vec<usize> = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
        let train = points.subset(&train);
        let predict: alloc::boxed::Box<dyn Fn(f64) -> f64> = match model {
            ModelKind::Ols => {
                let fit = fit_ols(&train)?;
                alloc::boxed::Box::new(move |x| fit.predict(x))
            }
            ModelKind::SingleKnot => {
                let fit = fit_single_knot(&train, DEFAULT_MIN_SEGMENT_FRAC)?;
                alloc::boxed::Box::new(move |x| fit.predict(x))
            }
        };
        let mse = held
            .iter()
            .map(|&i| {
                let r = points.y[i] - predict(points.x[i]);
                r * r
            })
            .collect::<Accumulator>()
            .value()
            / held.len() as f64;
        total.add(mse);
    }
    Ok(total.value() / k as f64)
}

/// Global iff both `ln L` exceeds the knot and `ln D` exceeds the fitted value there.
pub fn classify_regime(item: &Item, fit: &DualRegimeFit) -> Result<RegimeLabel> {
    let (x, y) = log_counts(item)?;
    Ok(classify_point(x, y, fit))
}

pub fn classify_point(x: f64, y: f64, fit: &DualRegimeFit) -> RegimeLabel {
    if x > fit.knot && y > fit.d_at_lc {
        RegimeLabel::Global
    } else {
        RegimeLabel::Local
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Row-major `bins × bins`, rows indexed by the `x` bin.
    pub counts: Vec<u64>,
    pub bins: usize,
}

impl Histogram2d {
    pub fn count(&self, xi: usize, yi: usize) -> u64 {
        self.counts[xi * self.bins + yi]
    }
}

/// `bins + 1` equal-width edges over `[min, max]`; a single value gets a unit-wide range.
pub fn equal_width_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    edges[bins] = hi;
    edges
}

/// Bin of `v` on `edges`; the last bin is closed on the right.
pub fn bin_of(v: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut i = (((v - lo) / (hi - lo)) * bins as f64) as usize;
    i = i.min(bins - 1);
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    while i + 1 < bins && v >= edges[i + 1] {
        i += 1;
    }
    i
}

pub fn hist2d_loglog(points: &LogLogPoints, bins: usize) -> Result<Histogram2d> {
    if points.is_empty() {
        return Err(Error::Empty);
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let x_edges = equal_width_edges(&points.x, bins);
    let y_edges = equal_width_edges(&points.y, bins);
    let mut counts = vec![0u64; bins * bins];
    for (&x, &y) in points.x.iter().zip(&points.y) {
        counts[bin_of(x, &x_edges) * bins + bin_of(y, &y_edges)] += 1;
    }
    Ok(Histogram2d { x_edges, y_edges, counts, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Timestamp;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loglog_conversion() {
        let items = vec![Item::new("a", "", 1, 1), Item::new("b", "", 7, 3)];
        let ds = EvaluationDataset::new(items, "t", Timestamp(0)).unwrap();
        let p = to_loglog(&ds).unwrap();
        assert_eq!((p.x[0], p.y[0]), (0.0, 0.0));
        assert_eq!((p.x[1], p.y[1]), (log(7.0), log(3.0)));
        let ds = EvaluationDataset::new(vec![Item::new("z", "", 4, 0)], "t", Timestamp(0)).unwrap();
        assert_eq!(to_loglog(&ds), Err(Error::ZeroCount("z".into())));
    }

    #[test]
    fn gcv_arithmetic() {
        assert_abs_diff_eq!(gcv(10.0, 100, 5.0).unwrap(), 10.0 / (100.0 * 0.95 * 0.95), epsilon = 1e-15);
        assert_eq!(gcv(0.0, 50, 5.0).unwrap(), 0.0);
        assert!(gcv(5.0, 4, 4.0).is_err());
    }

    #[test]
    fn ols_on_exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = fit_ols(&LogLogPoints::from_xy(x, y).unwrap()).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert!(fit.rss < 1e-20);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
        assert!(fit_ols(&LogLogPoints::from_xy(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap()).is_err());
        assert_eq!(
            fit_ols(&LogLogPoints::from_xy(vec![1.0; 3], vec![1.0, 2.0, 3.0]).unwrap()),
            Err(Error::InsufficientSpread)
        );
    }

    #[test]
    fn candidates_respect_segment_guard() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let p = LogLogPoints::from_xy(x.clone(), x).unwrap();
        // 10 points strictly below and above: x = 10..=19
        assert_eq!(knot_candidates(&p, 0.05), (10..20).map(f64::from).collect::<Vec<_>>());
        assert!(fit_single_knot(&LogLogPoints::from_xy(vec![1.0; 10], vec![1.0; 10]).unwrap(), 0.05).is_err());
        let flat = LogLogPoints::from_xy(
            (0..25).map(|i| f64::from(i % 2)).collect(),
            (0..25).map(f64::from).collect(),
        )
        .unwrap();
        assert_eq!(fit_single_knot(&flat, 0.05), Err(Error::InsufficientSpread));
    }

    #[test]
    fn hinge_recovers_planted_piecewise_line() {
        let knot = 4.0;
        let x: Vec<f64> = (0..80).map(|i| f64::from(i) * 0.1).collect();
        let y = x.iter().map(|&v| 1.0 + 0.93 * (v - knot).max(0.0) - 0.29 * (knot - v).max(0.0)).collect();
        let fit = fit_single_knot(&LogLogPoints::from_xy(x, y).unwrap(), 0.05).unwrap();
        assert_abs_diff_eq!(fit.knot, knot, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.gamma, 0.93, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.lambda, 0.29, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.d_at_lc, 1.0, epsilon = 1e-9);
        assert!(fit.rss < 1e-18);
    }

    #[test]
    fn regime_boundaries_are_local() {
        let fit = DualRegimeFit {
            intercept: 1.0,
            alpha1: 0.9,
            alpha2: -0.3,
            knot: 2.0,
            lc: exp(2.0),
            d_at_lc: 1.0,
            lambda: 0.3,
            gamma: 0.9,
            rss: 0.0,
            r2: 1.0,
            gcv: 0.0,
            n: 0,
        };
        assert_eq!(classify_point(2.5, 1.5, &fit), RegimeLabel::Global);
        assert_eq!(classify_point(2.5, 1.0, &fit), RegimeLabel::Local);
        assert_eq!(classify_point(2.0, 5.0, &fit), RegimeLabel::Local);
        assert_eq!(classify_point(1.0, 5.0, &fit), RegimeLabel::Local);
    }

    #[test]
    fn hist2d_single_point_and_degenerate_axis() {
        let h = hist2d_loglog(&LogLogPoints::from_xy(vec![1.0], vec![2.0]).unwrap(), 50).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!((h.x_edges[0], h.x_edges[50]), (0.5, 1.5));
        let h = hist2d_loglog(&LogLogPoints::from_xy(vec![0.0, 1.0, 1.0], vec![0.0, 0.5, 1.0]).unwrap(), 2).unwrap();
        assert_eq!(h.counts, vec![1, 0, 0, 2]);
    }
}
