//! Stage orchestration: ingest, filter, sentiment, distribution fits,
//! dual-regime fit, regime labels, polarization, correlations, regressions.
//!
//! Polarization runs before the correlation and regression stages, which use
//! it as a column and as a response.

use evalpulse_core::dataset::{filter_items, EvaluationDataset, Item, RegimeLabel};
use evalpulse_core::distfit::{best_fit, exponential_binned_pdf};
use evalpulse_core::dualreg::{
    classify_regime, dual_regime_confirmed, fit_ols, fit_single_knot, hist2d_loglog, kfold_cv_error, to_loglog,
    DualRegimeFit, ModelKind,
};
use evalpulse_core::inference::{fit_linear, fit_logistic, polarization_scores, spearman_matrix, Design};
use evalpulse_core::sentiment::{detect_english, score_emotions, ENGLISH_STOPWORDS};

use crate::config::RunConfig;
use crate::ingest::load_dataset;
use crate::lexicons::Lexicons;
use crate::report::{
    CorrelationSection, DistfitSection, DualSummary, DualregSection, OlsSummary, PolarizationSummary, Quantile,
    RegimeCounts, RegressionEntry, ReportDocument, Section, SentimentSummary, VariableFit,
};
use crate::CliError;

/// Which stages a subcommand runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Distfit,
    Dualreg,
}

const NOT_REQUESTED: &str = "not requested by this subcommand";
const EMOTIONS_OFF: &str = "emotion stages disabled (--skip-emotions or no lexicons)";

pub const POLARIZATION_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Runs every stage enabled by `mode` and `config`. Errors are returned only
/// for unreadable or malformed input; stage failures are recorded in the
/// report.
pub fn run_pipeline(config: &RunConfig, lexicons: Option<&Lexicons>, mode: Mode) -> Result<ReportDocument, CliError> {
    let dataset = load_dataset(&config.input, config.format, config.as_of)?;
    Ok(analyze_dataset(dataset, config, lexicons, mode))
}

pub fn analyze_dataset(
    dataset: EvaluationDataset,
    config: &RunConfig,
    lexicons: Option<&Lexicons>,
    mode: Mode,
) -> ReportDocument {
    let mut report = ReportDocument::new(config);
    let language = |text: &str| config.assume_english || detect_english(text, ENGLISH_STOPWORDS, config.stopword_threshold);
    let (mut data, filter_report) = filter_items(dataset, &config.filter, language);
    let survivors = filter_report.n_ld;
    report.filter_report = Section::Ok(filter_report);

    if survivors == 0 {
        let reason = "no items survived the filters".to_string();
        report.sentiment = Section::Skipped(reason.clone());
        report.distfit = Section::Skipped(reason.clone());
        report.dualreg = Section::Skipped(reason.clone());
        report.regimes = Section::Skipped(reason.clone());
        report.polarization = Section::Skipped(reason.clone());
        report.correlations = Section::Skipped(reason.clone());
        report.regressions = Section::Skipped(reason);
        report.metadata.stages = report.stage_statuses();
        return report;
    }

    let analyze = mode == Mode::Analyze;
    let emotions = if analyze && !config.skip_emotions { lexicons } else { None };
    let emotions_off = if analyze { EMOTIONS_OFF } else { NOT_REQUESTED };

    report.sentiment = match emotions {
        Some(lex) => Section::Ok(score_items(&mut data, lex)),
        None => Section::Skipped(emotions_off.into()),
    };

    report.distfit = if matches!(mode, Mode::Analyze | Mode::Distfit) {
        distfit_stage(&data, config)
    } else {
        Section::Skipped(NOT_REQUESTED.into())
    };

    let mut knot_fit = None;
    if matches!(mode, Mode::Analyze | Mode::Dualreg) {
        report.dualreg = match dualreg_stage(&data, config) {
            Ok((section, fit)) => {
                knot_fit = Some(fit);
                Section::Ok(section)
            }
            Err(e) => Section::Failed(e),
        };
        report.regimes = match (&knot_fit, report.dualreg.unavailable("dualreg")) {
            (Some(fit), _) => label_regimes(&mut data, fit),
            (None, reason) => Section::Skipped(reason.unwrap_or_default()),
        };
    } else {
        report.dualreg = Section::Skipped(NOT_REQUESTED.into());
        report.regimes = Section::Skipped(NOT_REQUESTED.into());
    }

    let mut pol = None;
    report.polarization = if analyze {
        let likes: Vec<u64> = data.items().iter().map(|i| i.likes).collect();
        let dislikes: Vec<u64> = data.items().iter().map(|i| i.dislikes).collect();
        match polarization_scores(&likes, &dislikes) {
            Ok(scores) => {
                let values: Vec<f64> = scores.iter().map(|s| s.pol).collect();
                let summary = summarize_polarization(&values);
                pol = Some(values);
                Section::Ok(summary)
            }
            Err(e) => Section::Failed(e.to_string()),
        }
    } else {
        Section::Skipped(NOT_REQUESTED.into())
    };

    let columns = Columns::new(&data, &report, pol.as_deref());
    if report.sentiment.data().is_some() {
        report.correlations = correlation_stage(&columns);
        report.regressions = regression_stage(&columns, &report);
    } else {
        report.correlations = Section::Skipped(emotions_off.into());
        report.regressions = Section::Skipped(emotions_off.into());
    }

    report.metadata.stages = report.stage_statuses();
    report
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn score_items(data: &mut EvaluationDataset, lex: &Lexicons) -> SentimentSummary {
    for item in data.items_mut() {
        item.emotions = Some(score_emotions(&item.text, &lex.vad, &lex.pn));
    }
    let scores: Vec<_> = data.items().iter().filter_map(|i| i.emotions).collect();
    SentimentSummary {
        n_items: scores.len(),
        n_with_vad: scores.iter().filter(|s| s.v.is_some()).count(),
        n_with_pn: scores.iter().filter(|s| s.p.is_some()).count(),
        mean_v: mean_of(scores.iter().filter_map(|s| s.v)),
        mean_a: mean_of(scores.iter().filter_map(|s| s.a)),
        mean_d: mean_of(scores.iter().filter_map(|s| s.d)),
        mean_p: mean_of(scores.iter().filter_map(|s| s.p)),
        mean_n: mean_of(scores.iter().filter_map(|s| s.n)),
    }
}

fn fit_variable(counts: impl Iterator<Item = u64>, config: &RunConfig) -> Result<VariableFit, String> {
    let all: Vec<f64> = counts.map(|c| c as f64).collect();
    let samples: Vec<f64> = all.iter().copied().filter(|&x| x >= config.xmin).collect();
    let report = best_fit(&samples, config.xmin).map_err(|e| e.to_string())?;
    let histogram = exponential_binned_pdf(&samples, config.bins_per_decade).map_err(|e| e.to_string())?;
    Ok(VariableFit { n: samples.len(), n_below_xmin: all.len() - samples.len(), xmin: config.xmin, report, histogram })
}

fn distfit_stage(data: &EvaluationDataset, config: &RunConfig) -> Section<DistfitSection> {
    let likes = fit_variable(data.items().iter().map(|i| i.likes), config).map_err(|e| format!("likes: {e}"));
    let dislikes = fit_variable(data.items().iter().map(|i| i.dislikes), config).map_err(|e| format!("dislikes: {e}"));
    match (likes, dislikes) {
        (Ok(likes), Ok(dislikes)) => Section::Ok(DistfitSection { likes, dislikes }),
        (Err(e), _) | (_, Err(e)) => Section::Failed(e),
    }
}

fn dualreg_stage(data: &EvaluationDataset, config: &RunConfig) -> Result<(DualregSection, DualRegimeFit), String> {
    let err = |e: evalpulse_core::Error| e.to_string();
    let points = to_loglog(data).map_err(err)?;
    let ols = fit_ols(&points).map_err(err)?;
    let dual = fit_single_knot(&points, config.min_segment_frac).map_err(err)?;
    let ols_cv = kfold_cv_error(&points, ModelKind::Ols, config.cv_folds, config.seed).map_err(err)?;
    let dual_cv = kfold_cv_error(&points, ModelKind::SingleKnot, config.cv_folds, config.seed).map_err(err)?;
    let hist2d = hist2d_loglog(&points, config.hist_bins).map_err(err)?;
    let (lo, hi) = points.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let section = DualregSection {
        n: points.len(),
        x_range: [lo, hi],
        cv_folds: config.cv_folds,
        ols: OlsSummary { fit: ols, cv_error: ols_cv },
        dual: DualSummary { fit: dual, lc_rounded: dual.lc_rounded(), cv_error: dual_cv },
        dual_regime_confirmed: dual_regime_confirmed(&ols, &dual),
        hist2d,
    };
    Ok((section, dual))
}

fn label_regimes(data: &mut EvaluationDataset, fit: &DualRegimeFit) -> Section<RegimeCounts> {
    let mut counts = RegimeCounts { local: 0, global: 0 };
    for item in data.items_mut() {
        match classify_regime(item, fit) {
            Ok(label) => {
                item.regime = Some(label);
                match label {
                    RegimeLabel::Local => counts.local += 1,
                    RegimeLabel::Global => counts.global += 1,
                }
            }
            Err(e) => return Section::Failed(format!("item {}: {e}", item.id)),
        }
    }
    Section::Ok(counts)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize_polarization(values: &[f64]) -> PolarizationSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    PolarizationSummary {
        n: values.len(),
        mean: mean_of(values.iter().copied()).unwrap_or(f64::NAN),
        fraction_zero: values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64,
        quantiles: POLARIZATION_QUANTILES.iter().map(|&q| Quantile { q, value: quantile(&sorted, q) }).collect(),
    }
}

/// Per-item variables for correlations and regressions; `None` marks a
/// missing value.
struct Columns {
    names: Vec<&'static str>,
    values: Vec<Vec<Option<f64>>>,
    omitted: Vec<String>,
}

impl Columns {
    fn new(data: &EvaluationDataset, report: &ReportDocument, pol: Option<&[f64]>) -> Self {
        let items = data.items();
        let emotion = |f: fn(&Item) -> Option<f64>| items.iter().map(f).collect::<Vec<_>>();
        let mut names = vec!["V", "A", "D", "P", "N"];
        let mut values = vec![
            emotion(|i| i.emotions.and_then(|e| e.v)),
            emotion(|i| i.emotions.and_then(|e| e.a)),
            emotion(|i| i.emotions.and_then(|e| e.d)),
            emotion(|i| i.emotions.and_then(|e| e.p)),
            emotion(|i| i.emotions.and_then(|e| e.n)),
        ];
        let mut omitted = Vec::new();
        match report.regimes.unavailable("regimes") {
            None => {
                names.push("G");
                values.push(emotion(|i| i.regime.map(|r| if r == RegimeLabel::Global { 1.0 } else { 0.0 })));
            }
            Some(reason) => omitted.push(format!("G ({reason})")),
        }
        match pol {
            Some(p) => {
                names.push("Pol");
                values.push(p.iter().map(|&v| Some(v)).collect());
            }
            None => omitted.push(format!("Pol ({})", report.polarization.unavailable("polarization").unwrap_or_default())),
        }
        names.push("lnL");
        values.push(emotion(|i| Some((i.likes as f64).ln())));
        names.push("lnD");
        values.push(emotion(|i| Some((i.dislikes as f64).ln())));
        Self { names, values, omitted }
    }

    fn get(&self, name: &str) -> Option<&[Option<f64>]> {
        self.names.iter().position(|&n| n == name).map(|j| self.values[j].as_slice())
    }

    /// Complete rows over `names`, column-major, plus the number dropped.
    fn listwise(&self, names: &[&str]) -> Option<(Vec<Vec<f64>>, usize)> {
        let cols: Vec<&[Option<f64>]> = names.iter().map(|n| self.get(n)).collect::<Option<_>>()?;
        let rows = cols.first().map_or(0, |c| c.len());
        let mut out = vec![Vec::new(); cols.len()];
        let mut dropped = 0;
        for r in 0..rows {
            if cols.iter().all(|c| c[r].is_some_and(f64::is_finite)) {
                for (o, c) in out.iter_mut().zip(&cols) {
                    o.push(c[r].expect("checked"));
                }
            } else {
                dropped += 1;
            }
        }
        Some((out, dropped))
    }
}

fn correlation_stage(columns: &Columns) -> Section<CorrelationSection> {
    let (values, dropped) = columns.listwise(&columns.names).expect("own columns");
    let named: Vec<(&str, &[f64])> = columns.names.iter().zip(&values).map(|(&n, v)| (n, v.as_slice())).collect();
    match spearman_matrix(&named) {
        Ok(matrix) => Section::Ok(CorrelationSection { dropped, omitted: columns.omitted.clone(), matrix }),
        Err(e) => Section::Failed(e.to_string()),
    }
}

const MODELS: [(&str, [&str; 2]); 4] = [("G", ["V", "A"]), ("G", ["P", "N"]), ("Pol", ["V", "A"]), ("Pol", ["P", "N"])];

fn regression_stage(columns: &Columns, report: &ReportDocument) -> Section<Vec<RegressionEntry>> {
    let mut entries = Vec::new();
    for (response, predictors) in MODELS {
        let formula = format!("{response} ~ {}", predictors.join(" + "));
        let mut used = vec![response];
        used.extend(predictors);
        let Some((mut cols, dropped)) = columns.listwise(&used) else {
            let source = if response == "G" { &report.regimes.unavailable("regimes") } else { &report.polarization.unavailable("polarization") };
            entries.push(RegressionEntry { formula, dropped: 0, outcome: Section::Skipped(source.clone().unwrap_or_default()) });
            continue;
        };
        let y = cols.remove(0);
        let outcome = Design::new(predictors.iter().map(|p| p.to_string()).collect(), cols)
            .and_then(|design| {
                if response == "G" {
                    let g: Vec<bool> = y.iter().map(|&v| v > 0.5).collect();
                    fit_logistic(&design, &g)
                } else {
                    fit_linear(&design, &y)
                }
            })
            .map_or_else(|e| Section::Failed(e.to_string()), Section::Ok);
        entries.push(RegressionEntry { formula, dropped, outcome });
    }
    Section::Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.5), 2.0);
        assert_eq!(quantile(&s, 0.25), 1.0);
        assert_eq!(quantile(&s, 0.1), 0.4);
        assert_eq!(quantile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn polarization_summary_counts_zeros() {
        let s = summarize_polarization(&[0.0, 0.0, 1.0, 3.0]);
        assert_eq!(s.fraction_zero, 0.5);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.quantiles[2].value, 0.5);
    }
}
