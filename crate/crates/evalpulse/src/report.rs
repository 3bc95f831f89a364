//! The report document. Sections serialize as `{"status": "ok", "data": ...}`,
//! `{"status": "skipped", "reason": ...}` or `{"status": "failed", "error": ...}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use evalpulse_core::dataset::FilterReport;
use evalpulse_core::distfit::{DistFitReport, LogHistogram};
use evalpulse_core::dualreg::{DualRegimeFit, Histogram2d, LinearFit};
use evalpulse_core::inference::{CorrelationMatrix, RegressionResult};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::config::RunConfig;
use crate::ingest::format_timestamp;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "evalpulse";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Filter,
    Sentiment,
    Distfit,
    Dualreg,
    Regimes,
    Polarization,
    Correlations,
    Regressions,
}

impl Stage {
    pub const ORDER: [Stage; 9] = [
        Stage::Ingest,
        Stage::Filter,
        Stage::Sentiment,
        Stage::Distfit,
        Stage::Dualreg,
        Stage::Regimes,
        Stage::Polarization,
        Stage::Correlations,
        Stage::Regressions,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section<T> {
    Ok(T),
    Skipped(String),
    Failed(String),
}

impl<T> Section<T> {
    pub fn data(&self) -> Option<&T> {
        match self {
            Section::Ok(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, Section::Failed(_))
    }

    /// Reason a dependent stage cannot run, if this one produced nothing.
    pub fn unavailable(&self, name: &str) -> Option<String> {
        match self {
            Section::Ok(_) => None,
            Section::Skipped(r) => Some(format!("{name} skipped: {r}")),
            Section::Failed(e) => Some(format!("{name} failed: {e}")),
        }
    }

    fn status(&self) -> StageStatus {
        match self {
            Section::Ok(_) => StageStatus::Ok,
            Section::Skipped(_) => StageStatus::Skipped,
            Section::Failed(_) => StageStatus::Failed,
        }
    }
}

impl<T: Serialize> Serialize for Section<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        match self {
            Section::Ok(v) => {
                map.serialize_entry("status", "ok")?;
                map.serialize_entry("data", v)?;
            }
            Section::Skipped(reason) => {
                map.serialize_entry("status", "skipped")?;
                map.serialize_entry("reason", reason)?;
            }
            Section::Failed(error) => {
                map.serialize_entry("status", "failed")?;
                map.serialize_entry("error", error)?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub input: String,
    pub as_of: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SentimentSummary {
    pub n_items: usize,
    pub n_with_vad: usize,
    pub n_with_pn: usize,
    pub mean_v: Option<f64>,
    pub mean_a: Option<f64>,
    pub mean_d: Option<f64>,
    pub mean_p: Option<f64>,
    pub mean_n: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariableFit {
    pub n: usize,
    /// Items below `xmin`, left out of the fits.
    pub n_below_xmin: usize,
    pub xmin: f64,
    #[serde(flatten)]
    pub report: DistFitReport,
    pub histogram: LogHistogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistfitSection {
    pub likes: VariableFit,
    pub dislikes: VariableFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct OlsSummary {
    #[serde(flatten)]
    pub fit: LinearFit,
    pub cv_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualSummary {
    #[serde(flatten)]
    pub fit: DualRegimeFit,
    pub lc_rounded: f64,
    pub cv_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualregSection {
    pub n: usize,
    /// Range of `ln L` over the fitted points.
    pub x_range: [f64; 2],
    pub cv_folds: usize,
    pub ols: OlsSummary,
    pub dual: DualSummary,
    pub dual_regime_confirmed: bool,
    pub hist2d: Histogram2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeCounts {
    pub local: usize,
    pub global: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizationSummary {
    pub n: usize,
    pub mean: f64,
    pub fraction_zero: f64,
    pub quantiles: Vec<Quantile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationSection {
    /// Rows dropped for missing scores (listwise deletion).
    pub dropped: usize,
    /// Columns left out because their stage produced nothing.
    pub omitted: Vec<String>,
    #[serde(flatten)]
    pub matrix: CorrelationMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionEntry {
    pub formula: String,
    pub dropped: usize,
    #[serde(flatten)]
    pub outcome: Section<RegressionResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub metadata: Metadata,
    pub filter_report: Section<FilterReport>,
    pub sentiment: Section<SentimentSummary>,
    pub distfit: Section<DistfitSection>,
    pub dualreg: Section<DualregSection>,
    pub regimes: Section<RegimeCounts>,
    pub polarization: Section<PolarizationSummary>,
    pub correlations: Section<CorrelationSection>,
    pub regressions: Section<Vec<RegressionEntry>>,
}

impl ReportDocument {
    pub fn new(config: &RunConfig) -> Self {
        fn pending<T>() -> Section<T> {
            Section::Skipped("not run".to_string())
        }
        Self {
            schema: SCHEMA_VERSION,
            metadata: Metadata {
                tool: TOOL,
                version: env!("CARGO_PKG_VERSION"),
                input: config.input.display().to_string(),
                as_of: format_timestamp(config.as_of),
                seed: config.seed,
                stages: Vec::new(),
                config: config.clone(),
            },
            filter_report: pending(),
            sentiment: pending(),
            distfit: pending(),
            dualreg: pending(),
            regimes: pending(),
            polarization: pending(),
            correlations: pending(),
            regressions: pending(),
        }
    }

    /// Status of each stage in pipeline order. Ingest succeeded whenever a
    /// report exists.
    pub fn stage_statuses(&self) -> Vec<StageRecord> {
        fn record<T>(stage: Stage, s: &Section<T>) -> StageRecord {
            let detail = match s {
                Section::Ok(_) => None,
                Section::Skipped(r) | Section::Failed(r) => Some(r.clone()),
            };
            StageRecord { stage, status: s.status(), detail }
        }
        let mut out = vec![StageRecord { stage: Stage::Ingest, status: StageStatus::Ok, detail: None }];
        out.push(record(Stage::Filter, &self.filter_report));
        if let Some(f) = self.filter_report.data() {
            if f.n_ld == 0 {
                let last = out.last_mut().expect("filter record");
                last.status = StageStatus::Failed;
                last.detail = Some("no items survived the filters".into());
            }
        }
        out.push(record(Stage::Sentiment, &self.sentiment));
        out.push(record(Stage::Distfit, &self.distfit));
        out.push(record(Stage::Dualreg, &self.dualreg));
        out.push(record(Stage::Regimes, &self.regimes));
        out.push(record(Stage::Polarization, &self.polarization));
        out.push(record(Stage::Correlations, &self.correlations));
        let mut regressions = record(Stage::Regressions, &self.regressions);
        if let Some(entries) = self.regressions.data() {
            let failed: Vec<String> = entries
                .iter()
                .filter_map(|e| match &e.outcome {
                    Section::Failed(err) => Some(format!("{}: {err}", e.formula)),
                    _ => None,
                })
                .collect();
            if !failed.is_empty() {
                regressions.status = StageStatus::Failed;
                regressions.detail = Some(failed.join("; "));
            }
        }
        out.push(regressions);
        out
    }

    pub fn any_failed(&self) -> bool {
        self.stage_statuses().iter().any(|r| r.status == StageStatus::Failed)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Writes next to `path` and renames over it, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let err = |source| CliError::Write { path: path.into(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| err(std::io::Error::other("not a file path")))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(err)
}
