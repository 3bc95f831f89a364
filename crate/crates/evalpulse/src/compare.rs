//! Side-by-side key metrics from several report documents.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub schema: u32,
    pub reports: Vec<String>,
    pub rows: Vec<MetricRow>,
}

const SCALARS: &[(&str, &str)] = &[
    ("n_crawled", "/filter_report/data/n_crawled"),
    ("n_year", "/filter_report/data/n_year"),
    ("n_ld", "/filter_report/data/n_ld"),
    ("likes_best", "/distfit/data/likes/best"),
    ("likes_ks", "/distfit/data/likes/ks"),
    ("dislikes_best", "/distfit/data/dislikes/best"),
    ("dislikes_ks", "/distfit/data/dislikes/ks"),
    ("Lc", "/dualreg/data/dual/lc_rounded"),
    ("lambda", "/dualreg/data/dual/lambda"),
    ("gamma", "/dualreg/data/dual/gamma"),
    ("r2_ols", "/dualreg/data/ols/r2"),
    ("r2_dual", "/dualreg/data/dual/r2"),
    ("gcv_ols", "/dualreg/data/ols/gcv"),
    ("gcv_dual", "/dualreg/data/dual/gcv"),
    ("cv_ols", "/dualreg/data/ols/cv_error"),
    ("cv_dual", "/dualreg/data/dual/cv_error"),
    ("dual_regime_confirmed", "/dualreg/data/dual_regime_confirmed"),
    ("global_items", "/regimes/data/global"),
    ("pol_mean", "/polarization/data/mean"),
    ("pol_fraction_zero", "/polarization/data/fraction_zero"),
];

fn lognormal_param(report: &Value, variable: &str, param: &str) -> Value {
    report
        .pointer(&format!("/distfit/data/{variable}/fits"))
        .and_then(Value::as_array)
        .and_then(|fits| fits.iter().find(|f| f.pointer("/params/family") == Some(&Value::from("lognormal"))))
        .and_then(|f| f.pointer(&format!("/params/{param}")))
        .cloned()
        .unwrap_or(Value::Null)
}

fn regression_rows(reports: &[(String, Value)]) -> Vec<MetricRow> {
    let mut formulas: Vec<String> = Vec::new();
    for (_, r) in reports {
        for entry in r.pointer("/regressions/data").and_then(Value::as_array).into_iter().flatten() {
            if let Some(f) = entry.get("formula").and_then(Value::as_str) {
                if !formulas.iter().any(|g| g == f) {
                    formulas.push(f.to_string());
                }
            }
        }
    }
    let mut rows = Vec::new();
    for formula in formulas {
        let entry = |r: &Value| -> Option<Value> {
            r.pointer("/regressions/data")?
                .as_array()?
                .iter()
                .find(|e| e.get("formula").and_then(Value::as_str) == Some(formula.as_str()))
                .cloned()
        };
        rows.push(MetricRow {
            metric: format!("{formula}: chi2_p"),
            values: reports
                .iter()
                .map(|(_, r)| entry(r).and_then(|e| e.pointer("/data/chi2_p").cloned()).unwrap_or(Value::Null))
                .collect(),
        });
        let mut terms: Vec<String> = Vec::new();
        for (_, r) in reports {
            for t in entry(r).and_then(|e| e.pointer("/data/terms").cloned()).and_then(|t| t.as_array().cloned()).unwrap_or_default() {
                if let Some(name) = t.get("name").and_then(Value::as_str) {
                    if !terms.iter().any(|n| n == name) {
                        terms.push(name.to_string());
                    }
                }
            }
        }
        for term in terms {
            rows.push(MetricRow {
                metric: format!("{formula}: {term}"),
                values: reports
                    .iter()
                    .map(|(_, r)| {
                        entry(r)
                            .and_then(|e| e.pointer("/data/terms").cloned())
                            .and_then(|ts| {
                                ts.as_array()?.iter().find(|t| t.get("name").and_then(Value::as_str) == Some(term.as_str())).cloned()
                            })
                            .and_then(|t| t.get("estimate").cloned())
                            .unwrap_or(Value::Null)
                    })
                    .collect(),
            });
        }
    }
    rows
}

/// Collects the same metrics from each `(label, report)`; absent values are null.
pub fn compare_reports(reports: &[(String, Value)]) -> Comparison {
    let mut rows: Vec<MetricRow> = SCALARS
        .iter()
        .map(|(metric, pointer)| MetricRow {
            metric: metric.to_string(),
            values: reports.iter().map(|(_, r)| r.pointer(pointer).cloned().unwrap_or(Value::Null)).collect(),
        })
        .collect();
    for (variable, param) in [("likes", "mu"), ("likes", "sigma"), ("dislikes", "mu"), ("dislikes", "sigma")] {
        rows.push(MetricRow {
            metric: format!("{variable}_lognormal_{param}"),
            values: reports.iter().map(|(_, r)| lognormal_param(r, variable, param)).collect(),
        });
    }
    rows.extend(regression_rows(reports));
    Comparison { schema: crate::report::SCHEMA_VERSION, reports: reports.iter().map(|(l, _)| l.clone()).collect(), rows }
}

impl Comparison {
    /// Tab-separated table: one metric per line, one column per report.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for label in &self.reports {
            out.push('\t');
            out.push_str(label);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.metric);
            for v in &row.values {
                out.push('\t');
                match v {
                    Value::Null => out.push('-'),
                    Value::String(s) => out.push_str(s),
                    other => out.push_str(&other.to_string()),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn missing_sections_become_null() {
        let a = json!({"filter_report": {"status": "ok", "data": {"n_crawled": 4, "n_year": 2, "n_ld": 1}},
                       "distfit": {"status": "ok", "data": {"likes": {"best": "lognormal",
                           "fits": [{"params": {"family": "lognormal", "mu": 1.5, "sigma": 0.5}}]}}}});
        let b = json!({"filter_report": {"status": "skipped", "reason": "x"}});
        let c = compare_reports(&[("a".into(), a), ("b".into(), b)]);
        let row = |m: &str| c.rows.iter().find(|r| r.metric == m).unwrap().values.clone();
        assert_eq!(row("n_ld"), vec![json!(1), Value::Null]);
        assert_eq!(row("likes_lognormal_mu"), vec![json!(1.5), Value::Null]);
        assert!(c.to_tsv().starts_with("metric\ta\tb\n"));
    }
}
