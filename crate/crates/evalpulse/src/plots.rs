//! Tab-separated plot data: binned densities with the fitted log-normal
//! curve, the 2-D log-log histogram and the fitted regime lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use evalpulse_core::distfit::{Family, Params};
use serde::Serialize;

use crate::report::{write_atomic, DualregSection, ReportDocument, VariableFit};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub written: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotManifest {
    pub schema: u32,
    pub files: Vec<ManifestEntry>,
}

/// Plain log-normal density.
pub fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn pdf_table(fit: &VariableFit) -> (String, usize) {
    let lognormal = fit.report.fit(Family::Lognormal).and_then(|f| match f.params {
        Params::Lognormal { mu, sigma } => Some((mu, sigma)),
        _ => None,
    });
    let h = &fit.histogram;
    let mut out = String::from("bin_lo\tbin_hi\tcenter\tcount\tdensity\tlognormal_pdf\n");
    for k in 0..h.centers.len() {
        let curve = lognormal.map_or(f64::NAN, |(mu, sigma)| lognormal_pdf(h.centers[k], mu, sigma));
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", h.edges[k], h.edges[k + 1], h.centers[k], h.counts[k], h.densities[k], curve);
    }
    (out, h.centers.len())
}

fn hist2d_table(d: &DualregSection) -> (String, usize) {
    let h = &d.hist2d;
    let mut out = String::from("x_lo\tx_hi\ty_lo\ty_hi\tcount\n");
    let (nx, ny) = (h.x_edges.len() - 1, h.y_edges.len() - 1);
    for i in 0..nx {
        for j in 0..ny {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", h.x_edges[i], h.x_edges[i + 1], h.y_edges[j], h.y_edges[j + 1], h.count(i, j));
        }
    }
    (out, nx * ny)
}

/// Segment end points in log space: the OLS line, the two regime segments
/// and the threshold lines `ln L = ln L_c` and `ln D = ln D(L_c)`.
fn regime_lines_table(d: &DualregSection) -> (String, usize) {
    let fit = &d.dual.fit;
    let [x0, x1] = d.x_range;
    let y_edges = &d.hist2d.y_edges;
    let (y0, y1) = (y_edges[0], y_edges[y_edges.len() - 1]);
    let ols = |x: f64| d.ols.fit.intercept + d.ols.fit.slope * x;
    let rows = [
        ("ols", x0, ols(x0)),
        ("ols", x1, ols(x1)),
        ("local", x0, fit.predict(x0)),
        ("local", fit.knot, fit.d_at_lc),
        ("global", fit.knot, fit.d_at_lc),
        ("global", x1, fit.predict(x1)),
        ("threshold_lc", fit.knot, y0),
        ("threshold_lc", fit.knot, y1),
        ("threshold_d_lc", x0, fit.d_at_lc),
        ("threshold_d_lc", x1, fit.d_at_lc),
    ];
    let mut out = String::from("line\tln_likes\tln_dislikes\n");
    for (line, x, y) in rows {
        let _ = writeln!(out, "{line}\t{x}\t{y}");
    }
    (out, rows.len())
}

/// Writes the four data files available in `report` plus `manifest.json`.
pub fn emit_plot_data(report: &ReportDocument, out_dir: &Path) -> Result<PlotManifest, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Write { path: out_dir.into(), source })?;
    let mut files = Vec::new();
    let mut emit = |name: &str, table: Option<(String, usize)>, missing: Option<String>| -> Result<(), CliError> {
        match table {
            Some((text, rows)) => {
                write_atomic(&out_dir.join(name), text.as_bytes())?;
                files.push(ManifestEntry { file: name.into(), written: true, rows: Some(rows), note: None });
            }
            None => files.push(ManifestEntry { file: name.into(), written: false, rows: None, note: missing }),
        }
        Ok(())
    };
    let distfit = report.distfit.data();
    let dualreg = report.dualreg.data();
    let why_distfit = report.distfit.unavailable("distfit");
    let why_dualreg = report.dualreg.unavailable("dualreg");
    emit("pdf_likes.tsv", distfit.map(|d| pdf_table(&d.likes)), why_distfit.clone())?;
    emit("pdf_dislikes.tsv", distfit.map(|d| pdf_table(&d.dislikes)), why_distfit)?;
    emit("hist2d.tsv", dualreg.map(hist2d_table), why_dualreg.clone())?;
    emit("regime_lines.tsv", dualreg.map(regime_lines_table), why_dualreg)?;

    let manifest = PlotManifest { schema: crate::report::SCHEMA_VERSION, files };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&out_dir.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lognormal_pdf_matches_closed_form_points() {
        // at x = e^mu the density is 1 / (x sigma sqrt(2 pi))
        let (mu, sigma) = (1.3f64, 0.7f64);
        let x = mu.exp();
        let expected = 1.0 / (x * sigma * (2.0 * std::f64::consts::PI).sqrt());
        assert!((lognormal_pdf(x, mu, sigma) - expected).abs() < 1e-15);
        // one sigma out the density drops by e^{-1/2}, times the 1/x factor
        let x1 = (mu + sigma).exp();
        let ratio = lognormal_pdf(x1, mu, sigma) * x1 / (lognormal_pdf(x, mu, sigma) * x);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-15);
    }
}
