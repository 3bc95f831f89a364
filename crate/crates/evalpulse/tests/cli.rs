use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evalpulse::plots::lognormal_pdf;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evalpulse"));
    cmd.env_remove("EVALPULSE_CONFIG");
    cmd
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn synth(dir: &Path, preset: &str, n: usize) -> PathBuf {
    let out = dir.join(format!("{preset}.jsonl"));
    let status = bin()
        .args(["synth", "--preset", preset, "--seed", "3", "--n", &n.to_string(), "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    out
}

fn analyze(input: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("analyze")
        .arg("--input")
        .arg(input)
        .args(["--as-of", "2020-01-01"])
        .arg("--vad-lexicon")
        .arg(data("vad.tsv"))
        .arg("--pn-lexicon")
        .arg(data("pn.tsv"))
        .arg("--negators")
        .arg(data("negators.txt"))
        .arg("--boosters")
        .arg(data("boosters.tsv"))
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn status(report: &Value, section: &str) -> String {
    report[section]["status"].as_str().unwrap().to_string()
}

const SECTIONS: [&str; 8] =
    ["filter_report", "sentiment", "distfit", "dualreg", "regimes", "polarization", "correlations", "regressions"];

#[test]
fn full_analysis_populates_every_section_and_plot_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "dual-regime", 4000);
    let truth = read_json(&dir.path().join("dual-regime.truth.json"));
    assert_eq!(truth["generator"]["knot_model"]["gamma"], 0.93);

    let out = dir.path().join("report.json");
    let plots = dir.path().join("plots");
    let run = analyze(&input, &out, &["--plots", plots.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    assert_eq!(report["schema"], 1);
    for s in SECTIONS {
        assert_eq!(status(&report, s), "ok", "{s}: {}", report[s]);
    }
    let stages: Vec<&str> =
        report["metadata"]["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(
        stages,
        ["ingest", "filter", "sentiment", "distfit", "dualreg", "regimes", "polarization", "correlations", "regressions"]
    );
    let formulas: Vec<&str> = report["regressions"]["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["formula"].as_str().unwrap())
        .collect();
    assert_eq!(formulas, ["G ~ V + A", "G ~ P + N", "Pol ~ V + A", "Pol ~ P + N"]);
    let n_ld = report["filter_report"]["data"]["n_ld"].as_u64().unwrap();
    assert_eq!(n_ld, 4000);
    let counts = report["regimes"]["data"].clone();
    assert_eq!(counts["local"].as_u64().unwrap() + counts["global"].as_u64().unwrap(), n_ld);

    let manifest = read_json(&plots.join("manifest.json"));
    assert_eq!(manifest["files"].as_array().unwrap().len(), 4);
    assert!(manifest["files"].as_array().unwrap().iter().all(|f| f["written"] == true));

    // hist2d counts sum to the surviving item count
    let hist = std::fs::read_to_string(plots.join("hist2d.tsv")).unwrap();
    let total: u64 = hist.lines().skip(1).map(|l| l.rsplit('\t').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, n_ld);
    assert_eq!(hist.lines().count(), 1 + 50 * 50);

    // the fitted curve column is the log-normal pdf at each bin center
    let fits = report["distfit"]["data"]["likes"]["fits"].as_array().unwrap();
    let ln = fits.iter().find(|f| f["params"]["family"] == "lognormal").unwrap();
    let (mu, sigma) = (ln["params"]["mu"].as_f64().unwrap(), ln["params"]["sigma"].as_f64().unwrap());
    let pdf = std::fs::read_to_string(plots.join("pdf_likes.tsv")).unwrap();
    for line in pdf.lines().skip(1) {
        let cols: Vec<f64> = line.split('\t').map(|c| c.parse().unwrap()).collect();
        let (center, curve) = (cols[2], cols[5]);
        let z = (center.ln() - mu) / sigma;
        let direct = (-z * z / 2.0).exp() / (center * sigma * (2.0 * std::f64::consts::PI).sqrt());
        assert!((curve - direct).abs() <= 1e-12 * direct.max(1e-300), "{line}");
        assert_eq!(curve, lognormal_pdf(center, mu, sigma));
    }
}

#[test]
fn skip_emotions_keeps_count_stages() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "dual-regime", 1500);
    let out = dir.path().join("r.json");
    let run = bin()
        .arg("analyze")
        .arg("--input")
        .arg(&input)
        .args(["--as-of", "2020-01-01", "--skip-emotions", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    for s in ["sentiment", "correlations", "regressions"] {
        assert_eq!(status(&report, s), "skipped");
        assert!(report[s]["reason"].as_str().unwrap().contains("skip"));
    }
    for s in ["filter_report", "distfit", "dualreg", "regimes", "polarization"] {
        assert_eq!(status(&report, s), "ok", "{s}");
    }
}

#[test]
fn everything_filtered_exits_one_with_filter_report_only() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "youtube", 200);
    let out = dir.path().join("r.json");
    // the synthetic items were created on 2016-01-01
    let run = bin()
        .arg("analyze")
        .arg("--input")
        .arg(&input)
        .args(["--as-of", "2016-06-01", "--skip-emotions", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    let report = read_json(&out);
    assert_eq!(status(&report, "filter_report"), "ok");
    assert_eq!(report["filter_report"]["data"]["n_ld"], 0);
    assert!(report["filter_report"]["data"]["warning"].is_string());
    for s in &SECTIONS[1..] {
        assert_eq!(status(&report, s), "skipped", "{s}");
    }
}

#[test]
fn input_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["analyze", "--input", "/nonexistent/items.jsonl", "--as-of", "2020-01-01", "--skip-emotions"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\":\"a\",\"text\":\"t\",\"likes\":1,\"dislikes\":1}\n{\"id\":\"b\",\"text\":\"t\",\"likes\":-2,\"dislikes\":1}\n").unwrap();
    let run = bin().arg("analyze").arg("--input").arg(&bad).args(["--as-of", "2020-01-01", "--skip-emotions"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("line 2") && err.contains("negative count"), "{err}");

    let run = bin()
        .arg("analyze")
        .arg("--input")
        .arg(&bad)
        .args(["--as-of", "2020-01-01", "--skip-emotions", "--cv-folds", "1"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("cv_folds"));

    let run = bin().arg("analyze").arg("--input").arg(&bad).args(["--as-of", "2020-01-01"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("vad_lexicon"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "dual-regime", 1000);
    let config = dir.path().join("evalpulse.toml");
    std::fs::write(&config, format!("input = {:?}\nas_of = \"2020-01-01\"\nskip_emotions = true\nseed = 4\ncv_folds = 5\n", input)).unwrap();
    let out = dir.path().join("r.json");
    let run = bin().env("EVALPULSE_CONFIG", &config).args(["dualreg", "--seed", "9", "--out"]).arg(&out).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    assert_eq!(report["metadata"]["seed"], 9);
    assert_eq!(report["metadata"]["config"]["cv_folds"], 5);
    assert_eq!(report["dualreg"]["data"]["cv_folds"], 5);
    assert_eq!(status(&report, "distfit"), "skipped");

    std::fs::write(&config, "min_age_dayz = 3\n").unwrap();
    let run = bin().env("EVALPULSE_CONFIG", &config).args(["dualreg"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("min_age_dayz"));
}

#[test]
fn csv_and_jsonl_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = synth(dir.path(), "reddit", 600);
    let csv_path = dir.path().join("reddit.csv");
    let mut w = csv::Writer::from_path(&csv_path).unwrap();
    w.write_record(["id", "text", "likes", "dislikes", "created_at"]).unwrap();
    for line in std::fs::read_to_string(&jsonl).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        w.write_record([
            v["id"].as_str().unwrap().to_string(),
            v["text"].as_str().unwrap().to_string(),
            v["likes"].to_string(),
            v["dislikes"].to_string(),
            v["created_at"].as_str().unwrap().to_string(),
        ])
        .unwrap();
    }
    w.flush().unwrap();
    let reports: Vec<Value> = [&jsonl, &csv_path]
        .iter()
        .map(|input| {
            let out = input.with_extension("report.json");
            let run = bin().arg("distfit").arg("--input").arg(input).args(["--as-of", "2020-01-01", "--out"]).arg(&out).output().unwrap();
            assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
            read_json(&out)
        })
        .collect();
    assert_eq!(reports[0]["distfit"], reports[1]["distfit"]);
    assert_eq!(reports[0]["filter_report"], reports[1]["filter_report"]);
    assert_eq!(reports[1]["metadata"]["config"]["format"], "csv");
}

#[test]
fn emotions_subcommand_scores_each_survivor() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("items.jsonl");
    std::fs::write(
        &input,
        "{\"id\":\"x\",\"text\":\"the party was not good!!\",\"likes\":3,\"dislikes\":1,\"created_at\":\"2015-01-01\"}\n\
         {\"id\":\"y\",\"text\":\"the cat\",\"likes\":3,\"dislikes\":1,\"created_at\":\"2015-01-01\"}\n",
    )
    .unwrap();
    let run = bin()
        .arg("emotions")
        .arg("--input")
        .arg(&input)
        .args(["--as-of", "2020-01-01"])
        .arg("--vad-lexicon")
        .arg(data("vad.tsv"))
        .arg("--pn-lexicon")
        .arg(data("pn.tsv"))
        .arg("--negators")
        .arg(data("negators.txt"))
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let lines: Vec<Value> = String::from_utf8(run.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "x");
    // party +2, "not good" -> +1; the trailing "!!" lifts the strongest positive
    assert_eq!(lines[0]["raw_p"], 3);
    assert!(lines[0]["v"].is_number());
    assert_eq!(lines[1]["raw_p"], 1);
}

#[test]
fn compare_lines_up_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for preset in ["dual-regime", "single-regime"] {
        let input = synth(dir.path(), preset, 3000);
        let out = dir.path().join(format!("{preset}.json"));
        let run = bin().arg("analyze").arg("--input").arg(&input).args(["--as-of", "2020-01-01", "--skip-emotions", "--out"]).arg(&out).output().unwrap();
        assert_eq!(run.status.code(), Some(0));
        outs.push(out);
    }
    let run = bin().arg("compare").args(&outs).args(["--format", "tsv"]).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    let table = String::from_utf8(run.stdout).unwrap();
    let row = |metric: &str| table.lines().find(|l| l.starts_with(&format!("{metric}\t"))).unwrap().to_string();
    assert_eq!(row("n_ld"), "n_ld\t3000\t3000");
    let confirmed = row("dual_regime_confirmed");
    assert!(confirmed.starts_with("dual_regime_confirmed\ttrue\t"), "{confirmed}");
    let json = bin().arg("compare").args(&outs).output().unwrap();
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}
