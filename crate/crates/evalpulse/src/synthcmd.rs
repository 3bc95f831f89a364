//! Synthetic corpora for the `synth` subcommand: per-platform log-normal
//! count presets and the dual-regime likes/dislikes relation.

use std::path::{Path, PathBuf};

use evalpulse_core::synth::{CountModel, Gibrat, KnotModel, SynthConfig, SYNTH_AS_OF, SYNTH_CREATED_AT};
use serde::Serialize;

use crate::ingest::{format_timestamp, write_jsonl};
use crate::report::write_atomic;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Independent log-normal likes and dislikes (Urban Dictionary parameters)
    UrbanDictionary,
    /// Independent log-normal likes and dislikes (YouTube parameters)
    Youtube,
    /// Independent log-normal likes and dislikes (Reddit parameters)
    Reddit,
    /// Independent log-normal likes and dislikes (Imgur parameters)
    Imgur,
    /// Dislikes follow a single-knot relation with threshold L_c = 131
    DualRegime,
    /// Same relation with equal slopes on both sides
    SingleRegime,
    /// Both counts grown by multiplicative shocks
    Gibrat,
}

/// `(likes mu, likes sigma, dislikes mu, dislikes sigma)` of log counts.
pub fn lognormal_preset(preset: Preset) -> Option<(f64, f64, f64, f64)> {
    match preset {
        Preset::UrbanDictionary => Some((4.092, 1.705, 3.657, 1.435)),
        Preset::Youtube => Some((5.492, 2.28, 1.405, 2.528)),
        Preset::Reddit => Some((2.197, 1.332, 0.492, 1.35)),
        Preset::Imgur => Some((4.668, 2.46, 1.821, 1.447)),
        _ => None,
    }
}

pub const DUAL_REGIME_MODEL: KnotModel =
    KnotModel { knot: 4.875_197_323_201_151, lambda: 0.29, gamma: 0.93, intercept: 5.0, noise_sd: 0.5 };

pub fn preset_config(preset: Preset, n: usize, seed: u64) -> SynthConfig {
    let lognormal = |mu, sigma| CountModel::Lognormal { mu, sigma };
    let like_counts = lognormal(DUAL_REGIME_MODEL.knot, 1.5);
    let (likes, dislikes, knot_model) = match preset {
        Preset::DualRegime => (like_counts, like_counts, Some(DUAL_REGIME_MODEL)),
        Preset::SingleRegime => (like_counts, like_counts, Some(KnotModel { lambda: 0.6, gamma: 0.6, ..DUAL_REGIME_MODEL })),
        Preset::Gibrat => {
            let g = CountModel::Gibrat(Gibrat { steps: 100, shock_sd: 0.2, initial: 1.0 });
            (g, g, None)
        }
        _ => {
            let (lm, ls, dm, ds) = lognormal_preset(preset).expect("log-normal preset");
            (lognormal(lm, ls), lognormal(dm, ds), None)
        }
    };
    SynthConfig { seed, n, likes, dislikes, knot_model, emotion_model: None }
}

#[derive(Debug, Serialize)]
pub struct Truth<'a> {
    pub schema: u32,
    pub preset: Option<String>,
    pub created_at: String,
    /// Pass this as `--as-of` so every item passes the age filter.
    pub as_of: String,
    pub generator: &'a SynthConfig,
}

/// `data.jsonl` → `data.truth.json`.
pub fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "synth".into());
    out.with_file_name(format!("{stem}.truth.json"))
}

/// Generates the corpus and writes it plus its truth sidecar. Returns the
/// sidecar path.
pub fn write_synth(config: &SynthConfig, preset: Option<Preset>, out: &Path) -> Result<PathBuf, CliError> {
    let generated = config.generate().map_err(|e| CliError::Input(format!("synth: {e}")))?;
    let mut jsonl = Vec::new();
    write_jsonl(&generated.dataset, &mut jsonl).map_err(|source| CliError::Write { path: out.into(), source })?;
    write_atomic(out, &jsonl)?;

    let truth = Truth {
        schema: crate::report::SCHEMA_VERSION,
        preset: preset.map(|p| format!("{p:?}")),
        created_at: format_timestamp(SYNTH_CREATED_AT),
        as_of: format_timestamp(SYNTH_AS_OF),
        generator: config,
    };
    let path = truth_path(out);
    let mut text = serde_json::to_string_pretty(&truth).expect("truth serializes");
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_regime_knot_is_ln_131() {
        assert_eq!(DUAL_REGIME_MODEL.knot, 131f64.ln());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(truth_path(Path::new("/tmp/a/yt.jsonl")), Path::new("/tmp/a/yt.truth.json"));
    }
}
