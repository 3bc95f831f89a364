//! Run configuration: an optional TOML file named by `EVALPULSE_CONFIG`,
//! overlaid by command-line flags, then validated.

use std::fs;
use std::path::{Path, PathBuf};

use evalpulse_core::dataset::{FilterConfig, Timestamp};
use evalpulse_core::dualreg::{DEFAULT_FOLDS, DEFAULT_HIST_BINS, DEFAULT_MIN_SEGMENT_FRAC};
use evalpulse_core::sentiment::DEFAULT_ENGLISH_THRESHOLD;
use serde::{Deserialize, Serialize, Serializer};

use crate::ingest::{format_timestamp, parse_timestamp, Format};
use crate::lexicons::LexiconPaths;
use crate::CliError;

pub const CONFIG_ENV: &str = "EVALPULSE_CONFIG";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_BINS_PER_DECADE: u32 = 10;
/// Lower cutoff for the count distribution fits.
pub const COUNT_XMIN: f64 = 1.0;

/// Every overridable setting; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub format: Option<Format>,
    pub as_of: Option<String>,
    pub vad_lexicon: Option<PathBuf>,
    pub pn_lexicon: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub assume_english: Option<bool>,
    pub skip_emotions: Option<bool>,
    pub min_age_days: Option<u32>,
    pub min_likes: Option<u64>,
    pub min_dislikes: Option<u64>,
    pub stopword_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub cv_folds: Option<usize>,
    pub min_segment_frac: Option<f64>,
    pub hist_bins: Option<usize>,
    pub bins_per_decade: Option<u32>,
    pub out: Option<PathBuf>,
    pub plots: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| path.display().to_string());
            CliError::config(field, format!("{}: {}", path.display(), e.message().trim()))
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::from_toml(&text, path)
    }

    /// Settings from the file named by `EVALPULSE_CONFIG`, or empty.
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    /// Fields set in `top` win over `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay_fields!(
            self, top, input, format, as_of, vad_lexicon, pn_lexicon, negators, boosters, assume_english,
            skip_emotions, min_age_days, min_likes, min_dislikes, stopword_threshold, seed, cv_folds,
            min_segment_frac, hist_bins, bins_per_decade, out, plots
        )
    }

    /// Validates and fills defaults. Lexicons are demanded only when
    /// `needs_lexicons` holds and emotions are not skipped.
    pub fn resolve(self, needs_lexicons: bool) -> Result<RunConfig, CliError> {
        let input = self.input.ok_or_else(|| CliError::config("input", "required"))?;
        let as_of_text = self.as_of.ok_or_else(|| CliError::config("as_of", "required (ISO-8601 date)"))?;
        let as_of = parse_timestamp(&as_of_text).map_err(|m| CliError::config("as_of", m))?;
        let skip_emotions = self.skip_emotions.unwrap_or(false);

        let lexicons = match (self.vad_lexicon, self.pn_lexicon) {
            (Some(vad), Some(pn)) => Some(LexiconPaths { vad, pn, negators: self.negators, boosters: self.boosters }),
            (None, _) if needs_lexicons && !skip_emotions => {
                return Err(CliError::config("vad_lexicon", "required unless emotions are skipped"))
            }
            (_, None) if needs_lexicons && !skip_emotions => {
                return Err(CliError::config("pn_lexicon", "required unless emotions are skipped"))
            }
            _ => None,
        };

        let stopword_threshold = self.stopword_threshold.unwrap_or(DEFAULT_ENGLISH_THRESHOLD);
        if !(0.0..=1.0).contains(&stopword_threshold) {
            return Err(CliError::config("stopword_threshold", "must lie in [0, 1]"));
        }
        let cv_folds = self.cv_folds.unwrap_or(DEFAULT_FOLDS);
        if cv_folds < 2 {
            return Err(CliError::config("cv_folds", "must be at least 2"));
        }
        let min_segment_frac = self.min_segment_frac.unwrap_or(DEFAULT_MIN_SEGMENT_FRAC);
        if !(min_segment_frac > 0.0 && min_segment_frac < 0.5) {
            return Err(CliError::config("min_segment_frac", "must lie in (0, 0.5)"));
        }
        let hist_bins = self.hist_bins.unwrap_or(DEFAULT_HIST_BINS);
        if hist_bins == 0 {
            return Err(CliError::config("hist_bins", "must be at least 1"));
        }
        let bins_per_decade = self.bins_per_decade.unwrap_or(DEFAULT_BINS_PER_DECADE);
        if bins_per_decade == 0 {
            return Err(CliError::config("bins_per_decade", "must be at least 1"));
        }
        let defaults = FilterConfig::default();
        let format = self.format.unwrap_or_else(|| Format::from_path(&input));

        Ok(RunConfig {
            input,
            format,
            as_of,
            lexicons: if skip_emotions { None } else { lexicons },
            assume_english: self.assume_english.unwrap_or(false),
            skip_emotions,
            filter: FilterConfig {
                min_age_days: self.min_age_days.unwrap_or(defaults.min_age_days),
                min_likes: self.min_likes.unwrap_or(defaults.min_likes),
                min_dislikes: self.min_dislikes.unwrap_or(defaults.min_dislikes),
            },
            stopword_threshold,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            cv_folds,
            min_segment_frac,
            hist_bins,
            bins_per_decade,
            xmin: COUNT_XMIN,
            out: self.out,
            plots: self.plots,
        })
    }
}

/// Validated configuration. Output destinations are not echoed into the
/// report so that the same analysis written to two places stays identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: Format,
    #[serde(serialize_with = "iso")]
    pub as_of: Timestamp,
    #[serde(serialize_with = "lexicon_echo")]
    pub lexicons: Option<LexiconPaths>,
    pub assume_english: bool,
    pub skip_emotions: bool,
    pub filter: FilterConfig,
    pub stopword_threshold: f64,
    pub seed: u64,
    pub cv_folds: usize,
    pub min_segment_frac: f64,
    pub hist_bins: usize,
    pub bins_per_decade: u32,
    pub xmin: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub plots: Option<PathBuf>,
}

fn iso<S: Serializer>(ts: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_timestamp(*ts))
}

fn lexicon_echo<S: Serializer>(paths: &Option<LexiconPaths>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Echo<'a> {
        vad: &'a Path,
        pn: &'a Path,
        negators: Option<&'a Path>,
        boosters: Option<&'a Path>,
    }
    paths
        .as_ref()
        .map(|p| Echo { vad: &p.vad, pn: &p.pn, negators: p.negators.as_deref(), boosters: p.boosters.as_deref() })
        .serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Settings {
        Settings {
            input: Some("items.csv".into()),
            as_of: Some("2020-01-01".into()),
            skip_emotions: Some(true),
            ..Settings::default()
        }
    }

    #[test]
    fn flags_override_the_file() {
        let file = Settings::from_toml("seed = 5\nmin_age_days = 30\n", Path::new("c.toml")).unwrap();
        let merged = file.overlay(Settings { seed: Some(9), ..base() });
        let cfg = merged.resolve(true).unwrap();
        assert_eq!((cfg.seed, cfg.filter.min_age_days), (9, 30));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn validation_names_the_field() {
        let err = Settings { cv_folds: Some(1), ..base() }.resolve(true).unwrap_err().to_string();
        assert!(err.contains("cv_folds"), "{err}");
        let err = Settings { skip_emotions: None, ..base() }.resolve(true).unwrap_err().to_string();
        assert!(err.contains("vad_lexicon"), "{err}");
        let err = Settings::from_toml("min_age_day = 3\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(&err, CliError::Config { field, .. } if field == "min_age_day"), "{err}");
        let err = Settings::from_toml("seed = \"x\"\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, CliError::Config { .. }));
    }
}
