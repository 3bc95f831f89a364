use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evalpulse::config::{RunConfig, Settings};
use evalpulse::ingest::{load_dataset, Format};
use evalpulse::lexicons::Lexicons;
use evalpulse::pipeline::{run_pipeline, Mode};
use evalpulse::report::write_atomic;
use evalpulse::synthcmd::{preset_config, write_synth, Preset};
use evalpulse::{compare, exit, CliError};
use evalpulse_core::dataset::filter_items;
use evalpulse_core::sentiment::{detect_english, score_emotions, ENGLISH_STOPWORDS};
use evalpulse_core::synth::SynthConfig;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "evalpulse", version, about = "Collective-evaluation analysis of likes/dislikes corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the JSON report
    Analyze(RunArgs),
    /// Filter, then fit the like and dislike count distributions
    Distfit(RunArgs),
    /// Filter, then fit the single-knot likes/dislikes relation and label regimes
    Dualreg(RunArgs),
    /// Filter, then score item texts (one JSON line per item)
    Emotions(RunArgs),
    /// Generate a synthetic corpus plus a truth sidecar
    Synth(SynthArgs),
    /// Put key metrics of several reports side by side
    Compare(CompareArgs),
}

/// Flags override the config file named by EVALPULSE_CONFIG.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Reference date for the age filter (ISO-8601)
    #[arg(long)]
    as_of: Option<String>,
    #[arg(long)]
    vad_lexicon: Option<PathBuf>,
    #[arg(long)]
    pn_lexicon: Option<PathBuf>,
    #[arg(long)]
    negators: Option<PathBuf>,
    #[arg(long)]
    boosters: Option<PathBuf>,
    /// Skip the stopword language check
    #[arg(long)]
    assume_english: bool,
    /// Skip sentiment, correlations and regressions
    #[arg(long)]
    skip_emotions: bool,
    #[arg(long)]
    min_age_days: Option<u32>,
    #[arg(long)]
    min_likes: Option<u64>,
    #[arg(long)]
    min_dislikes: Option<u64>,
    #[arg(long)]
    stopword_threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    min_segment_frac: Option<f64>,
    #[arg(long)]
    hist_bins: Option<usize>,
    #[arg(long)]
    bins_per_decade: Option<u32>,
    /// Report path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for plot-data files
    #[arg(long)]
    plots: Option<PathBuf>,
}

impl RunArgs {
    fn settings(self) -> Settings {
        Settings {
            input: self.input,
            format: self.format,
            as_of: self.as_of,
            vad_lexicon: self.vad_lexicon,
            pn_lexicon: self.pn_lexicon,
            negators: self.negators,
            boosters: self.boosters,
            assume_english: self.assume_english.then_some(true),
            skip_emotions: self.skip_emotions.then_some(true),
            min_age_days: self.min_age_days,
            min_likes: self.min_likes,
            min_dislikes: self.min_dislikes,
            stopword_threshold: self.stopword_threshold,
            seed: self.seed,
            cv_folds: self.cv_folds,
            min_segment_frac: self.min_segment_frac,
            hist_bins: self.hist_bins,
            bins_per_decade: self.bins_per_decade,
            out: self.out,
            plots: self.plots,
        }
    }

    fn resolve(self, needs_lexicons: bool) -> Result<RunConfig, CliError> {
        Settings::from_env()?.overlay(self.settings()).resolve(needs_lexicons)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "dual-regime")]
    preset: Preset,
    /// TOML generator description; replaces the preset
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSONL output; the truth file is written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareFormat {
    Json,
    Tsv,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: CompareFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn run_report(args: RunArgs, mode: Mode) -> Result<u8, CliError> {
    let config = args.resolve(mode == Mode::Analyze)?;
    let lexicons = match (&config.lexicons, mode) {
        (Some(paths), Mode::Analyze) => Some(Lexicons::load(paths)?),
        _ => None,
    };
    let report = run_pipeline(&config, lexicons.as_ref(), mode)?;
    emit(config.out.as_ref(), &report.to_json())?;
    if let Some(dir) = &config.plots {
        evalpulse::plots::emit_plot_data(&report, dir)?;
    }
    for stage in &report.metadata.stages {
        if let Some(detail) = stage.detail.as_ref().filter(|_| stage.status == evalpulse::report::StageStatus::Failed) {
            eprintln!("evalpulse: stage {:?} failed: {detail}", stage.stage);
        }
    }
    Ok(if report.any_failed() { exit::STAGE_FAILED } else { exit::OK })
}

#[derive(Serialize)]
struct ScoredItem<'a> {
    id: &'a str,
    #[serde(flatten)]
    scores: evalpulse_core::sentiment::EmotionScores,
}

fn run_emotions(args: RunArgs) -> Result<u8, CliError> {
    let config = args.resolve(true)?;
    let paths = config
        .lexicons
        .as_ref()
        .ok_or_else(|| CliError::config("skip_emotions", "the emotions subcommand needs lexicons"))?;
    let lexicons = Lexicons::load(paths)?;
    let dataset = load_dataset(&config.input, config.format, config.as_of)?;
    let language =
        |t: &str| config.assume_english || detect_english(t, ENGLISH_STOPWORDS, config.stopword_threshold);
    let (survivors, _) = filter_items(dataset, &config.filter, language);
    let mut text = String::new();
    for item in survivors.items() {
        let scores = score_emotions(&item.text, &lexicons.vad, &lexicons.pn);
        text.push_str(&serde_json::to_string(&ScoredItem { id: &item.id, scores }).expect("scores serialize"));
        text.push('\n');
    }
    emit(config.out.as_ref(), &text)?;
    Ok(exit::OK)
}

fn run_synth(args: SynthArgs) -> Result<u8, CliError> {
    let (mut config, preset) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            let config: SynthConfig =
                toml::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e.message()))?;
            (config, None)
        }
        None => (preset_config(args.preset, 10_000, 0), Some(args.preset)),
    };
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let truth = write_synth(&config, preset, &args.out)?;
    eprintln!("wrote {} items to {} (truth: {})", config.n, args.out.display(), truth.display());
    Ok(exit::OK)
}

fn run_compare(args: CompareArgs) -> Result<u8, CliError> {
    let mut reports = Vec::new();
    for path in &args.reports {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        let value = serde_json::from_str(&text)
            .map_err(|e| CliError::Record { path: path.clone(), line: e.line(), message: e.to_string() })?;
        reports.push((path.display().to_string(), value));
    }
    let comparison = compare::compare_reports(&reports);
    let text = match args.format {
        CompareFormat::Json => serde_json::to_string_pretty(&comparison).expect("comparison serializes") + "\n",
        CompareFormat::Tsv => comparison.to_tsv(),
    };
    emit(args.out.as_ref(), &text)?;
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => run_report(args, Mode::Analyze),
        Command::Distfit(args) => run_report(args, Mode::Distfit),
        Command::Dualreg(args) => run_report(args, Mode::Dualreg),
        Command::Emotions(args) => run_emotions(args),
        Command::Synth(args) => run_synth(args),
        Command::Compare(args) => run_compare(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("evalpulse: error: {e}");
            ExitCode::from(exit::INPUT)
        }
    }
}
