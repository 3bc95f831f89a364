//! Seeded synthetic data with planted structure: heavy-tailed counts,
//! dual-regime like/dislike relations and emotion effects.
//!
//! Every generator draws from a ChaCha8 stream derived from `(seed, stream
//! name)`, so outputs are bit-identical across runs and platforms and
//! independent generators never share random numbers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log, round};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{EvaluationDataset, Item, Timestamp};
use crate::inference::Design;
use crate::{Error, Result};

/// FNV-1a, used to turn a stream name into a ChaCha stream id.
fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Deterministic random stream for `(seed, name)`.
pub fn stream_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

fn normal(mean: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mean, sd).map_err(|e| Error::InvalidArgument(format!("normal({mean}, {sd}): {e}")))
}

/// Rounds to the nearest integer and clamps to at least one.
pub fn to_count(value: f64) -> u64 {
    round(value).clamp(1.0, 1e15) as u64
}

/// `n` counts `round(exp(Normal(mu, sigma)))`, at least 1.
pub fn gen_lognormal_counts(n: usize, mu: f64, sigma: f64, seed: u64) -> Result<Vec<u64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let dist = normal(mu, sigma)?;
    let mut rng = stream_rng(seed, "gen_lognormal_counts");
    Ok((0..n).map(|_| to_count(exp(dist.sample(&mut rng)))).collect())
}

/// Continuous log-normal draws (no rounding).
pub fn gen_lognormal(n: usize, mu: f64, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let dist = normal(mu, sigma)?;
    let mut rng = stream_rng(seed, "gen_lognormal");
    Ok((0..n).map(|_| exp(dist.sample(&mut rng))).collect())
}

/// Gibrat growth: each item starts at `initial` and is multiplied by
/// `exp(Normal(0, shock_sd))` once per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gibrat {
    pub steps: u32,
    pub shock_sd: f64,
    pub initial: f64,
}

impl Gibrat {
    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("gibrat steps must be at least 1".into()));
        }
        if !(self.shock_sd >= 0.0) || !(self.initial > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gibrat needs shock_sd >= 0 and initial > 0, got {} and {}",
                self.shock_sd, self.initial
            )));
        }
        Ok(())
    }

    /// Natural log of each item's final size, before rounding.
    pub fn log_sizes(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = stream_rng(seed, "gibrat_growth");
        let start = log(self.initial);
        if self.shock_sd == 0.0 {
            return Ok(alloc::vec![start; n]);
        }
        let shock = normal(0.0, self.shock_sd)?;
        Ok((0..n)
            .map(|_| {
                let mut size = start;
                for _ in 0..self.steps {
                    size += shock.sample(&mut rng);
                }
                size
            })
            .collect())
    }

    pub fn counts(&self, n: usize, seed: u64) -> Result<Vec<u64>> {
        Ok(self.log_sizes(n, seed)?.into_iter().map(|s| to_count(exp(s))).collect())
    }
}

/// Multiplicative growth from size 1, rounded to counts ≥ 1.
pub fn gibrat_growth(n: usize, steps: u32, shock_sd: f64, seed: u64) -> Result<Vec<u64>> {
    Gibrat { steps, shock_sd, initial: 1.0 }.counts(n, seed)
}

/// Planted single-knot relation `ln D = intercept + lambda·(min(ln L, knot) - knot)
/// + gamma·max(0, ln L - knot) + noise`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotModel {
    pub knot: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub intercept: f64,
    pub noise_sd: f64,
}

impl KnotModel {
    pub fn mean_log_dislikes(&self, log_likes: f64) -> f64 {
        let below = log_likes.min(self.knot) - self.knot;
        let above = (log_likes - self.knot).max(0.0);
        self.intercept + self.lambda * below + self.gamma * above
    }
}

/// Output of [`gen_dual_regime`]: the rounded dataset plus the exact log
/// dislikes before rounding (noise included).
#[derive(Debug, Clone)]
pub struct DualRegimeSample {
    pub dataset: EvaluationDataset,
    pub exact_log_dislikes: Vec<f64>,
}

/// Reference clock for generated datasets: items are created on
/// 2016-01-01 and evaluated as of 2020-01-01, so every item passes a one-year
/// age filter.
pub const SYNTH_CREATED_AT: Timestamp = Timestamp(1_451_606_400);
pub const SYNTH_AS_OF: Timestamp = Timestamp(1_577_836_800);

/// Word pool for generated item texts.
pub const SYNTH_VOCABULARY: &[&str] = &[
    "the", "a", "is", "and", "of", "this", "my", "very", "not", "really", "good", "bad", "great", "awful",
    "love", "hate", "happy", "sad", "calm", "angry", "funny", "boring", "new", "video", "music", "cat",
    "dog", "war", "peace", "win", "lose", "party", "storm", "dream", "crash", "gift", "fear", "joy",
];

fn synth_text<R: Rng>(rng: &mut R) -> String {
    let words = rng.random_range(3..=8);
    let mut text = String::from("the");
    for _ in 1..words {
        text.push(' ');
        text.push_str(SYNTH_VOCABULARY[rng.random_range(0..SYNTH_VOCABULARY.len())]);
    }
    if rng.random_bool(0.2) {
        text.push_str("!!");
    }
    text
}

/// Dual-regime dataset: `ln L ~ Normal(like_mu, like_sigma)` is rounded to a
/// count first, then `ln D` follows `model` at the rounded `ln L`.
pub fn gen_dual_regime(n: usize, model: &KnotModel, like_mu: f64, like_sigma: f64, seed: u64) -> Result<DualRegimeSample> {
    if !(model.lambda.is_finite() && model.gamma.is_finite() && model.knot.is_finite()) {
        return Err(Error::InvalidArgument("knot model parameters must be finite".into()));
    }
    if !(model.noise_sd >= 0.0) || !(like_sigma >= 0.0) {
        return Err(Error::InvalidArgument("standard deviations must be non-negative".into()));
    }
    let likes_dist = normal(like_mu, like_sigma)?;
    let noise = normal(0.0, model.noise_sd)?;
    let mut rng = stream_rng(seed, "gen_dual_regime");
    let mut text_rng = stream_rng(seed, "gen_dual_regime/text");

    let mut items = Vec::with_capacity(n);
    let mut exact = Vec::with_capacity(n);
    for i in 0..n {
        let likes = to_count(exp(likes_dist.sample(&mut rng)));
        let mut log_dislikes = model.mean_log_dislikes(log(likes as f64));
        if model.noise_sd > 0.0 {
            log_dislikes += noise.sample(&mut rng);
        }
        let dislikes = to_count(exp(log_dislikes));
        exact.push(log_dislikes);
        items.push(
            Item::new(format!("item-{i:06}"), synth_text(&mut text_rng), likes, dislikes).created(SYNTH_CREATED_AT),
        );
    }
    let dataset = EvaluationDataset::new(items, "synthetic dual regime", SYNTH_AS_OF)?;
    Ok(DualRegimeSample { dataset, exact_log_dislikes: exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Logistic,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Binary(Vec<bool>),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectSample {
    pub design: Design,
    pub outcome: Outcome,
}

/// Predictors `x1, x2, …` drawn uniform on [0, 1]; `coefs[0]` is the
/// intercept. Logistic outcomes are Bernoulli(inverse-logit(Xβ)); linear
/// outcomes add Normal(0, noise_sd).
pub fn gen_emotion_effect(n: usize, kind: EffectKind, coefs: &[f64], noise_sd: f64, seed: u64) -> Result<EffectSample> {
    if coefs.is_empty() {
        return Err(Error::InvalidArgument("coefficients must include an intercept".into()));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise_sd must be non-negative, got {noise_sd}")));
    }
    let p = coefs.len() - 1;
    let mut rng = stream_rng(seed, "gen_emotion_effect");
    let noise = normal(0.0, noise_sd)?;
    let mut columns = alloc::vec![Vec::with_capacity(n); p];
    let mut binary = Vec::new();
    let mut continuous = Vec::new();
    for _ in 0..n {
        let mut eta = coefs[0];
        for (j, column) in columns.iter_mut().enumerate() {
            let v: f64 = rng.random();
            column.push(v);
            eta += coefs[j + 1] * v;
        }
        match kind {
            EffectKind::Logistic => {
                let prob = 1.0 / (1.0 + exp(-eta));
                binary.push(rng.random::<f64>() < prob);
            }
            EffectKind::Linear => {
                let e = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                continuous.push(eta + e);
            }
        }
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    let design = Design::new(names, columns)?;
    let outcome = match kind {
        EffectKind::Logistic => Outcome::Binary(binary),
        EffectKind::Linear => Outcome::Continuous(continuous),
    };
    Ok(EffectSample { design, outcome })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CountModel {
    Lognormal { mu: f64, sigma: f64 },
    Gibrat(Gibrat),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionModel {
    pub kind: EffectKind,
    pub coefs: Vec<f64>,
    #[serde(default)]
    pub noise_sd: f64,
}

/// Full description of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n: usize,
    pub likes: CountModel,
    pub dislikes: CountModel,
    pub knot_model: Option<KnotModel>,
    pub emotion_model: Option<EmotionModel>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: EvaluationDataset,
    pub effects: Option<EffectSample>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        for model in [&self.likes, &self.dislikes] {
            match model {
                CountModel::Lognormal { sigma, .. } if !(*sigma > 0.0) => {
                    return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")))
                }
                CountModel::Gibrat(g) => g.validate()?,
                _ => {}
            }
        }
        if let Some(k) = &self.knot_model {
            if !(k.noise_sd >= 0.0) {
                return Err(Error::InvalidArgument("knot noise_sd must be non-negative".into()));
            }
            if !matches!(self.likes, CountModel::Lognormal { .. }) {
                return Err(Error::InvalidArgument("a knot model needs log-normal likes".into()));
            }
        }
        if let Some(e) = &self.emotion_model {
            if !(e.noise_sd >= 0.0) || e.coefs.is_empty() {
                return Err(Error::InvalidArgument("emotion model needs an intercept and noise_sd >= 0".into()));
            }
        }
        Ok(())
    }

    fn counts(&self, model: &CountModel, stream: &str) -> Result<Vec<u64>> {
        let seed = self.seed ^ stream_id(stream);
        match *model {
            CountModel::Lognormal { mu, sigma } => gen_lognormal_counts(self.n, mu, sigma, seed),
            CountModel::Gibrat(g) => g.counts(self.n, seed),
        }
    }

    pub fn generate(&self) -> Result<SynthOutput> {
        self.validate()?;
        let dataset = match (&self.knot_model, self.likes) {
            (Some(knot), CountModel::Lognormal { mu, sigma }) => {
                gen_dual_regime(self.n, knot, mu, sigma, self.seed)?.dataset
            }
            _ => {
                let likes = self.counts(&self.likes, "likes")?;
                let dislikes = self.counts(&self.dislikes, "dislikes")?;
                let mut text_rng = stream_rng(self.seed, "synth/text");
                let items = likes
                    .into_iter()
                    .zip(dislikes)
                    .enumerate()
                    .map(|(i, (l, d))| {
                        Item::new(format!("item-{i:06}"), synth_text(&mut text_rng), l, d).created(SYNTH_CREATED_AT)
                    })
                    .collect();
                EvaluationDataset::new(items, "synthetic counts", SYNTH_AS_OF)?
            }
        };
        let effects = match &self.emotion_model {
            Some(e) => Some(gen_emotion_effect(self.n, e.kind, &e.coefs, e.noise_sd, self.seed)?),
            None => None,
        };
        Ok(SynthOutput { dataset, effects })
    }
}
