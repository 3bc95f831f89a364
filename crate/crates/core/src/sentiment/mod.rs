//! Lexicon-based emotion scoring of item titles.
//!
//! Two scorers run side by side: affective norms (valence, arousal,
//! dominance) averaged over matched words, and a rule-based classifier that
//! reports the strongest positive and negative strengths of a text on the
//! `[+1, +5]` / `[-5, -1]` scales.

mod lexicon;
mod stopwords;
mod tokenize;

use serde::{Deserialize, Serialize};

use crate::numeric::Accumulator;
use crate::{Error, Result};

pub use lexicon::{PnLexicon, VadEntry, VadLexicon};
pub use stopwords::ENGLISH_STOPWORDS;
pub use tokenize::{tokenize, Token, TokenKind};

pub const DEFAULT_ENGLISH_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EmotionScores {
    pub v: Option<f64>,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub p: Option<f64>,
    pub n: Option<f64>,
    pub raw_p: Option<i8>,
    pub raw_n: Option<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Vad {
    pub v: Option<f64>,
    pub a: Option<f64>,
    pub d: Option<f64>,
}

/// Mean raw norms over matched words, rescaled to `[0, 1]`.
pub fn score_vad(text: &str, lex: &VadLexicon) -> Vad {
    let mut sums = [Accumulator::new(), Accumulator::new(), Accumulator::new()];
    let mut hits = 0usize;
    for token in tokenize(text).iter().filter(|t| t.is_word()) {
        if let Some(entry) = token.lookup_forms().find_map(|form| lex.get(form)) {
            hits += 1;
            sums[0].add(entry.valence);
            sums[1].add(entry.arousal);
            sums[2].add(entry.dominance);
        }
    }
    if hits == 0 {
        return Vad::default();
    }
    let scaled = |acc: &Accumulator| Some(lex.rescale(acc.value() / hits as f64));
    Vad { v: scaled(&sums[0]), a: scaled(&sums[1]), d: scaled(&sums[2]) }
}

/// Strongest positive and negative strengths of `text` after the modifier rules.
///
/// Rules apply per sentiment word, in order: a negator right before it sets
/// the magnitude to 1; a booster right before it adds its increment; an
/// elongated spelling adds 1. A trailing run of `!` then adds 1 to the
/// strongest word of each polarity. Magnitudes are clamped to 5.
pub fn score_pn(text: &str, lex: &PnLexicon) -> (i8, i8) {
    let tokens = tokenize(text);
    let mut strengths: alloc::vec::Vec<i8> = alloc::vec::Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !token.is_word() {
            continue;
        }
        let Some(base) = token.lookup_forms().find_map(|form| lex.strength(form)) else {
            continue;
        };
        let sign = base.signum();
        let mut magnitude = base.unsigned_abs();
        let previous = i.checked_sub(1).map(|j| &tokens[j]).filter(|t| t.is_word());
        if let Some(prev) = previous {
            if lex.is_negator(prev.text.as_str()) || lex.is_negator(prev.base()) {
                magnitude = 1;
            } else if let Some(inc) = lex.booster(prev.text.as_str()).or_else(|| lex.booster(prev.base())) {
                magnitude = magnitude.saturating_add(inc).min(5);
            }
        }
        if token.elongated {
            magnitude = (magnitude + 1).min(5);
        }
        strengths.push(sign * magnitude as i8);
    }

    let mut raw_p = strengths.iter().copied().filter(|&s| s > 0).max();
    let mut raw_n = strengths.iter().copied().filter(|&s| s < 0).min();
    if tokens.last().is_some_and(Token::is_exclamation) {
        raw_p = raw_p.map(|s| (s + 1).min(5));
        raw_n = raw_n.map(|s| (s - 1).max(-5));
    }
    (raw_p.unwrap_or(1), raw_n.unwrap_or(-1))
}

/// Maps `raw_p ∈ [1, 5]` and `raw_n ∈ [-5, -1]` onto `[0, 1]`.
pub fn normalize_emotions(raw_p: i8, raw_n: i8) -> Result<(f64, f64)> {
    if !(1..=5).contains(&raw_p) || !(-5..=-1).contains(&raw_n) {
        return Err(Error::InvalidArgument(alloc::format!("raw scores out of range: ({raw_p}, {raw_n})")));
    }
    Ok((f64::from(raw_p - 1) / 4.0, f64::from(raw_n.unsigned_abs() - 1) / 4.0))
}

/// Both scorers on one text; `p`/`n` are absent for texts without tokens.
pub fn score_emotions(text: &str, vad: &VadLexicon, pn: &PnLexicon) -> EmotionScores {
    let Vad { v, a, d } = score_vad(text, vad);
    let mut scores = EmotionScores { v, a, d, ..EmotionScores::default() };
    if !tokenize(text).is_empty() {
        let (raw_p, raw_n) = score_pn(text, pn);
        let (p, n) = normalize_emotions(raw_p, raw_n).expect("score_pn output is in range");
        scores.raw_p = Some(raw_p);
        scores.raw_n = Some(raw_n);
        scores.p = Some(p);
        scores.n = Some(n);
    }
    scores
}

/// Stopword-ratio language heuristic; texts with fewer than 3 words pass.
pub fn detect_english<S: AsRef<str>>(text: &str, stopwords: &[S], threshold: f64) -> bool {
    let words: alloc::vec::Vec<Token> = tokenize(text).into_iter().filter(Token::is_word).collect();
    if words.len() < 3 {
        return true;
    }
    let hits = words.iter().filter(|w| stopwords.iter().any(|s| s.as_ref() == w.text)).count();
    hits as f64 / words.len() as f64 >= threshold
}
