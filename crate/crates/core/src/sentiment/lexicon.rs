use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadEntry {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

/// Affective norms on a declared raw scale.
#[derive(Debug, Clone, PartialEq)]
pub struct VadLexicon {
    scale_min: f64,
    scale_max: f64,
    entries: BTreeMap<String, VadEntry>,
}

fn parse_err(line: usize, msg: impl core::fmt::Display) -> Error {
    Error::InvalidArgument(format!("line {line}: {msg}"))
}

fn check_term(term: &str) -> Result<()> {
    if term.is_empty() || term.chars().any(char::is_whitespace) || term.to_lowercase() != term {
        return Err(Error::InvalidArgument(format!("term {term:?} must be a single lowercase word")));
    }
    Ok(())
}

impl VadLexicon {
    pub fn new(scale_min: f64, scale_max: f64, entries: Vec<(String, VadEntry)>) -> Result<Self> {
        if !(scale_min.is_finite() && scale_max.is_finite() && scale_min < scale_max) {
            return Err(Error::InvalidArgument(format!("invalid scale [{scale_min}, {scale_max}]")));
        }
        let mut map = BTreeMap::new();
        for (term, e) in entries {
            check_term(&term)?;
            let inside = |x: f64| (scale_min..=scale_max).contains(&x);
            if !(inside(e.valence) && inside(e.arousal) && inside(e.dominance)) {
                return Err(Error::InvalidArgument(format!("scores of {term:?} outside the declared scale")));
            }
            if map.insert(term.clone(), e).is_some() {
                return Err(Error::DuplicateId(term));
            }
        }
        Ok(Self { scale_min, scale_max, entries: map })
    }

    /// Parses `term<TAB>valence<TAB>arousal<TAB>dominance` lines after a
    /// `#scale <min> <max>` header. Blank lines and other `#` lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut scale = None;
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim_end_matches('\r');
            if let Some(rest) = line.strip_prefix("#scale") {
                let bounds: Vec<f64> = rest
                    .split_whitespace()
                    .map(|v| v.parse().map_err(|_| parse_err(line_no, "bad scale bound")))
                    .collect::<Result<_>>()?;
                let [lo, hi] = bounds[..] else {
                    return Err(parse_err(line_no, "#scale needs two bounds"));
                };
                scale = Some((lo, hi));
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [term, v, a, d] = fields[..] else {
                return Err(parse_err(line_no, "expected 4 tab-separated fields"));
            };
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| parse_err(line_no, format!("bad number {s:?}")));
            entries.push((
                term.trim().to_string(),
                VadEntry { valence: num(v)?, arousal: num(a)?, dominance: num(d)? },
            ));
        }
        let (lo, hi) = scale.ok_or_else(|| Error::InvalidArgument("missing #scale header".into()))?;
        Self::new(lo, hi, entries)
    }

    pub fn get(&self, term: &str) -> Option<&VadEntry> {
        self.entries.get(term)
    }

    pub fn rescale(&self, raw: f64) -> f64 {
        ((raw - self.scale_min) / (self.scale_max - self.scale_min)).clamp(0.0, 1.0)
    }

    pub fn scale(&self) -> (f64, f64) {
        (self.scale_min, self.scale_max)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Signed word strengths plus negators and boosters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PnLexicon {
    entries: BTreeMap<String, i8>,
    negators: BTreeSet<String>,
    boosters: BTreeMap<String, u8>,
}

impl PnLexicon {
    pub fn new(entries: Vec<(String, i8)>, negators: Vec<String>, boosters: Vec<(String, u8)>) -> Result<Self> {
        let mut lex = Self::default();
        for (term, s) in entries {
            check_term(&term)?;
            if !(2..=5).contains(&s.unsigned_abs()) {
                return Err(Error::InvalidArgument(format!("strength of {term:?} must be in ±[2, 5], got {s}")));
            }
            if lex.entries.insert(term.clone(), s).is_some() {
                return Err(Error::DuplicateId(term));
            }
        }
        for term in negators {
            check_term(&term)?;
            lex.negators.insert(term);
        }
        for (term, inc) in boosters {
            check_term(&term)?;
            if inc == 0 {
                return Err(Error::InvalidArgument(format!("booster {term:?} needs an increment of at least 1")));
            }
            lex.boosters.insert(term, inc);
        }
        Ok(lex)
    }

    /// `term<TAB>strength` lines.
    pub fn parse_entries(text: &str) -> Result<Vec<(String, i8)>> {
        parse_pairs(text, |s| s.parse::<i8>().ok())
    }

    /// One term per line.
    pub fn parse_negators(text: &str) -> Vec<String> {
        data_lines(text).map(|(_, l)| l.trim().to_string()).collect()
    }

    /// `booster<TAB>increment` lines.
    pub fn parse_boosters(text: &str) -> Result<Vec<(String, u8)>> {
        parse_pairs(text, |s| s.parse::<u8>().ok())
    }

    pub fn strength(&self, term: &str) -> Option<i8> {
        self.entries.get(term).copied()
    }

    pub fn is_negator(&self, term: &str) -> bool {
        self.negators.contains(term)
    }

    pub fn booster(&self, term: &str) -> Option<u8> {
        self.boosters.get(term).copied()
    }

    /// Copy with one term's strength replaced (unvalidated magnitudes are clamped to 5).
    pub fn with_strength(&self, term: &str, strength: i8) -> Self {
        let mut lex = self.clone();
        lex.entries.insert(term.to_string(), strength.clamp(-5, 5));
        lex
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_pairs<T>(text: &str, value: impl Fn(&str) -> Option<T>) -> Result<Vec<(String, T)>> {
    data_lines(text)
        .map(|(line_no, line)| {
            let (term, raw) = line.split_once('\t').ok_or_else(|| parse_err(line_no, "expected term<TAB>value"))?;
            let v = value(raw.trim()).ok_or_else(|| parse_err(line_no, format!("bad value {raw:?}")))?;
            Ok((term.trim().to_string(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vad_tsv() {
        let lex = VadLexicon::parse_tsv("#scale 1 9\n# comment\nhappy\t8.5\t6.0\t7.2\n\nsad\t2\t3\t3\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.scale(), (1.0, 9.0));
        assert_eq!(lex.get("happy").unwrap().valence, 8.5);
        assert!(VadLexicon::parse_tsv("happy\t1\t1\t1\n").is_err());
        assert!(VadLexicon::parse_tsv("#scale 1 9\nhappy\t10\t1\t1\n").is_err());
        assert!(VadLexicon::parse_tsv("#scale 1 9\nhappy\t1\t1\n").is_err());
        assert!(VadLexicon::parse_tsv("#scale 1 9\nhappy\t1\t1\t1\nhappy\t2\t2\t2\n").is_err());
        assert!(VadLexicon::parse_tsv("#scale 1 9\nHappy\t1\t1\t1\n").is_err());
    }

    #[test]
    fn pn_rejects_neutral_strengths() {
        assert!(PnLexicon::new(alloc::vec![("meh".into(), 1)], alloc::vec![], alloc::vec![]).is_err());
        assert!(PnLexicon::new(alloc::vec![("meh".into(), 0)], alloc::vec![], alloc::vec![]).is_err());
        assert!(PnLexicon::new(alloc::vec![("wow".into(), 6)], alloc::vec![], alloc::vec![]).is_err());
        let entries = PnLexicon::parse_entries("good\t3\nbad\t-3\n").unwrap();
        let boosters = PnLexicon::parse_boosters("very\t1\n").unwrap();
        let lex = PnLexicon::new(entries, PnLexicon::parse_negators("not\nnever\n"), boosters).unwrap();
        assert_eq!(lex.strength("bad"), Some(-3));
        assert!(lex.is_negator("never"));
        assert_eq!(lex.booster("very"), Some(1));
        assert!(PnLexicon::parse_entries("good 3\n").is_err());
    }
}
