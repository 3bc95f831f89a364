//! Evaluated items, datasets and the three-stage filter (language, age,
//! minimum votes).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sentiment::EmotionScores;
use crate::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    /// Whole days elapsed from `self` to `later` (negative when `later` is earlier).
    pub fn days_until(self, later: Timestamp) -> i64 {
        (later.0 - self.0).div_euclid(SECONDS_PER_DAY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub text: String,
    pub likes: u64,
    pub dislikes: u64,
    pub created_at: Option<Timestamp>,
    pub emotions: Option<EmotionScores>,
    pub regime: Option<RegimeLabel>,
}

impl Item {
    pub fn new(id: impl Into<String>, text: impl Into<String>, likes: u64, dislikes: u64) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            likes,
            dislikes,
            created_at: None,
            emotions: None,
            regime: None,
        }
    }

    pub fn created(mut self, at: Timestamp) -> Self {
        self.created_at = Some(at);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterState {
    Raw,
    LanguageAndAgeFiltered,
    VoteFiltered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationDataset {
    items: Vec<Item>,
    pub source_label: String,
    pub as_of: Timestamp,
    filter_state: FilterState,
}

impl EvaluationDataset {
    /// Builds a raw dataset, rejecting duplicate item ids.
    pub fn new(items: Vec<Item>, source_label: impl Into<String>, as_of: Timestamp) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id.as_str()) {
                return Err(Error::DuplicateId(item.id.clone()));
            }
        }
        Ok(Self {
            items,
            source_label: source_label.into(),
            as_of,
            filter_state: FilterState::Raw,
        })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Mutable access for attaching scores and labels. Ids and counts must not
    /// be edited through this; only `emotions` and `regime` are meant to change.
    pub fn items_mut(&mut self) -> &mut [Item] {
        &mut self.items
    }

    pub fn into_items(self) -> Vec<Item> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn filter_state(&self) -> FilterState {
        self.filter_state
    }

    /// Advances the filter state. States only move forward.
    fn advance(mut self, state: FilterState) -> Self {
        self.filter_state = self.filter_state.max(state);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_age_days: u32,
    pub min_likes: u64,
    pub min_dislikes: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_age_days: 365, min_likes: 1, min_dislikes: 1 }
    }
}

/// Item counts after each filter stage plus vote totals of the survivors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub n_crawled: usize,
    pub n_year: usize,
    pub n_ld: usize,
    pub total_likes: u64,
    pub total_dislikes: u64,
    pub warning: Option<String>,
}

impl FilterReport {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_crawled, self.n_year, self.n_ld)
    }
}

/// Runs the language + age stage and then the minimum-vote stage.
///
/// Items without `created_at` fail the age check. Surviving items are not
/// modified and keep their input order.
pub fn filter_items<F>(
    ds: EvaluationDataset,
    config: &FilterConfig,
    language_check: F,
) -> (EvaluationDataset, FilterReport)
where
    F: Fn(&str) -> bool,
{
    let as_of = ds.as_of;
    let n_crawled = ds.items.len();
    let old_enough = |item: &Item| {
        item.created_at
            .map(|at| at.days_until(as_of) >= i64::from(config.min_age_days))
            .unwrap_or(false)
    };

    let mut n_year = 0;
    let mut survivors = Vec::new();
    let mut ds = ds;
    for item in core::mem::take(&mut ds.items) {
        if !(language_check(&item.text) && old_enough(&item)) {
            continue;
        }
        n_year += 1;
        if item.likes >= config.min_likes && item.dislikes >= config.min_dislikes {
            survivors.push(item);
        }
    }

    let n_ld = survivors.len();
    let warning = (n_crawled > 0 && (n_crawled - n_ld) * 100 > n_crawled * 99).then(|| {
        format!("filters removed {} of {} items (more than 99%)", n_crawled - n_ld, n_crawled)
    });
    let report = FilterReport {
        n_crawled,
        n_year,
        n_ld,
        total_likes: survivors.iter().map(|i| i.likes).sum(),
        total_dislikes: survivors.iter().map(|i| i.dislikes).sum(),
        warning,
    };
    ds.items = survivors;
    (ds.advance(FilterState::VoteFiltered), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const DAY: i64 = SECONDS_PER_DAY;
    const AS_OF: Timestamp = Timestamp(1_600_000_000);

    fn old() -> Timestamp {
        Timestamp(AS_OF.0 - 400 * DAY)
    }

    fn english(text: &str) -> bool {
        !text.starts_with("der ")
    }

    fn fixture() -> EvaluationDataset {
        EvaluationDataset::new(
            vec![
                Item::new("a", "der hund ist hier", 10, 3).created(old()),
                Item::new("b", "the new one", 10, 3).created(Timestamp(AS_OF.0 - 10 * DAY)),
                Item::new("c", "no dislikes at all", 10, 0).created(old()),
                Item::new("d", "passes every filter", 10, 3).created(old()),
            ],
            "fixture",
            AS_OF,
        )
        .unwrap()
    }

    #[test]
    fn four_item_fixture_reports_4_2_1() {
        let (out, report) = filter_items(fixture(), &FilterConfig::default(), english);
        assert_eq!(report.counts(), (4, 2, 1));
        assert_eq!(out.len(), 1);
        assert_eq!(out.items()[0].id, "d");
        assert_eq!(out.filter_state(), FilterState::VoteFiltered);
        assert_eq!((report.total_likes, report.total_dislikes), (10, 3));
        assert!(report.warning.is_none());
    }

    #[test]
    fn empty_dataset() {
        let ds = EvaluationDataset::new(vec![], "empty", AS_OF).unwrap();
        let (out, report) = filter_items(ds, &FilterConfig::default(), |_| true);
        assert_eq!(report.counts(), (0, 0, 0));
        assert!(out.is_empty());
    }

    #[test]
    fn missing_timestamp_fails_age_check() {
        let ds = EvaluationDataset::new(vec![Item::new("x", "t", 5, 5)], "l", AS_OF).unwrap();
        let (_, report) = filter_items(ds, &FilterConfig::default(), |_| true);
        assert_eq!(report.counts(), (1, 0, 0));
    }

    #[test]
    fn age_boundary_is_inclusive() {
        let ds = EvaluationDataset::new(
            vec![
                Item::new("exact", "t", 1, 1).created(Timestamp(AS_OF.0 - 365 * DAY)),
                Item::new("short", "t", 1, 1).created(Timestamp(AS_OF.0 - 365 * DAY + 1)),
            ],
            "l",
            AS_OF,
        )
        .unwrap();
        let (out, _) = filter_items(ds, &FilterConfig::default(), |_| true);
        assert_eq!(out.items().len(), 1);
        assert_eq!(out.items()[0].id, "exact");
    }

    #[test]
    fn warns_when_nearly_everything_is_removed() {
        let items = (0..200)
            .map(|i| Item::new(format!("i{i}"), "t", 1, u64::from(i == 0)).created(old()))
            .collect();
        let ds = EvaluationDataset::new(items, "l", AS_OF).unwrap();
        let (_, report) = filter_items(ds, &FilterConfig::default(), |_| true);
        assert_eq!(report.n_ld, 1);
        assert!(report.warning.is_some());
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = EvaluationDataset::new(vec![Item::new("a", "", 1, 1), Item::new("a", "", 2, 2)], "l", AS_OF)
            .unwrap_err();
        assert_eq!(err, Error::DuplicateId("a".into()));
    }

    #[test]
    fn filtering_is_idempotent() {
        let cfg = FilterConfig::default();
        let (once, _) = filter_items(fixture(), &cfg, english);
        let (twice, report) = filter_items(once.clone(), &cfg, english);
        assert_eq!(once.items(), twice.items());
        assert_eq!(report.n_crawled, report.n_ld);
        assert_eq!(twice.filter_state(), FilterState::VoteFiltered);
    }
}
