use evalpulse_core::sentiment::{
    detect_english, normalize_emotions, score_emotions, score_pn, score_vad, PnLexicon, VadEntry, VadLexicon,
    ENGLISH_STOPWORDS,
};
use proptest::prelude::*;

const WORDS: &[&str] = &["good", "bad", "love", "hate", "calm", "storm", "joy", "fear"];
const FILLER: &[&str] = &["the", "cat", "not", "very", "really", "!!", "goooood", "baaaad", ","];

fn lexicon(strengths: &[i8]) -> PnLexicon {
    PnLexicon::new(
        WORDS.iter().zip(strengths).map(|(w, &s)| (w.to_string(), s)).collect(),
        vec!["not".into()],
        vec![("very".into(), 1), ("really".into(), 2)],
    )
    .unwrap()
}

fn strength() -> impl Strategy<Value = i8> {
    prop_oneof![2i8..=5, -5i8..=-2]
}

fn text() -> impl Strategy<Value = String> {
    let token = prop_oneof![prop::sample::select(WORDS), prop::sample::select(FILLER)];
    prop::collection::vec(token, 0..12).prop_map(|t| t.join(" "))
}

fn vad_lexicon() -> VadLexicon {
    let entries = [("happy", 8.2, 6.0, 7.0), ("sad", 2.1, 3.5, 3.0), ("storm", 3.0, 7.5, 4.0), ("calm", 6.9, 1.7, 6.5)];
    VadLexicon::new(
        1.0,
        9.0,
        entries
            .iter()
            .map(|&(t, v, a, d)| (t.to_string(), VadEntry { valence: v, arousal: a, dominance: d }))
            .collect(),
    )
    .unwrap()
}

#[test]
fn golden_rule_examples() {
    let lex = PnLexicon::new(
        vec![("good".into(), 3), ("bad".into(), -3)],
        vec!["not".into()],
        vec![("very".into(), 1)],
    )
    .unwrap();
    assert_eq!(score_pn("good", &lex), (3, -1));
    assert_eq!(score_pn("not good", &lex), (1, -1));
    assert_eq!(score_pn("very bad!!", &lex), (1, -5));
    assert_eq!(normalize_emotions(3, -1).unwrap(), (0.5, 0.0));
    assert_eq!(normalize_emotions(1, -5).unwrap(), (0.0, 1.0));
    assert_eq!(normalize_emotions(1, -1).unwrap(), (0.0, 0.0));
}

#[test]
fn german_text_fails_the_stopword_ratio() {
    // no token of this sentence is an English stopword
    assert!(!detect_english("der hund ist hier", ENGLISH_STOPWORDS, 0.10));
    assert!(detect_english("the cat is on the mat", ENGLISH_STOPWORDS, 0.10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn raising_a_strength_never_lowers_the_score(
        strengths in prop::collection::vec(strength(), WORDS.len()),
        which in 0..WORDS.len(),
        t in text(),
    ) {
        let lex = lexicon(&strengths);
        let (p0, n0) = score_pn(&t, &lex);
        let s = strengths[which];
        let raised = lex.with_strength(WORDS[which], if s > 0 { s + 1 } else { s - 1 });
        let (p1, n1) = score_pn(&t, &raised);
        prop_assert!(p1 >= p0 && n1 <= n0, "{t:?}: ({p0}, {n0}) -> ({p1}, {n1})");
    }

    #[test]
    fn negating_an_unmatched_word_changes_nothing(strengths in prop::collection::vec(strength(), WORDS.len()), t in text()) {
        let lex = lexicon(&strengths);
        let plain = format!("{t} cat");
        let negated = format!("{t} not cat");
        prop_assert_eq!(score_pn(&plain, &lex), score_pn(&negated, &lex));
    }

    #[test]
    fn scores_are_bounded_and_deterministic(strengths in prop::collection::vec(strength(), WORDS.len()), t in text()) {
        let lex = lexicon(&strengths);
        let vad = vad_lexicon();
        let s = score_emotions(&t, &vad, &lex);
        for v in [s.v, s.a, s.d, s.p, s.n].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(s, score_emotions(&t, &vad, &lex));
        if let (Some(rp), Some(rn)) = (s.raw_p, s.raw_n) {
            prop_assert!((1..=5).contains(&rp) && (-5..=-1).contains(&rn));
        }
    }

    #[test]
    fn vad_ignores_word_order(words in prop::collection::vec(prop::sample::select(&["happy", "sad", "storm", "calm", "cat"][..]), 1..10)) {
        let vad = vad_lexicon();
        let forward = words.join(" ");
        let mut rev = words.clone();
        rev.reverse();
        let a = score_vad(&forward, &vad);
        let b = score_vad(&rev.join(" "), &vad);
        for (x, y) in [(a.v, b.v), (a.a, b.a), (a.d, b.d)] {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "presence differs"),
            }
        }
    }
}
