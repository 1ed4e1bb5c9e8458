//! Summed-valence lexicon sentiment with a three-way label split.

use alloc::collections::BTreeMap;
use alloc::string::String;

use thiserror::Error;

use crate::ingest::zero_fill;
use crate::textprep::Document;
use crate::Day;

/// Normalization constant in `s / sqrt(s^2 + C)`.
pub const NORMALIZATION: f64 = 15.0;

/// Compound scores at or beyond this magnitude are polar.
pub const THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SentimentError {
    #[error("compound score {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("valence for {term:?} is not finite")]
    NonFiniteValence { term: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valences: BTreeMap<String, f64>,
}

impl Lexicon {
    /// Builds a lexicon; terms are lowercased and later entries win.
    pub fn new<I, S>(entries: I) -> Result<Self, SentimentError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut valences = BTreeMap::new();
        for (term, valence) in entries {
            let term = term.as_ref().trim().to_lowercase();
            if !valence.is_finite() {
                return Err(SentimentError::NonFiniteValence { term });
            }
            valences.insert(term, valence);
        }
        Ok(Self { valences })
    }

    pub fn valence(&self, term: &str) -> Option<f64> {
        self.valences.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Negative,
    Neutral,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentResult {
    pub compound: f64,
    pub label: Label,
}

pub fn normalize_sum(sum: f64) -> f64 {
    if sum == 0.0 {
        0.0
    } else {
        sum / crate::math::sqrt(sum * sum + NORMALIZATION)
    }
}

pub fn compound_score(tokens: &[String], lexicon: &Lexicon) -> f64 {
    let sum: f64 = tokens.iter().filter_map(|t| lexicon.valence(t)).sum();
    normalize_sum(sum)
}

pub fn classify(compound: f64) -> Result<Label, SentimentError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(SentimentError::OutOfRange(compound));
    }
    Ok(if compound >= THRESHOLD {
        Label::Positive
    } else if compound <= -THRESHOLD {
        Label::Negative
    } else {
        Label::Neutral
    })
}

pub fn score(doc: &Document, lexicon: &Lexicon) -> SentimentResult {
    let compound = compound_score(&doc.tokens, lexicon);
    let label = classify(compound).expect("normalized score is bounded");
    SentimentResult { compound, label }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DayCounts {
    pub negative: usize,
    pub neutral: usize,
    pub positive: usize,
}

impl DayCounts {
    pub fn total(&self) -> usize {
        self.negative + self.neutral + self.positive
    }

    fn add(&mut self, label: Label) {
        match label {
            Label::Negative => self.negative += 1,
            Label::Neutral => self.neutral += 1,
            Label::Positive => self.positive += 1,
        }
    }
}

/// Per-day label counts, zero-filled across the observed day range.
pub fn sentiment_timeseries<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
    lexicon: &Lexicon,
) -> BTreeMap<Day, DayCounts> {
    let mut series: BTreeMap<Day, DayCounts> = BTreeMap::new();
    for doc in docs {
        series.entry(doc.day).or_default().add(score(doc, lexicon).label);
    }
    zero_fill(&mut series, DayCounts::default());
    series
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn lex() -> Lexicon {
        Lexicon::new([("good", 1.9), ("bad", -2.0), ("great", 2.0), ("safe", 1.0)]).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|w| w.to_string()).collect()
    }

    fn day(d: u32) -> Day {
        Day::from_ymd_opt(2020, 8, d).unwrap()
    }

    #[test]
    fn compound_examples() {
        assert_eq!(compound_score(&toks("storm coming"), &lex()), 0.0);
        let s = compound_score(&toks("good"), &lex());
        assert!((s - 1.9 / libm::sqrt(1.9 * 1.9 + 15.0)).abs() < 1e-15);
        assert!((s - 0.4404).abs() < 5e-5);
        assert_eq!(compound_score(&toks("great bad"), &lex()), 0.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.0), Ok(Label::Neutral));
        assert_eq!(classify(0.4404), Ok(Label::Positive));
        assert_eq!(classify(-0.05), Ok(Label::Negative));
        assert_eq!(classify(0.05), Ok(Label::Positive));
        assert_eq!(classify(0.0499), Ok(Label::Neutral));
        assert!(classify(1.5).is_err());
        assert!(classify(f64::NAN).is_err());
    }

    #[test]
    fn timeseries_examples() {
        assert!(sentiment_timeseries(&[], &lex()).is_empty());

        let docs = vec![
            Document::new("1", toks("good day"), day(27)),
            Document::new("2", toks("great"), day(27)),
            Document::new("3", toks("bad"), day(27)),
        ];
        let series = sentiment_timeseries(&docs, &lex());
        assert_eq!(
            series[&day(27)],
            DayCounts { negative: 1, neutral: 0, positive: 2 }
        );

        let docs: Vec<_> = (0..5)
            .map(|i| Document::new(i.to_string(), toks("the storm"), day(28)))
            .collect();
        let series = sentiment_timeseries(&docs, &lex());
        assert_eq!(series[&day(28)], DayCounts { negative: 0, neutral: 5, positive: 0 });
    }

    #[test]
    fn timeseries_zero_fills() {
        let docs = vec![
            Document::new("1", toks("good"), day(26)),
            Document::new("2", toks("bad"), day(29)),
        ];
        let series = sentiment_timeseries(&docs, &lex());
        assert_eq!(series.len(), 4);
        assert_eq!(series[&day(27)].total(), 0);
    }

    #[test]
    fn lexicon_rejects_non_finite() {
        assert!(Lexicon::new([("x", f64::INFINITY)]).is_err());
        assert_eq!(Lexicon::new([("Good", 1.0)]).unwrap().valence("good"), Some(1.0));
    }
}
