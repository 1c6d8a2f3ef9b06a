use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{tokenize, Sentence};

/// Descriptive corpus statistics.
///
/// A "word" is a token containing at least one alphanumeric character, so
/// detached punctuation is not counted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentences: usize,
    /// Aspect mentions.
    pub aspects: usize,
    /// Distinct aspect terms, compared case-insensitively.
    pub distinct_aspect_terms: usize,
    pub sentences_with_aspects: usize,
    pub mean_words_per_sentence: f64,
    pub mean_words_per_aspect: f64,
    /// Mentions over all sentences.
    pub aspects_per_sentence: f64,
    /// Mentions over sentences with at least one aspect.
    pub aspects_per_sentence_with_aspects: f64,
    pub pct_sentences_with_aspects: f64,
}

fn is_word(s: &str) -> bool {
    s.chars().any(char::is_alphanumeric)
}

fn ratio(a: f64, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a / b as f64
    }
}

pub fn corpus_stats(sentences: &[Sentence]) -> CorpusStats {
    let mut words = 0usize;
    let mut aspect_words = 0usize;
    let mut aspects = 0usize;
    let mut with = 0usize;
    let mut distinct = HashSet::new();
    for s in sentences {
        words += s.tokens.iter().filter(|t| is_word(&t.surface)).count();
        aspects += s.spans.len();
        if !s.spans.is_empty() {
            with += 1;
        }
        for a in &s.spans {
            aspect_words += tokenize(&a.term).iter().filter(|t| is_word(&t.surface)).count();
            distinct.insert(a.term.to_lowercase());
        }
    }
    CorpusStats {
        sentences: sentences.len(),
        aspects,
        distinct_aspect_terms: distinct.len(),
        sentences_with_aspects: with,
        mean_words_per_sentence: ratio(words as f64, sentences.len()),
        mean_words_per_aspect: ratio(aspect_words as f64, aspects),
        aspects_per_sentence: ratio(aspects as f64, sentences.len()),
        aspects_per_sentence_with_aspects: ratio(aspects as f64, with),
        pct_sentences_with_aspects: ratio(100.0 * with as f64, sentences.len()),
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<36}{:>10}", "# Sentences", self.sentences)?;
        writeln!(f, "{:<36}{:>10}", "# Aspects (mentions)", self.aspects)?;
        writeln!(f, "{:<36}{:>10}", "# Aspects (distinct terms)", self.distinct_aspect_terms)?;
        writeln!(f, "{:<36}{:>10.2}", "Mean words/sentence", self.mean_words_per_sentence)?;
        writeln!(f, "{:<36}{:>10.2}", "Mean words/aspect", self.mean_words_per_aspect)?;
        writeln!(f, "{:<36}{:>10.2}", "Mean aspects/sentence (all)", self.aspects_per_sentence)?;
        writeln!(
            f,
            "{:<36}{:>10.2}",
            "Mean aspects/sentence (with aspects)", self.aspects_per_sentence_with_aspects
        )?;
        write!(f, "{:<36}{:>9.2}%", "Sentences with aspects", self.pct_sentences_with_aspects)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AspectSpan, Polarity};

    #[test]
    fn empty_dataset_is_all_zero() {
        assert_eq!(corpus_stats(&[]), CorpusStats::default());
    }

    #[test]
    fn both_aspect_denominators() {
        let mut a = Sentence::new("1", "screen and battery life are fine.");
        for (s, e, t) in [(0, 6, "screen"), (11, 23, "battery life")] {
            a.spans.push(AspectSpan {
                start: s,
                end: e,
                term: t.into(),
                polarity: Polarity::Positive,
            });
        }
        let b = Sentence::new("2", "nothing here");
        let st = corpus_stats(&[a, b]);
        assert_eq!(st.aspects, 2);
        assert_eq!(st.aspects_per_sentence, 1.0);
        assert_eq!(st.aspects_per_sentence_with_aspects, 2.0);
        assert_eq!(st.pct_sentences_with_aspects, 50.0);
        assert_eq!(st.mean_words_per_sentence, 4.0);
        assert_eq!(st.mean_words_per_aspect, 1.5);
    }
}
