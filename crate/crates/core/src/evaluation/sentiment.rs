use serde::{Deserialize, Serialize};

use super::PhraseScores;
use crate::corpus::{decode_token_spans, LabelId, Sentiment, TagScheme, TokenSpan};

#[derive(Clone, Debug, PartialEq)]
pub struct Decoupled {
    /// Labels in the AE scheme.
    pub ae: Vec<LabelId>,
    pub spans: Vec<TokenSpan>,
    pub disagreements: usize,
}

/// Splits joint labels into the sentiment-free AE projection and the spans
/// with their sentiment (taken from each span's first token).
pub fn decouple(labels: &[LabelId], scheme: &TagScheme) -> Decoupled {
    let (spans, disagreements) = decode_token_spans(labels, scheme);
    Decoupled {
        ae: labels.iter().map(|&l| scheme.to_ae(l)).collect(),
        spans,
        disagreements,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub sentiment: Sentiment,
    #[serde(flatten)]
    pub scores: PhraseScores,
}

/// Precision, recall and F1 for each sentiment class, in the order of
/// [`Sentiment::ALL`]. A predicted span is a true positive for class `c`
/// when a gold span with identical boundaries exists and both carry `c`.
pub fn sentiment_class_f1(gold: &[Vec<TokenSpan>], predicted: &[Vec<TokenSpan>]) -> Vec<ClassScores> {
    Sentiment::ALL
        .iter()
        .map(|&c| {
            let (mut n_gold, mut n_pred, mut tp) = (0, 0, 0);
            for (g, p) in gold.iter().zip(predicted) {
                n_gold += g.iter().filter(|s| s.sentiment == Some(c)).count();
                for s in p.iter().filter(|s| s.sentiment == Some(c)) {
                    n_pred += 1;
                    if g.iter().any(|t| t.first == s.first && t.last == s.last && t.sentiment == Some(c)) {
                        tp += 1;
                    }
                }
            }
            ClassScores {
                sentiment: c,
                scores: PhraseScores::from_counts(n_gold, n_pred, tp),
            }
        })
        .collect()
}
