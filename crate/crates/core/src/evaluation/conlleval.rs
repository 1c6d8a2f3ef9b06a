//! Chunk scoring with the semantics of the CoNLL-2000 `conlleval` script.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Micro-averaged phrase counts and percentages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhraseScores {
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PhraseScores {
    pub fn from_counts(gold: usize, predicted: usize, correct: usize) -> Self {
        let pct = |a: usize, b: usize| if b > 0 { 100.0 * a as f64 / b as f64 } else { 0.0 };
        let (precision, recall) = (pct(correct, predicted), pct(correct, gold));
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        PhraseScores {
            gold,
            predicted,
            correct,
            precision,
            recall,
            f1,
        }
    }
}

/// Rounds to two decimals, as printed by the reference script.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn split_tag(label: &str) -> (&str, &str) {
    label.split_once('-').unwrap_or((label, ""))
}

fn end_of_chunk(prev: &str, tag: &str, prev_type: &str, ty: &str) -> bool {
    matches!(prev, "E" | "S" | "[" | "]")
        || (matches!(prev, "B" | "I") && matches!(tag, "B" | "S" | "O"))
        || (prev != "O" && prev != "." && prev_type != ty)
}

fn start_of_chunk(prev: &str, tag: &str, prev_type: &str, ty: &str) -> bool {
    matches!(tag, "B" | "S" | "[" | "]")
        || (matches!(prev, "E" | "S" | "O") && matches!(tag, "E" | "I"))
        || (tag != "O" && tag != "." && prev_type != ty)
}

/// Phrase precision, recall and F1 over a corpus of label sequences.
///
/// Sentences are separated as if by a boundary line, so no phrase spans two
/// sentences.
pub fn conlleval_f1<S: AsRef<str>>(gold: &[Vec<S>], predicted: &[Vec<S>]) -> Result<PhraseScores, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let (mut found_gold, mut found_pred, mut correct) = (0, 0, 0);
    let mut in_correct = false;
    let (mut last_c, mut last_ct, mut last_g, mut last_gt) = ("O", "", "O", "");
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::LengthMismatch {
                sentence: i,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        let tokens = g
            .iter()
            .map(|s| s.as_ref())
            .zip(p.iter().map(|s| s.as_ref()))
            .chain(std::iter::once(("O", "O")));
        for (c, gs) in tokens {
            let (c, ct) = split_tag(c);
            let (gs, gt) = split_tag(gs);
            let end_c = end_of_chunk(last_c, c, last_ct, ct);
            let end_g = end_of_chunk(last_g, gs, last_gt, gt);
            let start_c = start_of_chunk(last_c, c, last_ct, ct);
            let start_g = start_of_chunk(last_g, gs, last_gt, gt);
            if in_correct {
                if end_c && end_g && last_gt == last_ct {
                    in_correct = false;
                    correct += 1;
                } else if end_c != end_g || gt != ct {
                    in_correct = false;
                }
            }
            if start_c && start_g && gt == ct {
                in_correct = true;
            }
            found_gold += start_c as usize;
            found_pred += start_g as usize;
            (last_c, last_ct, last_g, last_gt) = (c, ct, gs, gt);
        }
    }
    if in_correct {
        correct += 1;
    }
    Ok(PhraseScores::from_counts(found_gold, found_pred, correct))
}
