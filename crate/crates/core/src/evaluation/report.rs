use std::fmt;

use serde::{Deserialize, Serialize};

use super::{conlleval_f1, decouple, sentiment_class_f1, ClassScores, EvalError, PhraseScores};
use crate::corpus::{repair_labels, LabelId, Mode, Sentence, TagScheme};
use crate::models::Model;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub sentences: usize,
    /// Aspect extraction only (sentiment stripped).
    pub single: PhraseScores,
    /// Joint tags; equals `single` in AE mode.
    pub joint: PhraseScores,
    /// Per-sentiment scores (AESC only).
    pub classes: Vec<ClassScores>,
    /// Inside tokens whose sentiment differed from their span's first token.
    pub disagreements: usize,
}

impl EvalReport {
    pub fn single_f1(&self) -> f64 {
        self.single.f1
    }

    pub fn joint_f1(&self) -> f64 {
        self.joint.f1
    }

    /// The score used for model selection: joint F1.
    pub fn f1(&self) -> f64 {
        self.joint.f1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode {} | {} sentences", self.mode, self.sentences)?;
        writeln!(f, "{:>18}  {:>24}", "Tagging F1", "Classification F1")?;
        writeln!(f, "{:>8} {:>8}   {:>7} {:>7} {:>7}", "single", "joint", "+", "-", "0")?;
        write!(f, "{:>8.2} {:>8.2}  ", self.single.f1, self.joint.f1)?;
        if self.classes.is_empty() {
            writeln!(f, " {:>7} {:>7} {:>7}", "-", "-", "-")?;
        } else {
            for c in &self.classes {
                write!(f, " {:>7.2}", c.scores.f1)?;
            }
            writeln!(f)?;
        }
        for (name, s) in [("single", &self.single), ("joint", &self.joint)] {
            writeln!(
                f,
                "{name:>6}: precision {:6.2}  recall {:6.2}  gold {}  predicted {}  correct {}",
                s.precision, s.recall, s.gold, s.predicted, s.correct
            )?;
        }
        if self.disagreements > 0 {
            writeln!(f, "sentiment disagreements inside spans: {}", self.disagreements)?;
        }
        Ok(())
    }
}

/// Scores predicted label sequences against gold ones.
///
/// Predictions are first normalized with [`repair_labels`], so every
/// phrase starts with `B` and carries one sentiment; joint, single and
/// per-class scores then all see the same phrases.
pub fn evaluate(
    scheme: &TagScheme,
    gold: &[Vec<LabelId>],
    predicted: &[Vec<LabelId>],
) -> Result<EvalReport, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut disagreements = 0;
    let mut repaired = Vec::with_capacity(predicted.len());
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::LengthMismatch {
                sentence: i,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        let (r, d) = repair_labels(p, scheme);
        disagreements += d;
        repaired.push(r);
    }
    let names = |seqs: &[Vec<LabelId>], sc: &TagScheme| -> Vec<Vec<String>> {
        seqs.iter().map(|s| s.iter().map(|&l| sc.label(l).to_string()).collect()).collect()
    };
    let joint = conlleval_f1(&names(gold, scheme), &names(&repaired, scheme))?;
    let (single, classes) = match scheme.mode() {
        Mode::Ae => (joint, Vec::new()),
        Mode::Aesc => {
            let g: Vec<_> = gold.iter().map(|s| decouple(s, scheme)).collect();
            let p: Vec<_> = repaired.iter().map(|s| decouple(s, scheme)).collect();
            let ae = TagScheme::new(Mode::Ae);
            let g_ae: Vec<Vec<LabelId>> = g.iter().map(|d| d.ae.clone()).collect();
            let p_ae: Vec<Vec<LabelId>> = p.iter().map(|d| d.ae.clone()).collect();
            let single = conlleval_f1(&names(&g_ae, &ae), &names(&p_ae, &ae))?;
            let g_spans: Vec<_> = g.into_iter().map(|d| d.spans).collect();
            let p_spans: Vec<_> = p.into_iter().map(|d| d.spans).collect();
            (single, sentiment_class_f1(&g_spans, &p_spans))
        }
    };
    Ok(EvalReport {
        mode: scheme.mode(),
        sentences: gold.len(),
        single,
        joint,
        classes,
        disagreements,
    })
}

/// Tags `sentences` with `model` and scores the result. Also returns the
/// repaired predictions, which are the sequences that were scored.
pub fn evaluate_model(model: &Model, sentences: &[Sentence]) -> Result<(EvalReport, Vec<Vec<LabelId>>), EvalError> {
    let mut gold = Vec::with_capacity(sentences.len());
    let mut predicted = Vec::with_capacity(sentences.len());
    for s in sentences {
        let inst = model.instance(s);
        predicted.push(model.predict(&inst)?);
        gold.push(inst.labels);
    }
    let report = evaluate(model.scheme(), &gold, &predicted)?;
    let repaired = predicted.iter().map(|p| repair_labels(p, model.scheme()).0).collect();
    Ok((report, repaired))
}
