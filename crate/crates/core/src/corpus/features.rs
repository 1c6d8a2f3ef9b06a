//! Binary token features derived from POS and chunk annotations.
//!
//! Default layout (14 bits):
//!
//! | bits  | meaning                                                             |
//! |-------|---------------------------------------------------------------------|
//! | 0..8  | POS class: noun, verb, adjective, adverb, pronoun, determiner, preposition, other |
//! | 8..11 | chunk position: B, I, O                                             |
//! | 11..14| chunk type: NP, VP, other                                           |
//!
//! POS classes match Penn Treebank tags by prefix. The class lists and chunk
//! types can be replaced by a JSON [`FeatureTable`].

use serde::{Deserialize, Serialize};

use super::{CorpusError, Token};

pub const FEATURE_COUNT: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct FeatureVector(pub [bool; FEATURE_COUNT]);

impl FeatureVector {
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosClass {
    pub name: String,
    pub prefixes: Vec<String>,
}

/// Seven named POS classes (plus an implicit "other") and two named chunk
/// types (plus an implicit "other").
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub pos_classes: Vec<PosClass>,
    pub chunk_types: Vec<String>,
}

impl Default for FeatureTable {
    fn default() -> Self {
        let class = |name: &str, prefixes: &[&str]| PosClass {
            name: name.into(),
            prefixes: prefixes.iter().map(|p| p.to_string()).collect(),
        };
        FeatureTable {
            pos_classes: vec![
                class("noun", &["NN"]),
                class("verb", &["VB", "MD"]),
                class("adjective", &["JJ"]),
                class("adverb", &["RB", "WRB"]),
                class("pronoun", &["PRP", "WP"]),
                class("determiner", &["DT", "PDT", "WDT"]),
                class("preposition", &["IN", "TO"]),
            ],
            chunk_types: vec!["NP".into(), "VP".into()],
        }
    }
}

impl FeatureTable {
    pub fn from_json(bytes: &[u8]) -> Result<Self, CorpusError> {
        let t: FeatureTable =
            serde_json::from_slice(bytes).map_err(|e| CorpusError::FeatureTable(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let total = self.pos_classes.len() + 1 + 3 + self.chunk_types.len() + 1;
        if total != FEATURE_COUNT {
            return Err(CorpusError::FeatureTable(format!(
                "layout has {total} bits, expected {FEATURE_COUNT}"
            )));
        }
        Ok(())
    }

    /// Feature bits for `token`, or `None` when its POS or chunk tag is missing.
    pub fn try_features(&self, token: &Token) -> Option<FeatureVector> {
        let (pos, chunk) = (token.pos.as_deref()?, token.chunk.as_deref()?);
        let mut bits = [false; FEATURE_COUNT];
        let n_pos = self.pos_classes.len();
        let class = self
            .pos_classes
            .iter()
            .position(|c| c.prefixes.iter().any(|p| pos.starts_with(p.as_str())))
            .unwrap_or(n_pos);
        bits[class] = true;

        let base = n_pos + 1;
        let (position, kind) = match chunk.split_once('-') {
            Some((p, k)) => (p, Some(k)),
            None => (chunk, None),
        };
        match position {
            "B" => bits[base] = true,
            "I" => bits[base + 1] = true,
            _ => bits[base + 2] = true,
        }
        if let Some(kind) = kind {
            let t = self
                .chunk_types
                .iter()
                .position(|c| c == kind)
                .unwrap_or(self.chunk_types.len());
            bits[base + 3 + t] = true;
        }
        Some(FeatureVector(bits))
    }

    /// Like [`try_features`](Self::try_features) but all zeros for
    /// unannotated tokens.
    pub fn features(&self, token: &Token) -> FeatureVector {
        self.try_features(token).unwrap_or_default()
    }
}

/// Width of the one-hot encoding of a source model's predicted IOB tag.
pub const PRED_IOB_WIDTH: usize = 3;

/// One-hot `[O, B, I]` for a token's `pred_iob` tag (`O`, `B-ASP`, `I-ASP`,
/// or the bare prefixes).
pub fn pred_iob_bits(token: &Token) -> Option<[f64; PRED_IOB_WIDTH]> {
    let tag = token.pred_iob.as_deref()?;
    match tag.split('-').next() {
        Some("O") => Some([1.0, 0.0, 0.0]),
        Some("B") => Some([0.0, 1.0, 0.0]),
        Some("I") => Some([0.0, 0.0, 1.0]),
        _ => None,
    }
}

/// Feature bits with the default table.
pub fn linguistic_features(token: &Token) -> FeatureVector {
    FeatureTable::default().features(token)
}
