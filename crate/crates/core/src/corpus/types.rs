use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Character (not byte) offsets into the sentence text, end exclusive.
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<String>,
    /// IOB tag predicted by a source-domain model (PRED adaptation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred_iob: Option<String>,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Self {
        Token {
            surface: surface.into(),
            start,
            end,
            pos: None,
            chunk: None,
            pred_iob: None,
        }
    }
}

/// Raw annotated polarity. `Conflict` and `None` survive parsing and are
/// folded into neutral only when tags are encoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
    Conflict,
    None,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Conflict => "conflict",
            Polarity::None => "none",
        }
    }

    /// The three-way class used for tagging.
    pub fn sentiment(self) -> Sentiment {
        match self {
            Polarity::Positive => Sentiment::Positive,
            Polarity::Negative => Sentiment::Negative,
            Polarity::Neutral | Polarity::Conflict | Polarity::None => Sentiment::Neutral,
        }
    }
}

impl FromStr for Polarity {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Polarity::Positive),
            "negative" | "neg" | "-" => Ok(Polarity::Negative),
            "neutral" | "neu" | "0" => Ok(Polarity::Neutral),
            "conflict" => Ok(Polarity::Conflict),
            "none" | "" => Ok(Polarity::None),
            _ => Err(CorpusError::InvalidPolarity(s.to_string())),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sentiment classes carried by collapsed tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn suffix(self) -> &'static str {
        match self {
            Sentiment::Positive => "+",
            Sentiment::Negative => "-",
            Sentiment::Neutral => "0",
        }
    }

    pub fn from_suffix(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Sentiment::Positive),
            "-" | "\u{2212}" => Some(Sentiment::Negative),
            "0" => Some(Sentiment::Neutral),
            _ => None,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            Sentiment::Positive => Polarity::Positive,
            Sentiment::Negative => Polarity::Negative,
            Sentiment::Neutral => Polarity::Neutral,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectSpan {
    pub start: usize,
    pub end: usize,
    pub term: String,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    #[serde(rename = "id")]
    pub source_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    #[serde(default)]
    pub spans: Vec<AspectSpan>,
    /// Input-embedding scale applied at lookup time (WEIGHTED adaptation).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(w: &f64) -> bool {
    *w == 1.0
}

impl Sentence {
    pub fn new(source_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = super::tokenize(&text);
        Sentence {
            source_id: source_id.into(),
            text,
            tokens,
            spans: Vec::new(),
            weight: 1.0,
        }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Checks offsets and term alignment for every span, and that spans are
    /// sorted and non-overlapping.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let len = self.char_len();
        for t in &self.tokens {
            if t.start >= t.end || t.end > len {
                return Err(CorpusError::Alignment {
                    sentence: self.source_id.clone(),
                    detail: format!("token {:?} has offsets [{}, {})", t.surface, t.start, t.end),
                });
            }
        }
        for w in self.tokens.windows(2) {
            if w[1].start < w[0].end {
                return Err(CorpusError::Alignment {
                    sentence: self.source_id.clone(),
                    detail: format!("tokens {:?} and {:?} overlap", w[0].surface, w[1].surface),
                });
            }
        }
        for s in &self.spans {
            match char_slice(&self.text, s.start, s.end) {
                Some(slice) if slice == s.term && s.start < s.end => {}
                slice => {
                    return Err(CorpusError::Alignment {
                        sentence: self.source_id.clone(),
                        detail: format!(
                            "span [{}, {}) reads {:?}, expected {:?}",
                            s.start,
                            s.end,
                            slice.unwrap_or(""),
                            s.term
                        ),
                    })
                }
            }
        }
        for w in self.spans.windows(2) {
            if w[1].start < w[0].end {
                return Err(CorpusError::OverlappingSpans {
                    sentence: self.source_id.clone(),
                    first: w[0].term.clone(),
                    second: w[1].term.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Slice `text` by character offsets `[start, end)`.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let b_start = indices.nth(start)?;
    let b_end = if end == start {
        b_start
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[b_start..b_end])
}
