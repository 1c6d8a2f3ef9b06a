use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{char_slice, AspectSpan, CorpusError, Polarity, Sentence, Sentiment, Token};

pub type LabelId = usize;

/// Aspect extraction only, or joint extraction with collapsed sentiment tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ae,
    Aesc,
}

impl FromStr for Mode {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ae" => Ok(Mode::Ae),
            "aesc" => Ok(Mode::Aesc),
            _ => Err(CorpusError::UnknownLabel(s.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ae => "ae",
            Mode::Aesc => "aesc",
        })
    }
}

/// Structured view of a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    Outside,
    Begin(Option<Sentiment>),
    Inside(Option<Sentiment>),
}

impl Tag {
    pub fn sentiment(self) -> Option<Sentiment> {
        match self {
            Tag::Outside => None,
            Tag::Begin(s) | Tag::Inside(s) => s,
        }
    }
}

/// Bijection between label strings and dense IDs.
///
/// AE: `O, B-ASP, I-ASP`. AESC: `O` followed by `B-ASP{s}, I-ASP{s}` for
/// `s` in `+, -, 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagScheme {
    mode: Mode,
    labels: Vec<String>,
}

impl TagScheme {
    pub const OUTSIDE: LabelId = 0;

    pub fn new(mode: Mode) -> Self {
        let labels = match mode {
            Mode::Ae => vec!["O".into(), "B-ASP".into(), "I-ASP".into()],
            Mode::Aesc => {
                let mut l = vec!["O".to_string()];
                for s in Sentiment::ALL {
                    l.push(format!("B-ASP{}", s.suffix()));
                    l.push(format!("I-ASP{}", s.suffix()));
                }
                l
            }
        };
        TagScheme { mode, labels }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id]
    }

    pub fn id(&self, label: &str) -> Result<LabelId, CorpusError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| CorpusError::UnknownLabel(label.to_string()))
    }

    pub fn tag(&self, id: LabelId) -> Tag {
        if id == Self::OUTSIDE {
            return Tag::Outside;
        }
        let sentiment = match self.mode {
            Mode::Ae => None,
            Mode::Aesc => Some(Sentiment::ALL[(id - 1) / 2]),
        };
        if (id - 1).is_multiple_of(2) {
            Tag::Begin(sentiment)
        } else {
            Tag::Inside(sentiment)
        }
    }

    /// ID for a tag; the sentiment is ignored in AE mode and defaults to
    /// neutral in AESC mode.
    pub fn encode(&self, tag: Tag) -> LabelId {
        let (offset, sentiment) = match tag {
            Tag::Outside => return Self::OUTSIDE,
            Tag::Begin(s) => (1, s),
            Tag::Inside(s) => (2, s),
        };
        match self.mode {
            Mode::Ae => offset,
            Mode::Aesc => {
                let s = sentiment.unwrap_or(Sentiment::Neutral);
                let k = Sentiment::ALL.iter().position(|&x| x == s).unwrap();
                offset + 2 * k
            }
        }
    }

    /// Projects a label of this scheme onto the AE scheme by dropping its
    /// sentiment suffix.
    pub fn to_ae(&self, id: LabelId) -> LabelId {
        match self.tag(id) {
            Tag::Outside => 0,
            Tag::Begin(_) => 1,
            Tag::Inside(_) => 2,
        }
    }
}

/// A span expressed in token indices, `last` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenSpan {
    pub first: usize,
    pub last: usize,
    pub sentiment: Option<Sentiment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub labels: Vec<LabelId>,
    pub warnings: Vec<String>,
}

/// Per-token labels for a sentence's spans.
///
/// Spans whose boundaries fall inside a token are widened to whole tokens
/// and reported in `warnings`.
pub fn encode_tags(sentence: &Sentence, scheme: &TagScheme) -> Encoding {
    let mut labels = vec![TagScheme::OUTSIDE; sentence.tokens.len()];
    let mut warnings = Vec::new();
    for span in &sentence.spans {
        let covered: Vec<usize> = sentence
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.start < span.end && t.end > span.start)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (covered.first(), covered.last()) else {
            warnings.push(format!(
                "{}: span {:?} [{}, {}) covers no token",
                sentence.source_id, span.term, span.start, span.end
            ));
            continue;
        };
        if sentence.tokens[first].start != span.start || sentence.tokens[last].end != span.end {
            warnings.push(format!(
                "{}: span {:?} [{}, {}) snapped to token boundaries [{}, {})",
                sentence.source_id,
                span.term,
                span.start,
                span.end,
                sentence.tokens[first].start,
                sentence.tokens[last].end
            ));
        }
        if covered.iter().any(|&i| labels[i] != TagScheme::OUTSIDE) {
            warnings.push(format!(
                "{}: span {:?} shares a token with a previous span",
                sentence.source_id, span.term
            ));
        }
        let sentiment = Some(span.polarity.sentiment());
        labels[first] = scheme.encode(Tag::Begin(sentiment));
        for l in &mut labels[first + 1..=last] {
            *l = scheme.encode(Tag::Inside(sentiment));
        }
    }
    Encoding { labels, warnings }
}

/// Reads spans off a label sequence.
///
/// `B` opens a span; `I` continues the open span or, after `O`, opens one.
/// The span's sentiment is the one on its first token; the second return
/// value counts inside tokens whose sentiment disagrees with it.
pub fn decode_token_spans(labels: &[LabelId], scheme: &TagScheme) -> (Vec<TokenSpan>, usize) {
    let mut spans: Vec<TokenSpan> = Vec::new();
    let mut open = false;
    let mut disagreements = 0;
    for (i, &l) in labels.iter().enumerate() {
        match scheme.tag(l) {
            Tag::Outside => open = false,
            Tag::Begin(s) => {
                spans.push(TokenSpan {
                    first: i,
                    last: i,
                    sentiment: s,
                });
                open = true;
            }
            Tag::Inside(s) => {
                if open {
                    let cur = spans.last_mut().unwrap();
                    cur.last = i;
                    if cur.sentiment != s {
                        disagreements += 1;
                    }
                } else {
                    spans.push(TokenSpan {
                        first: i,
                        last: i,
                        sentiment: s,
                    });
                    open = true;
                }
            }
        }
    }
    (spans, disagreements)
}

pub fn encode_token_spans(spans: &[TokenSpan], len: usize, scheme: &TagScheme) -> Vec<LabelId> {
    let mut labels = vec![TagScheme::OUTSIDE; len];
    for s in spans {
        labels[s.first] = scheme.encode(Tag::Begin(s.sentiment));
        for l in &mut labels[s.first + 1..=s.last] {
            *l = scheme.encode(Tag::Inside(s.sentiment));
        }
    }
    labels
}

/// Rewrites a label sequence into well-formed IOB where every span starts
/// with `B` and carries one sentiment. Returns the disagreement count.
pub fn repair_labels(labels: &[LabelId], scheme: &TagScheme) -> (Vec<LabelId>, usize) {
    let (spans, disagreements) = decode_token_spans(labels, scheme);
    (encode_token_spans(&spans, labels.len(), scheme), disagreements)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoding {
    pub spans: Vec<AspectSpan>,
    pub disagreements: usize,
}

/// Character-offset spans for a label sequence over `tokens` of `text`.
pub fn decode_tags(
    labels: &[LabelId],
    tokens: &[Token],
    text: &str,
    scheme: &TagScheme,
) -> Result<Decoding, CorpusError> {
    if labels.len() != tokens.len() {
        return Err(CorpusError::LengthMismatch {
            labels: labels.len(),
            tokens: tokens.len(),
        });
    }
    let (token_spans, disagreements) = decode_token_spans(labels, scheme);
    let spans = token_spans
        .into_iter()
        .map(|s| {
            let (start, end) = (tokens[s.first].start, tokens[s.last].end);
            AspectSpan {
                start,
                end,
                term: char_slice(text, start, end).unwrap_or_default().to_string(),
                polarity: s.sentiment.map_or(Polarity::None, Sentiment::polarity),
            }
        })
        .collect();
    Ok(Decoding {
        spans,
        disagreements,
    })
}
