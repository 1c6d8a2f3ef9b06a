//! Canonical corpus: one JSON object per line.
//!
//! ```json
//! {"id":"1","text":"The screen is bright","tokens":[{"surface":"The","start":0,"end":3,"pos":"DT","chunk":"B-NP"}, ...],
//!  "spans":[{"start":4,"end":10,"term":"screen","polarity":"positive"}]}
//! ```
//!
//! `weight` (default 1) and a token-level `pred_iob` appear only on
//! corpora produced by the adaptation stage.

use super::{CorpusError, Sentence};

pub fn read_canonical(bytes: &[u8]) -> Result<Vec<Sentence>, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Json {
        line: 0,
        message: format!("not UTF-8 (byte {})", e.valid_up_to()),
    })?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let sentence: Sentence = serde_json::from_str(line).map_err(|e| CorpusError::Json {
            line: n + 1,
            message: e.to_string(),
        })?;
        sentence.validate()?;
        out.push(sentence);
    }
    Ok(out)
}

pub fn write_canonical(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&serde_json::to_string(s).expect("sentences serialize"));
        out.push('\n');
    }
    out
}
