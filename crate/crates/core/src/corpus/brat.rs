//! brat standoff pairs: a `.txt` with one sentence per line and an `.ann`
//! with `T` (text-bound) and `A` (attribute) lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{char_slice, AspectSpan, CorpusError, Polarity, Sentence};

struct Line {
    start: usize,
    end: usize,
    sentence: Option<usize>,
}

pub fn parse_brat(txt: &[u8], ann: &[u8]) -> Result<Vec<Sentence>, CorpusError> {
    let txt = utf8(txt, "txt")?;
    let ann = utf8(ann, "ann")?;

    let mut sentences = Vec::new();
    let mut lines = Vec::new();
    let mut offset = 0;
    for raw in txt.split('\n') {
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        let len = content.chars().count();
        let sentence = if content.trim().is_empty() {
            None
        } else {
            sentences.push(Sentence::new(format!("brat:{}", sentences.len() + 1), content));
            Some(sentences.len() - 1)
        };
        lines.push(Line {
            start: offset,
            end: offset + len,
            sentence,
        });
        offset += raw.chars().count() + 1;
    }

    // T-id -> (sentence index, span index)
    let mut spans: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut attributes = Vec::new();
    for (n, line) in ann.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let id = fields.next().unwrap_or("");
        match id.chars().next() {
            Some('T') => {
                let (desc, surface) = match (fields.next(), fields.next()) {
                    (Some(d), Some(s)) => (d, s),
                    _ => return Err(annotation(line_no, "T line needs three tab-separated fields")),
                };
                let mut parts = desc.split_whitespace();
                let _kind = parts.next();
                let rest: Vec<&str> = parts.collect();
                if rest.len() != 2 || rest.iter().any(|p| p.contains(';')) {
                    return Err(annotation(line_no, "discontinuous or malformed offsets"));
                }
                let start: usize = rest[0].parse().map_err(|_| annotation(line_no, "bad start offset"))?;
                let end: usize = rest[1].parse().map_err(|_| annotation(line_no, "bad end offset"))?;
                let host = lines
                    .iter()
                    .find(|l| l.start <= start && end <= l.end && start < end)
                    .ok_or_else(|| annotation(line_no, "span crosses a line boundary"))?;
                let si = host
                    .sentence
                    .ok_or_else(|| annotation(line_no, "span on an empty line"))?;
                let sentence = &mut sentences[si];
                let (ls, le) = (start - host.start, end - host.start);
                let slice = char_slice(&sentence.text, ls, le).unwrap_or("");
                if slice != surface {
                    return Err(CorpusError::Alignment {
                        sentence: sentence.source_id.clone(),
                        detail: format!("{id} reads {slice:?}, annotation says {surface:?}"),
                    });
                }
                sentence.spans.push(AspectSpan {
                    start: ls,
                    end: le,
                    term: surface.to_string(),
                    polarity: Polarity::None,
                });
                spans.insert(id, (si, sentence.spans.len() - 1));
            }
            Some('A') | Some('M') => attributes.push((line_no, fields.next().unwrap_or(""))),
            _ => {}
        }
    }

    for (line_no, desc) in attributes {
        let parts: Vec<&str> = desc.split_whitespace().collect();
        let (name, target) = match parts.as_slice() {
            [name, target, ..] => (*name, *target),
            _ => return Err(annotation(line_no, "attribute needs a name and a target")),
        };
        let &(si, sp) = spans.get(target).ok_or_else(|| CorpusError::DanglingReference {
            line: line_no,
            target: target.to_string(),
        })?;
        let lname = name.to_ascii_lowercase();
        if lname != "sentiment" && lname != "polarity" {
            continue;
        }
        let value = parts
            .get(2)
            .ok_or_else(|| annotation(line_no, "sentiment attribute without a value"))?;
        sentences[si].spans[sp].polarity = value.parse()?;
    }

    for s in &mut sentences {
        s.spans.sort_by_key(|a| (a.start, a.end));
        s.validate()?;
    }
    Ok(sentences)
}

/// Serializes to a `(txt, ann)` pair readable by [`parse_brat`].
pub fn write_brat(sentences: &[Sentence]) -> (String, String) {
    let mut txt = String::new();
    let mut ann = String::new();
    let (mut t, mut a) = (0, 0);
    let mut offset = 0;
    for s in sentences {
        for span in &s.spans {
            t += 1;
            let _ = writeln!(
                ann,
                "T{t}\tAspect {} {}\t{}",
                offset + span.start,
                offset + span.end,
                span.term
            );
            if span.polarity != Polarity::None {
                a += 1;
                let _ = writeln!(ann, "A{a}\tSentiment T{t} {}", span.polarity);
            }
        }
        txt.push_str(&s.text);
        txt.push('\n');
        offset += s.char_len() + 1;
    }
    (txt, ann)
}

fn utf8<'a>(bytes: &'a [u8], which: &str) -> Result<&'a str, CorpusError> {
    std::str::from_utf8(bytes).map_err(|e| CorpusError::Annotation {
        line: 0,
        message: format!(".{which} is not UTF-8 (byte {})", e.valid_up_to()),
    })
}

fn annotation(line: usize, message: &str) -> CorpusError {
    CorpusError::Annotation {
        line,
        message: message.to_string(),
    }
}
