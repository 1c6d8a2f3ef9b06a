//! SemEval-2014 ABSA XML (Phase B layout).
//!
//! ```xml
//! <sentences>
//!   <sentence id="2339">
//!     <text>I charge it at night and skip taking the cord with me.</text>
//!     <aspectTerms>
//!       <aspectTerm term="cord" polarity="neutral" from="41" to="45"/>
//!     </aspectTerms>
//!   </sentence>
//! </sentences>
//! ```

use std::fmt::Write as _;

use super::{AspectSpan, CorpusError, Polarity, Sentence};

pub fn parse_semeval_xml(bytes: &[u8]) -> Result<Vec<Sentence>, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Xml {
        location: format!("byte {}", e.valid_up_to()),
        message: "input is not valid UTF-8".into(),
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| CorpusError::Xml {
        location: format!("line {}, column {}", e.pos().row, e.pos().col),
        message: e.to_string(),
    })?;

    let mut out = Vec::new();
    for (n, node) in doc
        .descendants()
        .filter(|n| n.has_tag_name("sentence"))
        .enumerate()
    {
        let id = node
            .attribute("id")
            .map(str::to_string)
            .unwrap_or_else(|| format!("sentence-{}", n + 1));
        let body = node
            .children()
            .find(|c| c.has_tag_name("text"))
            .and_then(|t| t.text())
            .unwrap_or("");
        let mut sentence = Sentence::new(id.clone(), body);

        for term in node
            .children()
            .filter(|c| c.has_tag_name("aspectTerms"))
            .flat_map(|c| c.children().filter(|t| t.has_tag_name("aspectTerm")))
        {
            let attr = |name: &str| -> Result<&str, CorpusError> {
                term.attribute(name).ok_or_else(|| CorpusError::Xml {
                    location: format!("sentence {id}"),
                    message: format!("aspectTerm without `{name}`"),
                })
            };
            let offset = |name: &str| -> Result<usize, CorpusError> {
                attr(name)?.trim().parse().map_err(|_| CorpusError::Xml {
                    location: format!("sentence {id}"),
                    message: format!("aspectTerm `{name}` is not an offset"),
                })
            };
            let polarity = match term.attribute("polarity") {
                Some(p) => p.parse::<Polarity>()?,
                None => Polarity::None,
            };
            sentence.spans.push(AspectSpan {
                start: offset("from")?,
                end: offset("to")?,
                term: attr("term")?.to_string(),
                polarity,
            });
        }
        sentence.spans.sort_by_key(|s| (s.start, s.end));
        let before = sentence.spans.len();
        sentence.spans.dedup();
        if sentence.spans.len() != before {
            log::warn!("sentence {id}: dropped {} duplicate aspectTerm(s)", before - sentence.spans.len());
        }
        sentence.validate()?;
        out.push(sentence);
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn write_semeval_xml(sentences: &[Sentence]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<sentences>\n");
    for s in sentences {
        let _ = writeln!(out, "  <sentence id=\"{}\">", escape(&s.source_id));
        let _ = writeln!(out, "    <text>{}</text>", escape(&s.text));
        if !s.spans.is_empty() {
            out.push_str("    <aspectTerms>\n");
            for a in &s.spans {
                let _ = write!(out, "      <aspectTerm term=\"{}\"", escape(&a.term));
                if a.polarity != Polarity::None {
                    let _ = write!(out, " polarity=\"{}\"", a.polarity);
                }
                let _ = writeln!(out, " from=\"{}\" to=\"{}\"/>", a.start, a.end);
            }
            out.push_str("    </aspectTerms>\n");
        }
        out.push_str("  </sentence>\n");
    }
    out.push_str("</sentences>\n");
    out
}
