use super::Token;

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{2026}' | '\u{2013}' | '\u{2014}'
                | '\u{00AB}' | '\u{00BB}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Whitespace tokenization with leading and trailing punctuation split off
/// into one token per character. Internal punctuation (hyphens, apostrophes,
/// decimal points) stays inside the word. Offsets are in characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let end = i;

        let mut lo = start;
        while lo < end && is_punct(chars[lo]) {
            lo += 1;
        }
        let mut hi = end;
        while hi > lo && is_punct(chars[hi - 1]) {
            hi -= 1;
        }
        let push = |tokens: &mut Vec<Token>, s: usize, e: usize| {
            tokens.push(Token::new(chars[s..e].iter().collect::<String>(), s, e));
        };
        for p in start..lo {
            push(&mut tokens, p, p + 1);
        }
        if lo < hi {
            push(&mut tokens, lo, hi);
        }
        for p in hi..end {
            push(&mut tokens, p, p + 1);
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn basic_examples() {
        assert_eq!(surfaces("It works."), ["It", "works", "."]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
        assert_eq!(surfaces("battery-life, wow"), ["battery-life", ",", "wow"]);
    }

    #[test]
    fn punctuation_runs_and_internal_marks() {
        assert_eq!(surfaces("(it's great!!)"), ["(", "it's", "great", "!", "!", ")"]);
        assert_eq!(surfaces("3.5 inches"), ["3.5", "inches"]);
        assert_eq!(surfaces("..."), [".", ".", "."]);
    }

    #[test]
    fn offsets_recover_surfaces() {
        let text = "  The “screen”  is  ok… really";
        let chars: Vec<char> = text.chars().collect();
        for t in tokenize(text) {
            let s: String = chars[t.start..t.end].iter().collect();
            assert_eq!(s, t.surface);
        }
    }
}
