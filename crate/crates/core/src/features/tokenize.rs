use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{060C}' // arabic comma
                | '\u{061B}' // arabic semicolon
                | '\u{061F}' // arabic question mark
                | '\u{066A}'..='\u{066D}'
                | '\u{06D4}'
                | '\u{00A1}' | '\u{00BF}' | '\u{00AB}' | '\u{00BB}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{3001}' | '\u{3002}'
        )
}

/// Splits on Unicode whitespace and detaches every punctuation character as
/// its own token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, out: &mut Vec<Token>| {
        if !current.is_empty() {
            let position = out.len();
            out.push(Token {
                surface: std::mem::take(current),
                position,
            });
        }
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut current, &mut out);
        } else if is_punctuation(c) {
            flush(&mut current, &mut out);
            current.push(c);
            flush(&mut current, &mut out);
        } else {
            current.push(c);
        }
    }
    flush(&mut current, &mut out);
    out
}

pub fn is_word(token: &Token) -> bool {
    !token.surface.chars().all(is_punctuation)
}

/// Number of non-punctuation tokens.
pub fn word_count(text: &str) -> usize {
    tokenize(text).iter().filter(|t| is_word(t)).count()
}
