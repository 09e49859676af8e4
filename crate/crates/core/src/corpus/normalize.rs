use serde::{Deserialize, Serialize};

/// Switches for the Arabic orthographic folding rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationOptions {
    /// Drop tashkeel marks (fathatan through sukun, superscript alef).
    pub remove_diacritics: bool,
    /// أ إ آ ٱ → ا
    pub fold_alef: bool,
    /// ى → ي
    pub fold_alef_maqsura: bool,
    /// ة → ه
    pub fold_ta_marbuta: bool,
    pub remove_tatweel: bool,
    pub collapse_whitespace: bool,
    /// ASCII letters only, so romanized text folds without changing length.
    pub ascii_lowercase: bool,
}

impl NormalizationOptions {
    pub const fn all() -> Self {
        Self {
            remove_diacritics: true,
            fold_alef: true,
            fold_alef_maqsura: true,
            fold_ta_marbuta: true,
            remove_tatweel: true,
            collapse_whitespace: true,
            ascii_lowercase: true,
        }
    }

    pub const fn none() -> Self {
        Self {
            remove_diacritics: false,
            fold_alef: false,
            fold_alef_maqsura: false,
            fold_ta_marbuta: false,
            remove_tatweel: false,
            collapse_whitespace: false,
            ascii_lowercase: false,
        }
    }
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        Self::all()
    }
}

fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

pub fn normalize_text(raw: &str, options: &NormalizationOptions) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if options.remove_diacritics && is_diacritic(c) {
            continue;
        }
        if options.remove_tatweel && c == '\u{0640}' {
            continue;
        }
        let c = match c {
            '\u{0623}' | '\u{0625}' | '\u{0622}' | '\u{0671}' if options.fold_alef => '\u{0627}',
            '\u{0649}' if options.fold_alef_maqsura => '\u{064A}',
            '\u{0629}' if options.fold_ta_marbuta => '\u{0647}',
            c if options.ascii_lowercase => c.to_ascii_lowercase(),
            c => c,
        };
        if options.collapse_whitespace {
            if c.is_whitespace() {
                pending_space = !out.is_empty();
                continue;
            }
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
        }
        out.push(c);
    }
    out
}
