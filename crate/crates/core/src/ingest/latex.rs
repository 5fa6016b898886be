//! Minimal LaTeX text decoding for BibTeX field values.
//!
//! Accent macros and a fixed set of symbol macros are decoded, grouping
//! braces are dropped, and any other macro is kept verbatim (with its brace
//! argument) and reported.

use unicode_normalization::UnicodeNormalization;

fn accent_mark(c: char) -> Option<char> {
    Some(match c {
        '\'' => '\u{0301}',
        '`' => '\u{0300}',
        '^' => '\u{0302}',
        '"' => '\u{0308}',
        '~' => '\u{0303}',
        '=' => '\u{0304}',
        '.' => '\u{0307}',
        _ => return None,
    })
}

fn letter_accent_mark(name: &str) -> Option<char> {
    Some(match name {
        "c" => '\u{0327}',
        "u" => '\u{0306}',
        "v" => '\u{030C}',
        "H" => '\u{030B}',
        "k" => '\u{0328}',
        "r" => '\u{030A}',
        "d" => '\u{0323}',
        "b" => '\u{0331}',
        _ => return None,
    })
}

fn symbol(name: &str) -> Option<&'static str> {
    Some(match name {
        "ss" => "ß",
        "o" => "ø",
        "O" => "Ø",
        "ae" => "æ",
        "AE" => "Æ",
        "oe" => "œ",
        "OE" => "Œ",
        "aa" => "å",
        "AA" => "Å",
        "l" => "ł",
        "L" => "Ł",
        "i" => "ı",
        "j" => "ȷ",
        "textendash" => "–",
        "textemdash" => "—",
        "textquoteright" => "’",
        "textquoteleft" => "‘",
        "textregistered" => "®",
        "texttrademark" => "™",
        "copyright" => "©",
        "LaTeX" => "LaTeX",
        "TeX" => "TeX",
        _ => return None,
    })
}

/// Decodes `input`, returning the text and the names of unknown macros.
pub fn decode(input: &str) -> (String, Vec<String>) {
    let chars: Vec<char> = input.chars().collect();
    let mut out = String::with_capacity(input.len());
    let mut unknown = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '{' | '}' => i += 1,
            '~' => {
                out.push(' ');
                i += 1;
            }
            '\\' => {
                i = decode_macro(&chars, i, &mut out, &mut unknown);
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    let text: String = out.nfc().collect();
    (text.split_whitespace().collect::<Vec<_>>().join(" "), unknown)
}

/// Reads the accent argument at `i`: `{x}`, `{\i}`, ` x` or `x`.
fn accent_argument(chars: &[char], mut i: usize) -> Option<(char, usize)> {
    while i < chars.len() && chars[i] == ' ' {
        i += 1;
    }
    let braced = chars.get(i) == Some(&'{');
    if braced {
        i += 1;
    }
    let (base, mut next) = match chars.get(i)? {
        '\\' => match (chars.get(i + 1), chars.get(i + 2)) {
            (Some('i'), n) if !n.map(|c| c.is_alphabetic()).unwrap_or(false) => ('i', i + 2),
            (Some('j'), n) if !n.map(|c| c.is_alphabetic()).unwrap_or(false) => ('j', i + 2),
            _ => return None,
        },
        c if c.is_alphabetic() => (*c, i + 1),
        _ => return None,
    };
    if braced {
        if chars.get(next) != Some(&'}') {
            return None;
        }
        next += 1;
    }
    Some((base, next))
}

fn decode_macro(chars: &[char], start: usize, out: &mut String, unknown: &mut Vec<String>) -> usize {
    let Some(&next) = chars.get(start + 1) else {
        out.push('\\');
        return start + 1;
    };
    if let Some(mark) = accent_mark(next) {
        if let Some((base, end)) = accent_argument(chars, start + 2) {
            out.push(base);
            out.push(mark);
            return end;
        }
    }
    if "&%$#_{} ".contains(next) {
        out.push(next);
        return start + 2;
    }
    if next == '\\' {
        out.push(' ');
        return start + 2;
    }
    if !next.is_ascii_alphabetic() {
        out.push('\\');
        out.push(next);
        return start + 2;
    }
    let mut end = start + 1;
    while end < chars.len() && chars[end].is_ascii_alphabetic() {
        end += 1;
    }
    let name: String = chars[start + 1..end].iter().collect();
    if let Some(mark) = letter_accent_mark(&name) {
        if let Some((base, arg_end)) = accent_argument(chars, end) {
            out.push(base);
            out.push(mark);
            return arg_end;
        }
    }
    if let Some(s) = symbol(&name) {
        out.push_str(s);
        // a control word swallows one following space
        if chars.get(end) == Some(&' ') {
            return end + 1;
        }
        return end;
    }
    // unknown: keep the macro and a directly following brace group verbatim
    unknown.push(name.clone());
    out.push('\\');
    out.push_str(&name);
    if chars.get(end) == Some(&'{') {
        let mut depth = 0usize;
        let mut j = end;
        while j < chars.len() {
            out.push(chars[j]);
            match chars[j] {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return j + 1;
                    }
                }
                _ => {}
            }
            j += 1;
        }
        return j;
    }
    end
}
