use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::model::AuthorName;

/// Lowercases, folds accents, turns punctuation into separators and
/// collapses whitespace. Idempotent.
pub fn normalize_title(t: &str) -> String {
    // Case mapping and compatibility decomposition can each re-enable the
    // other (e.g. U+0130, U+210C), so iterate to a fixed point.
    let mut current = fold_once(t);
    for _ in 0..4 {
        let next = fold_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn fold_once(t: &str) -> String {
    let folded: String = t
        .to_lowercase()
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

const PARTICLES: &[&str] = &[
    "van", "von", "der", "den", "de", "del", "della", "di", "da", "dos", "das", "du", "la", "le", "ten", "ter",
    "zu", "vom", "af", "al", "bin", "st.",
];

fn is_particle(token: &str) -> bool {
    PARTICLES.contains(&token.to_lowercase().as_str())
}

fn is_initial_cluster(token: &str) -> bool {
    // "J", "J.", "J.J.", "J.-P."
    let letters: Vec<char> = token.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return false;
    }
    let stripped: String = token.chars().filter(|c| *c != '.' && *c != '-').collect();
    if stripped.chars().count() == 1 {
        return true;
    }
    token.contains('.')
        && token
            .split('.')
            .filter(|s| !s.is_empty())
            .all(|s| s.trim_start_matches('-').chars().count() == 1)
}

/// Renders given-name tokens with dotted initials separated by single spaces.
fn normalize_given(given: &str) -> String {
    let mut out: Vec<String> = Vec::new();
    for token in given.split_whitespace() {
        if is_initial_cluster(token) && !token.contains('-') {
            for part in token.split('.').filter(|s| !s.is_empty()) {
                out.push(format!("{}.", part.to_uppercase()));
            }
        } else if is_initial_cluster(token) {
            // hyphenated initials stay joined: "J.-P."
            let parts: Vec<String> = token
                .split('-')
                .filter(|s| !s.is_empty())
                .map(|s| format!("{}.", s.trim_end_matches('.').to_uppercase()))
                .collect();
            out.push(parts.join("-"));
        } else {
            out.push(token.to_string());
        }
    }
    out.join(" ")
}

fn plausible(name: &str) -> bool {
    name.chars().any(|c| c.is_alphabetic()) && !name.chars().any(|c| c.is_ascii_digit())
}

/// Splits an author string in either "Family, Given" or "Given Family" form
/// into its canonical parts. Names that cannot be split become `family = raw`
/// and yield a warning message.
pub fn normalize_author(raw: &str) -> (AuthorName, Option<String>) {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let fallback = |why: &str| {
        (
            AuthorName {
                given: String::new(),
                family: raw.to_string(),
                raw: raw.to_string(),
            },
            Some(format!("could not parse author name {raw:?}: {why}")),
        )
    };
    if !plausible(&collapsed) {
        return fallback("no alphabetic name parts");
    }

    let (given, family) = if collapsed.contains(',') {
        let parts: Vec<&str> = collapsed.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [family, given] => (given.to_string(), family.to_string()),
            // "Family, Jr., Given"
            [family, suffix, given] => (given.to_string(), format!("{family} {suffix}")),
            _ => return fallback("too many commas"),
        }
    } else {
        let tokens: Vec<&str> = collapsed.split(' ').collect();
        if tokens.len() == 1 {
            (String::new(), tokens[0].to_string())
        } else {
            let mut split = tokens.len() - 1;
            while split > 1 && is_particle(tokens[split - 1]) {
                split -= 1;
            }
            (tokens[..split].join(" "), tokens[split..].join(" "))
        }
    };
    if family.is_empty() {
        return fallback("empty family name");
    }
    (
        AuthorName {
            given: normalize_given(&given),
            family,
            raw: raw.to_string(),
        },
        None,
    )
}

/// Splits a raw author-list cell on `;` or BibTeX-style ` and `.
pub fn split_author_list(cell: &str) -> Vec<String> {
    let sep = if cell.contains(';') { ";" } else { " and " };
    cell.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn title_rules() {
        assert_eq!(normalize_title("A  Mapping Study!"), "a mapping study");
        assert_eq!(normalize_title("Systematic   Review: Part\u{2010}1"), "systematic review part 1");
        assert_eq!(normalize_title("Évaluation  des Méthodes"), "evaluation des methodes");
        assert_eq!(normalize_title(""), "");
    }

    proptest! {
        #[test]
        fn title_normalization_is_idempotent(s in "\\PC{0,60}") {
            let once = normalize_title(&s);
            prop_assert_eq!(normalize_title(&once), once);
        }
    }

    #[test]
    fn comma_and_plain_forms_agree() {
        let (a, w1) = normalize_author("Abrams, J. J.");
        let (b, w2) = normalize_author("J. J. Abrams");
        assert!(w1.is_none() && w2.is_none());
        assert_eq!(a.given, "J. J.");
        assert_eq!(a.family, "Abrams");
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.raw, "Abrams, J. J.");
        assert_eq!(normalize_author("Abrams, J.J.").0.canonical(), "J. J. Abrams");
        assert_eq!(normalize_author("J J Abrams").0.canonical(), "J. J. Abrams");
    }

    #[test]
    fn particles_stay_with_family() {
        assert_eq!(normalize_author("van der Berg, M.").0.family, "van der Berg");
        let (n, _) = normalize_author("M. van der Berg");
        assert_eq!(n.family, "van der Berg");
        assert_eq!(n.given, "M.");
        assert_eq!(normalize_author("Jean-Pierre de la Fontaine").0.family, "de la Fontaine");
    }

    #[test]
    fn hyphenated_initials_and_suffix() {
        assert_eq!(normalize_author("Dupont, J.-P.").0.given, "J.-P.");
        let (n, _) = normalize_author("King, Jr., Martin");
        assert_eq!(n.family, "King Jr.");
        assert_eq!(n.given, "Martin");
    }

    #[test]
    fn unparseable_falls_back_with_warning() {
        let (n, w) = normalize_author("1234");
        assert_eq!(n.family, "1234");
        assert!(w.is_some());
        let (n, w) = normalize_author("a, b, c, d");
        assert_eq!(n.family, "a, b, c, d");
        assert!(w.is_some());
    }

    #[test]
    fn author_list_splitting() {
        assert_eq!(split_author_list("Abrams, J. J.; Smith, A."), ["Abrams, J. J.", "Smith, A."]);
        assert_eq!(split_author_list("J. Abrams and A. Smith"), ["J. Abrams", "A. Smith"]);
    }
}
