//! Terminal-punctuation sentence counting for the round-length rule.

/// Common abbreviations whose trailing period does not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "eg", "ie", "al", "fig",
    "inc", "ltd", "co", "dept", "est", "approx", "vol", "no",
];

fn is_abbreviation(token: &str) -> bool {
    let token = token.trim_end_matches('.');
    if token.is_empty() {
        return false;
    }
    // Single-letter initials ("J.") and dotted acronyms ("u.s") stay inside
    // their sentence.
    if token.chars().count() == 1 && token.chars().all(|c| c.is_alphabetic()) {
        return true;
    }
    if token.contains('.') {
        return true;
    }
    ABBREVIATIONS.contains(&token.to_lowercase().as_str())
}

/// Counts sentences by terminal punctuation (., !, ?) with an abbreviation
/// whitelist. A trailing fragment without terminal punctuation counts as one
/// sentence; runs of terminators ("?!", "...") count once.
pub fn count_sentences(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0usize;
    let mut token_start: Option<usize> = None;
    let mut saw_content = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            token_start = None;
            i += 1;
            continue;
        }
        if !matches!(c, '.' | '!' | '?') {
            if token_start.is_none() {
                token_start = Some(i);
            }
            saw_content = true;
            i += 1;
            continue;
        }
        // Collapse terminator runs.
        let mut j = i;
        while j < chars.len() && matches!(chars[j], '.' | '!' | '?') {
            j += 1;
        }
        let run_has_period_only = chars[i..j].iter().all(|c| *c == '.');
        let token: String = token_start
            .map(|s| chars[s..i].iter().collect())
            .unwrap_or_default();
        let abbreviated = run_has_period_only && (j - i == 1) && is_abbreviation(&token);
        if saw_content && !abbreviated {
            count += 1;
            saw_content = false;
        }
        token_start = None;
        i = j;
    }
    if saw_content {
        count += 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_sentences() {
        assert_eq!(count_sentences("One. Two! Three?"), 3);
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(count_sentences("Dr. Smith spoke. Mr. Jones replied."), 2);
    }

    #[test]
    fn ellipsis_counts_once() {
        assert_eq!(count_sentences("Well... maybe. Sure?!"), 2);
    }

    #[test]
    fn trailing_fragment_counts() {
        assert_eq!(count_sentences("No punctuation here"), 1);
    }

    #[test]
    fn empty_text() {
        assert_eq!(count_sentences(""), 0);
        assert_eq!(count_sentences("   "), 0);
    }

    #[test]
    fn forty_one_sentences() {
        let text = "A sentence. ".repeat(41);
        assert_eq!(count_sentences(&text), 41);
    }
}
