//! Sentence splitting for designer critiques.

use crate::BenchError;

/// Splits on `.`, `!` or `?` followed by whitespace and an uppercase
/// letter. Terminators stay with their sentence; there is no abbreviation
/// list.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j].1.is_uppercase() {
                let end = pos + c.len_utf8();
                let s = text[start..end].trim();
                if !s.is_empty() {
                    out.push(s);
                }
                start = chars[j].0;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// The second sentence of a critique, which carries the observed problem.
pub fn extract_feedback_sentence(critique: &str) -> Result<String, BenchError> {
    split_sentences(critique)
        .get(1)
        .map(|s| s.to_string())
        .ok_or(BenchError::TooFewSentences)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_second_sentence() {
        let c = "The expected standard is that text should be easy to read. In the current design, the text is too small. To fix this, increase the font size.";
        assert_eq!(
            extract_feedback_sentence(c).unwrap(),
            "In the current design, the text is too small."
        );
    }

    #[test]
    fn boundaries() {
        assert!(matches!(
            extract_feedback_sentence("Only one sentence here."),
            Err(BenchError::TooFewSentences)
        ));
        assert_eq!(extract_feedback_sentence("First one! Second one").unwrap(), "Second one");
        assert_eq!(
            extract_feedback_sentence("  Is it ok?   No, it is not.  ").unwrap(),
            "No, it is not."
        );
    }

    #[test]
    fn needs_whitespace_and_uppercase() {
        assert_eq!(split_sentences("Version 2.0 is out. it works.").len(), 1);
        assert_eq!(split_sentences("Costs 3.50 Euro. Too much.").len(), 2);
        // No abbreviation list.
        assert_eq!(split_sentences("e.g. Apple. Banana.").len(), 3);
        assert_eq!(split_sentences("Ünïcode first. Émile second.").len(), 2);
    }
}
