//! Parsing the chat model's suggestion answer.

use serde_json::Value;
use uisuggest_core::{Modification, SolutionSpecSet};

use crate::ParseError;

/// Text starting at the JSON payload: just past the opening line of the
/// first fenced code block, or the whole answer when there is no fence.
fn payload_start(raw: &str) -> &str {
    let Some(start) = raw.find("```") else {
        return raw.trim_start();
    };
    let after = &raw[start + 3..];
    // Skip an info string such as `json` up to the end of the line.
    match after.find('\n') {
        Some(nl) if !after[..nl].contains('{') => &after[nl + 1..],
        _ => after,
    }
}

/// The first JSON value in `raw`. Trailing text (closing fence, prose) is
/// ignored, so backticks inside JSON strings are harmless.
fn first_json_value(raw: &str) -> Result<Value, ParseError> {
    serde_json::Deserializer::from_str(payload_start(raw))
        .into_iter::<Value>()
        .next()
        .unwrap_or_else(|| Err(serde::de::Error::custom("no JSON value found")))
        .map_err(|e| ParseError::MalformedJson(e.to_string()))
}

fn non_empty_str<'a>(obj: &'a Value, key: &str, at: &str) -> Result<&'a str, ParseError> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s),
        Some(Value::String(_)) => Err(ParseError::SchemaViolation(format!("{at}{key} is empty"))),
        Some(_) => Err(ParseError::SchemaViolation(format!("{at}{key} is not a string"))),
        None => Err(ParseError::SchemaViolation(format!("{at}{key} is missing"))),
    }
}

/// Extracts and validates the solution specifications, requiring exactly
/// `n` modifications.
pub fn parse_suggestion_response(raw: &str, n: usize) -> Result<SolutionSpecSet, ParseError> {
    let value = first_json_value(raw)?;
    if !value.is_object() {
        return Err(ParseError::SchemaViolation("top level is not an object".into()));
    }
    let ui_description = non_empty_str(&value, "ui_description", "")?.to_string();
    let items = match value.get("modifications") {
        Some(Value::Array(items)) => items,
        Some(_) => {
            return Err(ParseError::SchemaViolation(
                "modifications is not an array".into(),
            ))
        }
        None => return Err(ParseError::SchemaViolation("modifications is missing".into())),
    };
    let modifications = items
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let at = format!("modifications[{i}].");
            Ok(Modification {
                title: non_empty_str(m, "title", &at)?.to_string(),
                description: non_empty_str(m, "description", &at)?.to_string(),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    if modifications.len() != n {
        return Err(ParseError::CountMismatch {
            found: modifications.len(),
            expected: n,
        });
    }
    Ok(SolutionSpecSet {
        ui_description,
        modifications,
    })
}

/// Serializes a spec set the way a well-behaved model would answer.
pub fn render_spec_block(specs: &SolutionSpecSet) -> String {
    format!(
        "```json\n{}\n```",
        serde_json::to_string_pretty(specs).expect("spec sets serialize")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn specs(n: usize) -> SolutionSpecSet {
        SolutionSpecSet {
            ui_description: "A login screen".into(),
            modifications: (0..n)
                .map(|i| Modification {
                    title: format!("Title {i}"),
                    description: format!("Description {i}"),
                })
                .collect(),
        }
    }

    #[test]
    fn fenced_block_parses() {
        let raw = format!("Sure! Here you go:\n{}\nHope it helps.", render_spec_block(&specs(3)));
        assert_eq!(parse_suggestion_response(&raw, 3).unwrap(), specs(3));
    }

    #[test]
    fn bare_json_parses() {
        let raw = serde_json::to_string(&specs(2)).unwrap();
        assert_eq!(parse_suggestion_response(&raw, 2).unwrap(), specs(2));
    }

    #[test]
    fn count_mismatch() {
        let raw = render_spec_block(&specs(2));
        assert_eq!(
            parse_suggestion_response(&raw, 3),
            Err(ParseError::CountMismatch {
                found: 2,
                expected: 3
            })
        );
    }

    #[test]
    fn prose_is_malformed() {
        assert!(matches!(
            parse_suggestion_response("I would make the text bigger.", 3),
            Err(ParseError::MalformedJson(_))
        ));
    }

    #[test]
    fn schema_violations() {
        let cases = [
            r#"{"modifications": []}"#,
            r#"{"ui_description": "", "modifications": []}"#,
            r#"{"ui_description": "x", "modifications": {}}"#,
            r#"{"ui_description": "x", "modifications": [{"title": "t"}]}"#,
            r#"{"ui_description": "x", "modifications": [{"title": " ", "description": "d"}]}"#,
            r#"[1, 2]"#,
        ];
        for c in cases {
            assert!(
                matches!(parse_suggestion_response(c, 1), Err(ParseError::SchemaViolation(_))),
                "{c}"
            );
        }
    }

    fn text() -> impl Strategy<Value = String> {
        "[ -~\n\"\\\\{}`]{0,12}[a-zA-Z0-9][ -~\n]{0,12}"
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(
            ui in text(),
            mods in prop::collection::vec((text(), text()), 1..6),
        ) {
            let set = SolutionSpecSet {
                ui_description: ui,
                modifications: mods
                    .into_iter()
                    .map(|(title, description)| Modification { title, description })
                    .collect(),
            };
            let n = set.modifications.len();
            prop_assert_eq!(parse_suggestion_response(&render_spec_block(&set), n).unwrap(), set);
        }
    }
}
