//! Prompt templates and their rendering.

use crate::PromptError;

pub const SUGGESTION_TEMPLATE: &str = include_str!("../templates/suggestion.txt");
pub const EDIT_TEMPLATE: &str = include_str!("../templates/edit.txt");
pub const DIRECT_EDIT_TEMPLATE: &str = include_str!("../templates/direct_edit.txt");

/// Replaces `{key}` placeholders in a single left-to-right pass. Braces that
/// do not enclose a known key are copied through, and substituted values are
/// never rescanned.
fn substitute(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let key = &after[..close];
            vars.iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn require(value: &str, field: &'static str) -> Result<(), PromptError> {
    if value.trim().is_empty() {
        Err(PromptError::EmptyField(field))
    } else {
        Ok(())
    }
}

fn require_feedback(feedback: &str) -> Result<(), PromptError> {
    if feedback.trim().is_empty() {
        Err(PromptError::EmptyFeedback)
    } else {
        Ok(())
    }
}

/// Asks the chat model for `n` textual modifications.
pub fn render_suggestion_prompt(n: u32, user_feedback: &str) -> Result<String, PromptError> {
    require_feedback(user_feedback)?;
    Ok(substitute(
        SUGGESTION_TEMPLATE,
        &[("n", &n.to_string()), ("user_feedback", user_feedback)],
    ))
}

/// Asks the image model to realize one modification.
pub fn render_edit_prompt(
    ui_description: &str,
    user_feedback: &str,
    modification_title: &str,
    modification_description: &str,
) -> Result<String, PromptError> {
    require(ui_description, "ui_description")?;
    require(user_feedback, "user_feedback")?;
    require(modification_title, "modification_title")?;
    require(modification_description, "modification_description")?;
    Ok(substitute(
        EDIT_TEMPLATE,
        &[
            ("ui_description", ui_description),
            ("user_feedback", user_feedback),
            ("modification_title", modification_title),
            ("modification_description", modification_description),
        ],
    ))
}

/// Asks the image model to fix the feedback directly, with no intermediate
/// suggestion step.
pub fn render_direct_edit_prompt(user_feedback: &str) -> Result<String, PromptError> {
    require_feedback(user_feedback)?;
    Ok(substitute(
        DIRECT_EDIT_TEMPLATE,
        &[("user_feedback", user_feedback)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suggestion_prompt_substitutes_literally() {
        let p = render_suggestion_prompt(3, "Text is too small").unwrap();
        assert!(p.contains(
            "propose 3 design modifications that address the user feedback"
        ));
        assert!(p.contains("# User feedback:\nText is too small\n"));
        let p1 = render_suggestion_prompt(1, "x").unwrap();
        assert!(p1.contains("propose 1 design modifications"));
        // The JSON example in the template keeps its braces.
        assert!(p.contains("```json\n{\n\"ui_description\""));
        assert!(p.ends_with("```"));
    }

    #[test]
    fn blank_feedback_is_rejected() {
        assert_eq!(
            render_suggestion_prompt(3, "   "),
            Err(PromptError::EmptyFeedback)
        );
        assert_eq!(render_direct_edit_prompt(""), Err(PromptError::EmptyFeedback));
    }

    #[test]
    fn edit_prompt_ends_with_instruction() {
        let p = render_edit_prompt(
            "A settings screen",
            "Hard to read",
            "Increase font size",
            "Raise body text to 16pt",
        )
        .unwrap();
        assert!(p.ends_with("Increase font size, which can be achieved by: Raise body text to 16pt"));
        assert!(p.contains("while preserving all other visual elements of the original design"));
        assert_eq!(
            render_edit_prompt("", "a", "b", "c"),
            Err(PromptError::EmptyField("ui_description"))
        );
        assert_eq!(
            render_edit_prompt("a", "b", "c", " "),
            Err(PromptError::EmptyField("modification_description"))
        );
    }

    #[test]
    fn direct_prompt_layout() {
        let p = render_direct_edit_prompt("Buttons too close").unwrap();
        let fb = p.find("# User Feedback").unwrap();
        let text = p.find("Buttons too close").unwrap();
        let task = p.find("# Task").unwrap();
        assert!(fb < text && text < task);
        assert!(!p.contains("which can be achieved by"));
    }

    #[test]
    fn placeholders_in_values_are_not_expanded() {
        let p = render_edit_prompt("{user_feedback}", "fb", "t {n}", "d").unwrap();
        assert!(p.contains("description:\n{user_feedback}\n"));
        assert!(p.ends_with("t {n}, which can be achieved by: d"));
    }

    #[test]
    fn rendering_is_pure() {
        assert_eq!(
            render_suggestion_prompt(5, "fb").unwrap(),
            render_suggestion_prompt(5, "fb").unwrap()
        );
    }
}
