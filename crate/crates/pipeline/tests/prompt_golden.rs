use serde_json::Value;
use uisuggest_pipeline::{render_direct_edit_prompt, render_edit_prompt, render_suggestion_prompt};

fn cases() -> Vec<Value> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/prompts.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn field<'a>(case: &'a Value, key: &str) -> &'a str {
    case["inputs"][key].as_str().unwrap()
}

#[test]
fn renders_match_golden_files_byte_for_byte() {
    let cases = cases();
    assert_eq!(cases.len(), 15);
    for case in &cases {
        let rendered = match case["prompt"].as_str().unwrap() {
            "suggestion" => render_suggestion_prompt(
                field(case, "n").parse().unwrap(),
                field(case, "user_feedback"),
            ),
            "edit" => render_edit_prompt(
                field(case, "ui_description"),
                field(case, "user_feedback"),
                field(case, "modification_title"),
                field(case, "modification_description"),
            ),
            "direct_edit" => render_direct_edit_prompt(field(case, "user_feedback")),
            other => panic!("unknown prompt kind {other}"),
        }
        .unwrap();
        assert_eq!(
            rendered.as_bytes(),
            case["expected"].as_str().unwrap().as_bytes(),
            "{}",
            case["name"]
        );
    }
}
