use crate::error::{Error, Result};

use super::{check_normal_crossings, NCModel};

/// Parses a JSON model document and validates its structure.
///
/// Syntax and type errors carry the line reported by the JSON parser.
/// Semantic errors (a positive exponent without a label, an unknown chart in
/// a transition, ...) are located by searching the document for the first
/// identifier named in the message.
pub fn load_model(document: &str) -> Result<NCModel> {
    let model: NCModel =
        serde_json::from_str(document).map_err(|e| Error::Schema { line: Some(e.line()), message: e.to_string() })?;
    model.validate().map_err(|e| {
        let message = match e {
            Error::Model(m) => m,
            other => other.to_string(),
        };
        Error::Schema { line: locate(document, &message), message }
    })?;
    Ok(model)
}

/// Like [`load_model`], then rejects models failing the sampled
/// normal-crossings checks.
pub fn load_model_checked(document: &str) -> Result<NCModel> {
    let model = load_model(document)?;
    let diagnostics = check_normal_crossings(&model);
    if let Some(first) = diagnostics.first() {
        return Err(Error::Model(format!("{} violation(s); first: {}", diagnostics.len(), first)));
    }
    Ok(model)
}

/// Serializes in the normalized layout: pretty-printed, two-space indent,
/// trailing newline. `save_model(&load_model(d)?)` is a fixed point after
/// one pass.
pub fn save_model(model: &NCModel) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("models always serialize");
    s.push('\n');
    s
}

fn locate(document: &str, message: &str) -> Option<usize> {
    // Messages name their subject as the second word: "chart c1: ...",
    // "transition a -> b: ...", "special point origin ...".
    let words: Vec<&str> = message.split_whitespace().collect();
    let subject = match words.as_slice() {
        ["special", "point", name, ..] => *name,
        [_, name, ..] => *name,
        _ => return None,
    };
    let needle = format!("\"{}\"", subject.trim_end_matches(':'));
    document.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
  "name": "t",
  "components": [
    { "id": "V1", "multiplicity": 2, "connected": true }
  ],
  "charts": [
    {
      "id": "c",
      "field_kind": "real",
      "dim": 2,
      "exponents": [2, 0],
      "unit_factor": "1",
      "domain_radius": 1.0,
      "divisor_labels": ["V1", null]
    }
  ]
}"#;

    #[test]
    fn loads_and_normalizes() {
        let m = load_model(SMALL).unwrap();
        let once = save_model(&m);
        assert_eq!(save_model(&load_model(&once).unwrap()), once);
    }

    #[test]
    fn negative_exponent_is_a_schema_error_with_line() {
        let bad = SMALL.replace("[2, 0]", "[2, -1]");
        match load_model(&bad) {
            Err(Error::Schema { line: Some(l), .. }) => assert_eq!(l, 11),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_kind_is_rejected() {
        let bad = SMALL.replace("\"real\"", "\"quaternion\"");
        assert!(matches!(load_model(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn missing_label_is_located_at_the_chart() {
        let bad = SMALL.replace("[2, 0]", "[2, 3]");
        match load_model(&bad) {
            Err(Error::Schema { line, message }) => {
                assert!(message.contains("no divisor label"), "{message}");
                assert_eq!(line, Some(8));
            }
            other => panic!("{other:?}"),
        }
    }
}
