//! JSON parsing for the two external input formats. Parse errors carry the
//! line and column of the offending token; schema violations name the
//! violated constraint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::VectorFamily;
use crate::spectral::DiagonalModel;

/// Parse `{"dim": .., "label": .., "vectors": [[[re, im], ..], ..]}`.
pub fn parse_family_json(text: &str) -> Result<VectorFamily> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("family json: {e}")))
}

/// Parse `{"lambdas": [[re, im], ..]}`.
pub fn parse_model_json(text: &str) -> Result<DiagonalModel> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("model json: {e}")))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_round_trip() {
        let text = r#"{
            "dim": 2,
            "label": "pair",
            "vectors": [[[1.0, 0.0], [0.0, 0.5]], [[0.0, 0.0], [1.0, 0.0]]]
        }"#;
        let family = parse_family_json(text).unwrap();
        assert_eq!(family.dim(), 2);
        assert_eq!(family.len(), 2);
        let serialized = to_json_pretty(&family);
        let reparsed = parse_family_json(&serialized).unwrap();
        assert_eq!(reparsed.vector(0), family.vector(0));
        assert_eq!(reparsed.label(), "pair");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_family_json("{\n  \"dim\": 2,\n  oops\n}").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line 3"), "{message}");
        assert!(message.contains("column"), "{message}");
    }

    #[test]
    fn schema_violations_name_the_constraint() {
        // vector length disagrees with dim
        let err = parse_family_json(
            r#"{"dim": 2, "label": "bad", "vectors": [[[1.0, 0.0]]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("dim"), "{err}");

        // non-finite entry
        let err = parse_family_json(
            r#"{"dim": 1, "label": "bad", "vectors": [[[1e999, 0.0]]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn model_round_trip_and_modulus_check() {
        let model = parse_model_json(r#"{"lambdas": [[0.5, 0.0], [0.0, -0.25]]}"#).unwrap();
        assert_eq!(model.dim(), 2);
        let serialized = to_json_pretty(&model);
        assert_eq!(parse_model_json(&serialized).unwrap().lambdas(), model.lambdas());

        let err = parse_model_json(r#"{"lambdas": [[1.0, 0.0]]}"#).unwrap_err();
        assert!(err.to_string().contains("modulus"), "{err}");
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(parse_family_json(""), Err(Error::Parse(_))));
        assert!(matches!(parse_model_json("{}"), Err(Error::Parse(_))));
    }
}
