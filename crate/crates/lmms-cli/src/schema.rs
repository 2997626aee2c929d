//! Structural JSON schema checking for the shipped output schemas.
//!
//! The validator covers the subset of JSON Schema the shipped files use:
//! `type` (single or list), `properties` / `required` /
//! `additionalProperties`, `items`, `enum`, `minItems`, and `anyOf`.
//! Unknown keywords are ignored, so the files stay forward-compatible with
//! full validators.

use serde_json::Value;

/// Shipped schema source by name (the files under `schemas/` at the
/// repository root, embedded so the binary is self-contained).
pub fn shipped(name: &str) -> Option<&'static str> {
    Some(match name {
        "instance" => include_str!("../../../schemas/instance.schema.json"),
        "validate" => include_str!("../../../schemas/validate.schema.json"),
        "quotient" => include_str!("../../../schemas/quotient.schema.json"),
        "distance" => include_str!("../../../schemas/distance.schema.json"),
        "isomorphic" => include_str!("../../../schemas/isomorphic.schema.json"),
        "matrix-law" => include_str!("../../../schemas/matrix-law.schema.json"),
        "sprinkle" => include_str!("../../../schemas/sprinkle.schema.json"),
        "reconstruct" => include_str!("../../../schemas/reconstruct.schema.json"),
        "union" => include_str!("../../../schemas/union.schema.json"),
        _ => return None,
    })
}

/// Checks `value` against `schema`; returns human-readable mismatches
/// (empty = conforms).
pub fn check(schema: &Value, value: &Value) -> Vec<String> {
    let mut errs = Vec::new();
    walk(schema, value, "$", &mut errs);
    errs
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        _ => false,
    }
}

fn walk(schema: &Value, value: &Value, path: &str, errs: &mut Vec<String>) {
    let Some(obj) = schema.as_object() else {
        errs.push(format!("{path}: schema node is not an object"));
        return;
    };

    if let Some(any) = obj.get("anyOf").and_then(Value::as_array) {
        let matched = any.iter().any(|sub| {
            let mut sub_errs = Vec::new();
            walk(sub, value, path, &mut sub_errs);
            sub_errs.is_empty()
        });
        if !matched {
            errs.push(format!("{path}: matches no anyOf branch"));
        }
        return;
    }

    if let Some(t) = obj.get("type") {
        let ok = match t {
            Value::String(s) => type_ok(s, value),
            Value::Array(list) => list
                .iter()
                .filter_map(Value::as_str)
                .any(|s| type_ok(s, value)),
            _ => false,
        };
        if !ok {
            errs.push(format!("{path}: expected type {t}, got {value}"));
            return;
        }
    }

    if let Some(choices) = obj.get("enum").and_then(Value::as_array) {
        if !choices.contains(value) {
            errs.push(format!("{path}: {value} not in enum"));
        }
    }

    if let Some(map) = value.as_object() {
        if let Some(req) = obj.get("required").and_then(Value::as_array) {
            for key in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(key) {
                    errs.push(format!("{path}: missing required key {key:?}"));
                }
            }
        }
        let props = obj.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(v) = map.get(key) {
                    walk(sub, v, &format!("{path}.{key}"), errs);
                }
            }
        }
        if obj.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in map.keys() {
                if props.is_none_or(|p| !p.contains_key(key)) {
                    errs.push(format!("{path}: unexpected key {key:?}"));
                }
            }
        }
    }

    if let Some(list) = value.as_array() {
        if let Some(min) = obj.get("minItems").and_then(Value::as_u64) {
            if (list.len() as u64) < min {
                errs.push(format!("{path}: {} items < minItems {min}", list.len()));
            }
        }
        if let Some(items) = obj.get("items") {
            for (i, v) in list.iter().enumerate() {
                walk(items, v, &format!("{path}[{i}]"), errs);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accepts_matching_object() {
        let schema = json!({
            "type": "object",
            "required": ["a"],
            "properties": {"a": {"type": "number"}, "b": {"type": ["string", "null"]}},
            "additionalProperties": false
        });
        assert!(check(&schema, &json!({"a": 1.5, "b": null})).is_empty());
        assert!(check(&schema, &json!({"a": 1.5})).is_empty());
    }

    #[test]
    fn rejects_type_and_extra_key_mismatches() {
        let schema = json!({
            "type": "object",
            "required": ["a"],
            "properties": {"a": {"type": "integer"}},
            "additionalProperties": false
        });
        assert!(!check(&schema, &json!({"a": 1.5})).is_empty());
        assert!(!check(&schema, &json!({})).is_empty());
        assert!(!check(&schema, &json!({"a": 1, "z": 0})).is_empty());
    }

    #[test]
    fn arrays_and_anyof_work() {
        let schema = json!({
            "type": "array",
            "minItems": 1,
            "items": {"anyOf": [{"type": "number"}, {"type": "string"}]}
        });
        assert!(check(&schema, &json!([1, "x", 2.5])).is_empty());
        assert!(!check(&schema, &json!([])).is_empty());
        assert!(!check(&schema, &json!([true])).is_empty());
    }

    #[test]
    fn every_shipped_schema_parses() {
        for name in [
            "instance",
            "validate",
            "quotient",
            "distance",
            "isomorphic",
            "matrix-law",
            "sprinkle",
            "reconstruct",
            "union",
        ] {
            let text = shipped(name).expect("schema registered");
            let parsed: Value = serde_json::from_str(text).expect("schema is valid JSON");
            assert!(parsed.is_object(), "{name} schema is an object");
        }
    }
}
