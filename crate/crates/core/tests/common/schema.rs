//! Just enough JSON Schema (draft-07) to check the service and CLI output
//! against the published schemas: type, enum, const, required, properties,
//! additionalProperties, items, anyOf/oneOf/allOf, numeric bounds, pattern,
//! and `$ref` within a file or across the two schema files.

use std::collections::HashMap;

use regex::Regex;
use serde_json::Value;

pub struct Validator {
    docs: HashMap<String, Value>,
}

pub const API: &str = "api.schema.json";
pub const SESSION_LOG: &str = "session-log.schema.json";

impl Validator {
    pub fn load() -> Validator {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("schema");
        let mut docs = HashMap::new();
        for name in [API, SESSION_LOG] {
            let text = std::fs::read_to_string(dir.join(name)).unwrap();
            docs.insert(name.to_string(), serde_json::from_str(&text).unwrap());
        }
        Validator { docs }
    }

    /// Validates `value` against `#/definitions/{definition}` of `doc`.
    pub fn check(&self, doc: &str, definition: &str, value: &Value) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        let reference = format!("{doc}#/definitions/{definition}");
        let (doc, schema) = self.resolve(doc, &reference);
        self.validate(&doc, schema, value, "$", &mut errors);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn assert_valid(&self, doc: &str, definition: &str, value: &Value) {
        if let Err(errors) = self.check(doc, definition, value) {
            panic!(
                "{definition} failed validation:\n  {}\nvalue: {}",
                errors.join("\n  "),
                serde_json::to_string_pretty(value).unwrap()
            );
        }
    }

    fn resolve<'a>(&'a self, current: &str, reference: &str) -> (String, &'a Value) {
        let (file, pointer) = reference.split_once('#').unwrap_or((reference, ""));
        let file = if file.is_empty() { current } else { file };
        let doc = self
            .docs
            .get(file)
            .unwrap_or_else(|| panic!("unknown schema file {file}"));
        let target = doc
            .pointer(pointer)
            .unwrap_or_else(|| panic!("unresolved $ref {reference}"));
        (file.to_string(), target)
    }

    fn validate(&self, doc: &str, schema: &Value, value: &Value, at: &str, errors: &mut Vec<String>) {
        let Some(schema) = schema.as_object() else {
            if schema == &Value::Bool(false) {
                errors.push(format!("{at}: no value allowed"));
            }
            return;
        };
        if let Some(Value::String(r)) = schema.get("$ref") {
            let (file, target) = self.resolve(doc, r);
            self.validate(&file, target, value, at, errors);
            return;
        }
        if let Some(t) = schema.get("type") {
            let allowed: Vec<&str> = match t {
                Value::String(s) => vec![s.as_str()],
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                _ => vec![],
            };
            if !allowed.iter().any(|t| type_matches(t, value)) {
                errors.push(format!("{at}: expected {allowed:?}, got {}", short(value)));
                return;
            }
        }
        if let Some(Value::Array(options)) = schema.get("enum") {
            if !options.contains(value) {
                errors.push(format!("{at}: {} not in enum", short(value)));
            }
        }
        if let Some(c) = schema.get("const") {
            if c != value {
                errors.push(format!("{at}: expected const {c}"));
            }
        }
        if let Some(n) = value.as_f64() {
            if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
                if n < min {
                    errors.push(format!("{at}: {n} < minimum {min}"));
                }
            }
            if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
                if n > max {
                    errors.push(format!("{at}: {n} > maximum {max}"));
                }
            }
            if let Some(min) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
                if n <= min {
                    errors.push(format!("{at}: {n} <= exclusiveMinimum {min}"));
                }
            }
        }
        if let (Some(Value::String(p)), Some(s)) = (schema.get("pattern"), value.as_str()) {
            if !Regex::new(p).unwrap().is_match(s) {
                errors.push(format!("{at}: {s:?} does not match {p}"));
            }
        }
        if let Some(obj) = value.as_object() {
            if let Some(Value::Array(required)) = schema.get("required") {
                for key in required.iter().filter_map(Value::as_str) {
                    if !obj.contains_key(key) {
                        errors.push(format!("{at}: missing required `{key}`"));
                    }
                }
            }
            let props = schema.get("properties").and_then(Value::as_object);
            for (key, v) in obj {
                let path = format!("{at}.{key}");
                match props.and_then(|p| p.get(key)) {
                    Some(sub) => self.validate(doc, sub, v, &path, errors),
                    None => match schema.get("additionalProperties") {
                        Some(Value::Bool(false)) => errors.push(format!("{path}: unexpected property")),
                        Some(sub @ Value::Object(_)) => self.validate(doc, sub, v, &path, errors),
                        _ => {}
                    },
                }
            }
        }
        if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
            for (i, v) in arr.iter().enumerate() {
                self.validate(doc, items, v, &format!("{at}[{i}]"), errors);
            }
        }
        if let Some(Value::Array(all)) = schema.get("allOf") {
            for sub in all {
                self.validate(doc, sub, value, at, errors);
            }
        }
        for (keyword, exactly_one) in [("anyOf", false), ("oneOf", true)] {
            if let Some(Value::Array(options)) = schema.get(keyword) {
                let passing = options
                    .iter()
                    .filter(|sub| {
                        let mut scratch = Vec::new();
                        self.validate(doc, sub, value, at, &mut scratch);
                        scratch.is_empty()
                    })
                    .count();
                if passing == 0 || (exactly_one && passing > 1) {
                    errors.push(format!("{at}: {passing} of {} {keyword} branches match", options.len()));
                }
            }
        }
    }
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.as_f64().is_some_and(|n| n.fract() == 0.0),
        _ => false,
    }
}

fn short(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 60 {
        format!("{}…", &s[..s.char_indices().nth(60).map_or(s.len(), |(i, _)| i)])
    } else {
        s
    }
}
