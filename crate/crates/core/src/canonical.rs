//! Canonical manifest encoding.
//!
//! Manifests are pretty-printed JSON with object keys sorted bytewise, two
//! space indentation, LF line endings and a trailing newline. Only integers
//! and strings are stored, so number formatting is fixed by construction.
//! Re-encoding a decoded manifest reproduces the original bytes.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn encode<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Malformed(e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&sort_keys(tree))
        .map_err(|e| Error::Malformed(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Malformed(e.to_string()))
}

/// Decodes and insists the input was already in canonical form.
pub fn decode_canonical<T: DeserializeOwned + Serialize>(bytes: &[u8]) -> Result<T> {
    let value: T = decode(bytes)?;
    if encode(&value)? != bytes {
        return Err(Error::Malformed("manifest is not in canonical form".into()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    struct Doc {
        zeta: u32,
        alpha: String,
        nested: Inner,
    }

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    struct Inner {
        b: Option<i32>,
        a: Vec<String>,
    }

    #[test]
    fn keys_are_sorted_and_output_is_stable() {
        let doc = Doc {
            zeta: 7,
            alpha: "Déjeuner — “x”".into(),
            nested: Inner { b: None, a: vec!["q".into()] },
        };
        let bytes = encode(&doc).unwrap();
        let text = std::str::from_utf8(&bytes).unwrap();
        assert_eq!(
            text,
            "{\n  \"alpha\": \"Déjeuner — “x”\",\n  \"nested\": {\n    \"a\": [\n      \"q\"\n    ],\n    \"b\": null\n  },\n  \"zeta\": 7\n}\n"
        );
        let back: Doc = decode_canonical(&bytes).unwrap();
        assert_eq!(back, doc);
        assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn non_canonical_input_is_rejected() {
        let loose = br#"{"zeta":7,"alpha":"a","nested":{"b":null,"a":[]}}"#;
        assert!(decode::<Doc>(loose).is_ok());
        assert!(decode_canonical::<Doc>(loose).is_err());
    }
}
