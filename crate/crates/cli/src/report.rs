//! Command reports: a JSON document with a content digest, or plain text.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub settings: Value,
    pub inputs: Vec<InputDigest>,
    pub verdict: String,
    pub result: Value,
    /// SHA-256 of the report with `digest` and `timing_ms` removed.
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: &str, settings: Value, inputs: Vec<InputDigest>, verdict: &str, result: Value) -> Self {
        let mut report = Report {
            tool: "qrdt".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            settings,
            inputs,
            verdict: verdict.into(),
            result,
            digest: String::new(),
            timing_ms: None,
        };
        report.digest = report.compute_digest();
        report
    }

    pub fn compute_digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        let map = value.as_object_mut().expect("report is an object");
        map.remove("digest");
        map.remove("timing_ms");
        sha256_hex(&serde_json::to_vec(&value).expect("report serialises"))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serialises"),
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.verdict);
        if let Value::Object(map) = &self.result {
            for (k, v) in map {
                match v {
                    Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                        out.push_str(&format!("  {k}:\n"));
                        for item in items {
                            out.push_str(&format!("    {}\n", compact(item)));
                        }
                    }
                    _ => out.push_str(&format!("  {k}: {}\n", compact(v))),
                }
            }
        }
        for input in &self.inputs {
            out.push_str(&format!("  input {} sha256 {}\n", input.path, input.sha256));
        }
        out.push_str(&format!("  digest {}\n", self.digest));
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("  time {t:.1} ms\n"));
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => serde_json::to_string(other).expect("value serialises"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_timing_and_round_trips() {
        let mut a = Report::new("validate", json!({"seed": 0}), vec![], "valid", json!({"m": 2}));
        let b = a.clone();
        a.timing_ms = Some(12.5);
        assert_eq!(a.compute_digest(), b.digest);

        let text = a.render(Format::Json);
        let parsed: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, a);
        assert_eq!(parsed.render(Format::Json), text);
    }

    #[test]
    fn digest_tracks_content() {
        let a = Report::new("validate", json!({}), vec![], "valid", json!({"m": 2}));
        let b = Report::new("validate", json!({}), vec![], "invalid", json!({"m": 2}));
        assert_ne!(a.digest, b.digest);
        assert_eq!(sha256_hex(b"").len(), 64);
    }
}
