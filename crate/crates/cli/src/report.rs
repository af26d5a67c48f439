//! Versioned report envelope and output writers.

use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Sampled,
}

/// A headline number with a stable identifier and the relation it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub tag: String,
    pub provenance: Provenance,
}

pub fn quantity(name: &str, value: f64, tag: &str, provenance: Provenance) -> Quantity {
    Quantity {
        name: name.to_string(),
        value,
        tag: tag.to_string(),
        provenance,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub provenance: Provenance,
    pub passed: bool,
    pub config: Value,
    pub quantities: Vec<Quantity>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "mevcost",
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            provenance,
            passed: true,
            config: Value::Null,
            quantities: Vec::new(),
            result: Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Rows of `name,value,tag,provenance`.
pub fn quantities_csv(quantities: &[Quantity]) -> String {
    let mut out = String::from("name,value,tag,provenance\n");
    for q in quantities {
        let provenance = match q.provenance {
            Provenance::Exact => "exact",
            Provenance::Sampled => "sampled",
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&q.name),
            q.value,
            csv_field(&q.tag),
            provenance
        ));
    }
    out
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escaping() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn envelope_fields() {
        let mut r = Report::new("cost", 7, Provenance::Exact);
        r.quantities
            .push(quantity("cost", 0.5, "C = max - mean", Provenance::Exact));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["provenance"], "exact");
        assert_eq!(v["quantities"][0]["tag"], "C = max - mean");
        assert!(quantities_csv(&r.quantities).starts_with("name,value,tag,provenance\ncost,0.5,"));
    }
}
