//! The report document. Everything a command prints is built here as a
//! typed structure, serialized to JSON, and the text form is rendered from
//! that JSON so both agree on every number.

use serde::{Serialize, Serializer};
use serde_json::Value;

use prodform::normal_form::round_sig;

/// An extended real in a report: rounded to 12 significant digits, with
/// infinities as the strings `inf` and `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v if v.is_nan() => s.serialize_str("nan"),
            v => s.serialize_f64(round_sig(v)),
        }
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: CommandEcho,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    /// Wall-clock time, only when asked for, since it breaks byte stability.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NotPlayable,
    ValidationError,
    CapacityExceeded,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandEcho {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<String>,
    pub cap: u64,
    pub execution: String,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub args: serde_json::Map<String, Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    /// Loading a model rejects self-information, so a summary always says so.
    pub self_information: &'static str,
    /// Agents in an order that makes the model sequential, if one exists.
    pub sequential_ordering: Option<Vec<String>>,
    pub playability: PlayabilityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayabilityVerdict {
    pub verdict: Verdict,
    /// How the verdict was reached: `sequential-ordering`, `all`, or
    /// `sample=N,seed=S`.
    pub mode: String,
    pub profiles_checked: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Playable,
    NotPlayable,
    /// Every sampled profile solved uniquely; not a proof.
    NoFailureInSample,
    /// The exhaustive check would exceed the cap.
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub nature_points: usize,
    pub configurations: usize,
    pub agents: Vec<AgentCount>,
    pub players: Vec<PlayerCount>,
    /// Product of the players' strategy counts, as a decimal string since it
    /// may overflow 64 bits.
    pub profiles: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentCount {
    pub agent: String,
    pub actions: usize,
    pub info_atoms: usize,
    pub strategies: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerCount {
    pub player: String,
    pub sense: prodform::Sense,
    pub agents: Vec<String>,
    pub strategies: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    /// Path into the game file, or the command-line flag at fault.
    pub location: String,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    /// Nature point, as `factor=element` labels.
    pub omega: Vec<String>,
    /// One strategy per agent.
    pub profile: Vec<AgentStrategy>,
    pub fixed_points: usize,
    /// Each solution as one action label per agent.
    pub solutions: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentStrategy {
    pub agent: String,
    pub strategy: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyRef {
    pub player: String,
    pub index: u64,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub strategies: Vec<StrategyRef>,
    pub values: Vec<Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&value).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Text => render_text(&value),
        }
    }
}

/// Indented text rendering of a JSON document. Scalars are written exactly
/// as in the JSON form.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => Some(format!(
            "[{}]",
            a.iter()
                .map(|x| scalar(x).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(", ")
        )),
        Value::Array(a)
            if a.iter().all(|x| {
                x.as_array()
                    .is_some_and(|y| y.iter().all(|z| scalar(z).is_some() && !z.is_array()))
            }) =>
        {
            Some(format!(
                "[{}]",
                a.iter()
                    .map(|x| scalar(x).unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        }
        _ => None,
    }
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match scalar(v) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_value(out, v, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_value(out, item, indent + 1);
                    }
                }
            }
        }
        v => out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_and_infinities_are_literals() {
        let v = serde_json::to_string(&nums(&[0.1 + 0.2, f64::INFINITY, f64::NEG_INFINITY, -0.0]))
            .unwrap();
        assert_eq!(v, r#"[0.3,"inf","-inf",0.0]"#);
    }

    #[test]
    fn text_keeps_json_numbers() {
        let v = serde_json::json!({"a": {"values": [5.0, "inf"]}, "b": [{"x": 1}]});
        assert_eq!(
            render_text(&v),
            "a:\n  values: [5.0, inf]\nb:\n  -\n    x: 1\n"
        );
    }
}
