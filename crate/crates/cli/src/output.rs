//! The JSON/TSV output document and its numeric encodings.

use std::collections::BTreeMap;

use kmsgraph::{Scalar, VertexId};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// How far a printed number can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    /// Reproduces under exact re-evaluation.
    Exact,
    /// A partial sum or certified bound that can only grow with depth.
    LowerBound,
    Heuristic,
}

impl Certainty {
    /// Exact in exact arithmetic, heuristic otherwise.
    pub fn of_arithmetic<S: Scalar>() -> Self {
        if S::EXACT {
            Certainty::Exact
        } else {
            Certainty::Heuristic
        }
    }
}

pub fn float(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Exact scalars print as `p/q` strings, floats as JSON numbers.
pub fn scalar<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        json!(x.to_string())
    } else {
        float(x.to_f64())
    }
}

pub fn quantity<S: Scalar>(x: &S, certainty: Certainty) -> Value {
    json!({ "value": scalar(x), "certainty": certainty })
}

pub fn float_quantity(x: f64, certainty: Certainty) -> Value {
    json!({ "value": float(x), "certainty": certainty })
}

pub fn values<S: Scalar>(values: &BTreeMap<VertexId, S>) -> Value {
    Value::Object(values.iter().map(|(v, x)| (v.to_string(), scalar(x))).collect::<Map<_, _>>())
}

pub fn vector<S: Scalar>(map: &BTreeMap<VertexId, S>, certainty: Certainty) -> Value {
    json!({ "certainty": certainty, "values": values(map) })
}

pub fn ids(vs: &[VertexId]) -> Value {
    json!(vs.iter().map(VertexId::to_string).collect::<Vec<_>>())
}

/// Rows for `--format tsv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `key value` table.
    pub fn pairs(pairs: Vec<(&str, String)>) -> Self {
        let mut t = Table::new(&["key", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.to_string(), v]);
        }
        t
    }

    pub fn vector<S: Scalar>(map: &BTreeMap<VertexId, S>) -> Self {
        let mut t = Table::new(&["vertex", "value"]);
        for (v, x) in map {
            t.push(vec![v.to_string(), x.to_string()]);
        }
        t
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Clone, Debug, Serialize)]
pub struct Echo {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub mode: Option<&'static str>,
    pub depth: usize,
    pub row_limit: usize,
    pub tol: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputDocument {
    pub schema_version: u32,
    pub command: Echo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub diagnostics: Diagnostics,
}

impl OutputDocument {
    pub fn to_json(&self) -> String {
        // Through `Value` so every object, including the envelope, has sorted keys.
        let value = serde_json::to_value(self).expect("document serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    /// Diagnostics and errors as `#` comment lines, then the table.
    pub fn to_tsv(&self, table: Option<&Table>) -> String {
        let d = &self.diagnostics;
        let mut out = format!("# schema_version={}\n# command={}\n", self.schema_version, self.command.name);
        if let Some(mode) = d.mode {
            out.push_str(&format!("# mode={mode}\n"));
        }
        out.push_str(&format!(
            "# depth={}\n# row_limit={}\n# tol={:e}\n# seed={}\n",
            d.depth, d.row_limit, d.tol, d.seed
        ));
        for n in &d.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("# error[{}]: {}\n", e.kind, e.message));
        }
        if let Some(t) = table {
            out.push_str(&t.render());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kmsgraph::Rational;

    #[test]
    fn exact_scalars_print_as_fractions() {
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(scalar(&half), json!("1/2"));
        assert_eq!(scalar(&0.5f64), json!(0.5));
        assert_eq!(float(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn certainty_markers_are_kebab_case() {
        assert_eq!(serde_json::to_value(Certainty::LowerBound).unwrap(), json!("lower-bound"));
    }
}
