//! Text and JSON rendering of command results.

use dfan_core::basis::MarkedBasis;
use dfan_core::syntax::format_rat;
use dfan_core::weyl::{DiffOp, Exponent, Signature};
use dfan_core::Rat;
use serde_json::{json, Map, Value};

pub struct Report {
    command: &'static str,
    lines: Vec<String>,
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report { command, lines: Vec::new(), fields: Map::new() }
    }

    pub fn text(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn field(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    pub fn merge(&mut self, value: Value) {
        if let Value::Object(m) = value {
            self.fields.extend(m);
        }
    }

    pub fn finish(mut self, as_json: bool, seed: u64) -> String {
        if as_json {
            self.fields.insert("schema".into(), json!(1));
            self.fields.insert("seed".into(), json!(seed));
            self.fields.insert("command".into(), json!(self.command));
            let mut s = serde_json::to_string_pretty(&Value::Object(self.fields)).expect("json");
            s.push('\n');
            s
        } else {
            let mut s = self.lines.join("\n");
            s.push('\n');
            s
        }
    }
}

pub fn opt_rat(r: &Option<Rat>) -> Value {
    match r {
        Some(x) => json!(format_rat(x)),
        None => Value::Null,
    }
}

pub fn ops<'a>(it: impl Iterator<Item = &'a DiffOp>) -> Value {
    json!(it.map(|q| q.to_string()).collect::<Vec<_>>())
}

/// The monomial of an exponent, printed as an operator.
fn mark(sig: Signature, e: &Exponent) -> String {
    DiffOp::monomial(sig, e.clone(), Rat::from_integer(1.into())).to_string()
}

pub fn render_basis(b: &MarkedBasis) -> Value {
    let sig = b.signature();
    json!(b.elements().iter().map(|(q, e)| json!({ "element": q.to_string(), "mark": mark(sig, e) })).collect::<Vec<_>>())
}

pub fn basis_lines(b: &MarkedBasis) -> Vec<String> {
    let sig = b.signature();
    b.elements().iter().map(|(q, e)| format!("[{}] {}", mark(sig, e), q)).collect()
}
