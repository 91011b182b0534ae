//! Text and structured renderings of an analysis result.
//!
//! Output only depends on the result: methods, lines and statements are
//! emitted in sorted order.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::domain::AbstractState;
use crate::semantics::AnalysisResult;

fn inline(st: &AbstractState) -> String {
    if st.is_bottom() {
        "none".to_string()
    } else {
        st.lines().join(", ")
    }
}

/// One `== m @ line L ==` block per line holding an atomic command, then
/// one `== m summary ==` block per tabulated input.
pub fn render_text(r: &AnalysisResult) -> String {
    let mut s = String::new();
    for m in r.analyzed_methods() {
        for (line, st) in r.lines(&m) {
            writeln!(s, "== {m} @ line {line} ==").unwrap();
            s.push_str(&st.render_text());
        }
    }
    for ((m, input), out) in &r.summaries {
        writeln!(s, "== {m} summary ==").unwrap();
        writeln!(s, "input: {}", inline(input)).unwrap();
        s.push_str(&out.render_text());
    }
    s
}

pub fn render_json(r: &AnalysisResult) -> Value {
    let methods: Vec<Value> = r
        .analyzed_methods()
        .into_iter()
        .map(|m| {
            let points: Vec<Value> = r
                .lines(&m)
                .into_iter()
                .map(|(line, st)| {
                    let mut v = st.to_json();
                    v["line"] = json!(line);
                    v
                })
                .collect();
            let summaries: Vec<Value> = r
                .summaries
                .iter()
                .filter(|((s, _), _)| *s == m)
                .map(|((_, i), o)| json!({ "input": i.to_json(), "output": o.to_json() }))
                .collect();
            json!({ "method": m, "points": points, "summaries": summaries })
        })
        .collect();
    json!({ "rounds": r.rounds, "methods": methods })
}
