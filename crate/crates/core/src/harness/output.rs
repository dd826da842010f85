//! JSON with 17 significant digits and CSV with 6.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{BanditError, Result};
use crate::trace::EpisodeTrace;

/// Pretty JSON in which every float keeps 17 significant digits
/// (`1.2345678901234567e3`). Non-finite floats become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| BanditError::Config(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn indent(out: &mut String, depth: usize) {
    out.extend(std::iter::repeat_n("  ", depth));
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64_json(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // short numeric rows stay on one line
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

pub fn fmt_f64_json(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// `%g`-style rendering with 6 significant digits.
pub fn fmt_f64_csv(x: f64) -> String {
    const DIGITS: i32 = 6;
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // the exponent after rounding, e.g. 999999.5 -> 1e6
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One line per credited round plus the terminating round (marked
/// `credited = 0`).
pub fn trace_csv(trace: &EpisodeTrace) -> String {
    let mut out = String::from("round,arms,reward,cost,remaining_budget,credited\n");
    for (t, rec) in trace.rounds.iter().enumerate() {
        let arms: Vec<String> = rec.outcome.arms.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},1",
            t + 1,
            arms.join(" "),
            fmt_f64_csv(rec.outcome.reward_sum()),
            fmt_f64_csv(rec.outcome.cost_sum()),
            fmt_f64_csv(rec.remaining_budget),
        );
    }
    if let Some(term) = &trace.terminal {
        let arms: Vec<String> = term.arms.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},0",
            trace.rounds.len() + 1,
            arms.join(" "),
            fmt_f64_csv(term.reward_sum()),
            fmt_f64_csv(term.cost_sum()),
            fmt_f64_csv(trace.remaining_budget()),
        );
    }
    out
}
