//! Text and JSON rendering shared by the subcommands.

use alphaquota::{Committee, Rational, Violation};
use serde_json::{json, Value};

/// `p/q (x)` with at most six decimals.
pub fn alpha(r: &Rational) -> String {
    format!("{r} ({})", float(r))
}

pub fn float(r: &Rational) -> String {
    let s = format!("{:.6}", r.to_f64());
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn indices(items: impl IntoIterator<Item = usize>, one_indexed: bool) -> String {
    let shift = usize::from(one_indexed);
    items.into_iter().map(|i| (i + shift).to_string()).collect::<Vec<_>>().join(",")
}

pub fn committee(w: Committee, one_indexed: bool) -> String {
    indices(w.to_vec(), one_indexed)
}

pub fn witness(v: &Violation, one_indexed: bool) -> String {
    format!(
        "voters {}; candidates {}; level {}",
        indices(v.voters.iter().copied(), one_indexed),
        indices(v.candidates.iter().copied(), one_indexed),
        v.level
    )
}

/// Exact value with its float rendering.
pub fn alpha_json(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "float": r.to_f64() })
}

pub fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}
