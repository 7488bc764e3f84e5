//! Parsing of command-line JSON inputs.
//!
//! Every JSON argument may be given inline or as `@path`. A bare path to an
//! existing file is accepted too when the text does not look like JSON.

use std::path::Path;

use isoprofile::graphings::{build_heisenberg_quotient, build_torus_action, build_weighted_cycle_over};
use isoprofile::groups::GroupDescriptor;
use isoprofile::{Graphing, MarkedGroup, MultiTile, Rational, Scalar};
use serde_json::Value;

use crate::failure::{Failure, Outcome};

pub fn read_json(what: &str, arg: &str) -> Outcome<Value> {
    let trimmed = arg.trim_start();
    let (text, origin) = if let Some(path) = arg.strip_prefix('@') {
        (read_file(what, path)?, format!("{what} ({path})"))
    } else if !trimmed.starts_with(['{', '[', '"']) && Path::new(arg).is_file() {
        (read_file(what, arg)?, format!("{what} ({arg})"))
    } else {
        (arg.to_string(), what.to_string())
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{origin}: {e}")))
}

fn read_file(what: &str, path: &str) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{what}: cannot read {path}: {e}")))
}

fn schema(what: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{what}: {msg}"))
}

pub fn group(what: &str, v: &Value) -> Outcome<MarkedGroup> {
    let desc: GroupDescriptor = serde_json::from_value(v.clone()).map_err(|e| schema(what, e))?;
    MarkedGroup::from_descriptor(&desc).map_err(|e| schema(what, e))
}

pub fn rational(what: &str, s: &str) -> Outcome<Rational> {
    Rational::parse_scalar(s).map_err(|e| schema(what, e))
}

fn rational_value(what: &str, v: &Value) -> Outcome<Rational> {
    match v {
        Value::String(s) => rational(what, s),
        Value::Number(x) => rational(what, &x.to_string()),
        _ => Err(schema(what, "expected a \"p/q\" string")),
    }
}

pub fn tile(what: &str, group: &MarkedGroup, v: &Value) -> Outcome<MultiTile> {
    MultiTile::from_value(group, v).map_err(|e| schema(what, e))
}

fn field<'a>(what: &str, v: &'a Value, key: &str) -> Outcome<&'a Value> {
    v.get(key).ok_or_else(|| schema(what, format!("missing \"{key}\"")))
}

fn usize_field(what: &str, v: &Value, key: &str) -> Outcome<usize> {
    field(what, v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(what, format!("\"{key}\" must be a nonnegative integer")))
}

/// A full graphing object (with `"vertices"`) or a builder spec:
/// `{"kind":"torus","d":2,"m":8}`, `{"kind":"heisenberg","m":3}` or
/// `{"kind":"cycle","weights":["1/2","1/4","1/4"]}`. Torus and cycle specs
/// take an optional `"group"` with custom generators.
pub fn graphing(what: &str, v: &Value, max_vertices: usize) -> Outcome<Graphing> {
    if v.get("vertices").is_some() {
        let g = Graphing::from_value(v).map_err(|e| schema(what, e))?;
        return within(what, g, max_vertices);
    }
    let kind = field(what, v, "kind")?
        .as_str()
        .ok_or_else(|| schema(what, "\"kind\" must be a string"))?;
    let custom = v.get("group").map(|g| group(&format!("{what}.group"), g)).transpose()?;
    let size_check = |n: Option<usize>| match n {
        Some(n) if n <= max_vertices => Ok(()),
        _ => Err(Failure::Budget(format!("{what}: more than {max_vertices} vertices"))),
    };
    let g = match kind {
        "torus" => {
            let m = usize_field(what, v, "m")?;
            let group = match custom {
                Some(g) => g,
                None => MarkedGroup::zd(usize_field(what, v, "d")?),
            };
            let d = match group.kind() {
                isoprofile::GroupKind::Zd { d } => d,
                k => return Err(schema(what, format!("torus needs ℤ^d, got {k:?}"))),
            };
            size_check(m.checked_pow(d as u32))?;
            build_torus_action(&group, m)
        }
        "heisenberg" => {
            let m = usize_field(what, v, "m")?;
            size_check(m.checked_pow(3))?;
            build_heisenberg_quotient(&MarkedGroup::heisenberg(), m)
        }
        "cycle" => {
            let weights = match v.get("weights") {
                Some(Value::Array(ws)) => ws
                    .iter()
                    .map(|w| rational_value(&format!("{what}.weights"), w))
                    .collect::<Outcome<Vec<_>>>()?,
                Some(_) => return Err(schema(what, "\"weights\" must be an array")),
                None => {
                    let m = usize_field(what, v, "m")?;
                    vec![Rational::from_ratio(1, m.max(1) as i64); m]
                }
            };
            size_check(Some(weights.len()))?;
            let group = custom.unwrap_or_else(|| MarkedGroup::zd(1));
            build_weighted_cycle_over(&group, weights)
        }
        other => return Err(schema(what, format!("unknown kind \"{other}\" (torus, heisenberg, cycle)"))),
    }
    .map_err(|e| schema(what, e))?;
    Ok(g)
}

fn within(what: &str, g: Graphing, max_vertices: usize) -> Outcome<Graphing> {
    if g.num_vertices() > max_vertices {
        return Err(Failure::Budget(format!(
            "{what}: {} vertices exceed the limit {max_vertices}",
            g.num_vertices()
        )));
    }
    Ok(g)
}

/// `"n": 3` or `"n": [1, 2, 3]`.
pub fn n_list(what: &str, v: &Value) -> Outcome<Vec<usize>> {
    match v {
        Value::Number(_) => Ok(vec![usize_value(what, v)?]),
        Value::Array(xs) => xs.iter().map(|x| usize_value(what, x)).collect(),
        _ => Err(schema(what, "\"n\" must be an integer or a list of integers")),
    }
}

fn usize_value(what: &str, v: &Value) -> Outcome<usize> {
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(schema(what, format!("{v} is not a positive integer"))),
    }
}

pub fn rational_field(what: &str, v: &Value, key: &str) -> Outcome<Rational> {
    rational_value(&format!("{what}.{key}"), field(what, v, key)?)
}

pub fn required<'a>(what: &str, v: &'a Value, key: &str) -> Outcome<&'a Value> {
    field(what, v, key)
}
