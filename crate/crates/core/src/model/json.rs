//! Canonical instance JSON:
//! `{"kind":"sp"|"mst","name":..,"n":..,"edges":[[a,b],..],"scenarios":[[c,..],..],"s":..,"t":..}`.
//! Costs are JSON numbers or `"p/q"` strings; the canonical writer emits
//! integers as numbers and everything else as `"p/q"`.

use serde::Serialize;
use serde_json::{Map, Value};

use super::rational::{format_cost, parse_cost_str, parse_decimal, Cost};
use super::{Instance, Kind};
use crate::error::{Error, Result};

/// Parses and validates an instance from UTF-8 JSON bytes.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("$", format!("invalid UTF-8: {e}")))?;
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::parse("$", format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "expected an object"))?;

    let kind_tag = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse("kind", "missing or not a string"))?;
    let name = match obj.get("name") {
        None => String::new(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::parse("name", "not a string"))?
            .to_string(),
    };
    let n = read_index(obj, "n")?.ok_or_else(|| Error::parse("n", "missing"))?;

    let edges_val = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("edges", "missing or not an array"))?;
    let mut edges = Vec::with_capacity(edges_val.len());
    for (i, e) in edges_val.iter().enumerate() {
        let pair = e.as_array().filter(|a| a.len() == 2);
        let pair = pair.ok_or_else(|| Error::parse(format!("edges[{i}]"), "expected [a, b]"))?;
        let mut ends = [0usize; 2];
        for (j, v) in pair.iter().enumerate() {
            ends[j] = v
                .as_u64()
                .ok_or_else(|| Error::parse(format!("edges[{i}][{j}]"), "expected a node index"))?
                as usize;
        }
        edges.push((ends[0], ends[1]));
    }

    let scen_val = obj
        .get("scenarios")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("scenarios", "missing or not an array"))?;
    let mut scenarios = Vec::with_capacity(scen_val.len());
    for (xi, row) in scen_val.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::parse(format!("scenarios[{xi}]"), "expected an array"))?;
        let mut costs = Vec::with_capacity(row.len());
        for (e, v) in row.iter().enumerate() {
            let path = format!("scenarios[{xi}][{e}]");
            let cost = match v {
                Value::Number(num) => parse_decimal(&num.to_string()),
                Value::String(s) => parse_cost_str(s),
                _ => None,
            }
            .ok_or_else(|| Error::parse(path.clone(), "invalid cost"))?;
            costs.push(cost);
        }
        scenarios.push(costs);
    }

    let s = read_index(obj, "s")?;
    let t = read_index(obj, "t")?;
    let kind = match kind_tag {
        "sp" => Kind::ShortestPath {
            source: s.ok_or_else(|| Error::parse("s", "required for kind \"sp\""))?,
            target: t.ok_or_else(|| Error::parse("t", "required for kind \"sp\""))?,
        },
        "mst" => {
            if s.is_some() || t.is_some() {
                return Err(Error::parse("s", "terminals not allowed for kind \"mst\""));
            }
            Kind::SpanningTree
        }
        other => return Err(Error::parse("kind", format!("unknown kind {other:?}"))),
    };
    Instance::new(name, kind, n, edges, scenarios)
}

fn read_index(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|u| Some(u as usize))
            .ok_or_else(|| Error::parse(key, "expected a nonnegative integer")),
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum CostRepr {
    Int(i64),
    Frac(String),
}

impl From<&Cost> for CostRepr {
    fn from(c: &Cost) -> Self {
        if c.is_integer() {
            CostRepr::Int(*c.numer())
        } else {
            CostRepr::Frac(format_cost(c))
        }
    }
}

#[derive(Serialize)]
struct CanonicalInstance<'a> {
    kind: &'a str,
    name: &'a str,
    n: usize,
    edges: &'a [(usize, usize)],
    scenarios: Vec<Vec<CostRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
}

pub(super) fn to_json(inst: &Instance) -> String {
    let (s, t) = match inst.terminals() {
        Some((s, t)) => (Some(s), Some(t)),
        None => (None, None),
    };
    let canonical = CanonicalInstance {
        kind: inst.kind().tag(),
        name: inst.name(),
        n: inst.num_nodes(),
        edges: inst.edges(),
        scenarios: inst
            .scenarios()
            .iter()
            .map(|row| row.iter().map(CostRepr::from).collect())
            .collect(),
        s,
        t,
    };
    let mut out = serde_json::to_string(&canonical).expect("instance serialization is infallible");
    out.push('\n');
    out
}
