//! JSON instance format.
//!
//! ```json
//! {
//!   "lambda": 1.0,
//!   "bidders": ["1", "2"],
//!   "items": [
//!     {"values": {"1": {"beta": [7, 14]}, "2": {"beta": [14, 7, 1.0]}}},
//!     {"values": {"1": {"fixed": 2.0}}, "reserve": 1.5, "tie_break": {"disfavor": "1"}, "copies": 3}
//!   ],
//!   "limits": {"1": [1.2, 3.0]}
//! }
//! ```
//!
//! `reserve` defaults to 0, `tie_break` to `"uniform"`, `copies` to 1 and
//! `lambda` to 1. A value may also be written as the string `"zero"`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ItemSpec, MarketInstance, MultiplierLimits, TieBreak, ValueSpec};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(default = "one")]
    lambda: f64,
    bidders: Vec<String>,
    #[serde(default)]
    items: Vec<ItemDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    limits: BTreeMap<String, [f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    values: BTreeMap<String, ValueDoc>,
    #[serde(default)]
    reserve: f64,
    #[serde(default)]
    tie_break: TieDoc,
    #[serde(default = "one")]
    copies: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ValueDoc {
    Zero,
    Fixed(f64),
    Beta(Vec<f64>),
}

#[derive(Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum TieDoc {
    #[default]
    Uniform,
    Favor(String),
    Disfavor(String),
}

fn one() -> f64 {
    1.0
}

fn beta_param(x: f64, what: &str, item: usize) -> Result<u32> {
    if x.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&x) {
        return Err(Error::Parse(format!(
            "items[{item}]: beta parameter {what} must be an integer >= 1, got {x}"
        )));
    }
    Ok(x as u32)
}

impl ValueDoc {
    fn to_spec(&self, item: usize) -> Result<ValueSpec> {
        Ok(match self {
            ValueDoc::Zero => ValueSpec::Zero,
            ValueDoc::Fixed(v) => ValueSpec::Fixed(*v),
            ValueDoc::Beta(p) => {
                if !(2..=3).contains(&p.len()) {
                    return Err(Error::Parse(format!(
                        "items[{item}]: beta expects [a, b] or [a, b, scale], got {} numbers",
                        p.len()
                    )));
                }
                ValueSpec::Beta {
                    a: beta_param(p[0], "a", item)?,
                    b: beta_param(p[1], "b", item)?,
                    scale: p.get(2).copied().unwrap_or(1.0),
                }
            }
        })
    }

    fn from_spec(spec: &ValueSpec) -> Self {
        match *spec {
            ValueSpec::Zero => ValueDoc::Zero,
            ValueSpec::Fixed(v) => ValueDoc::Fixed(v),
            ValueSpec::Beta { a, b, scale } => {
                ValueDoc::Beta(vec![f64::from(a), f64::from(b), scale])
            }
        }
    }
}

/// Parses an instance from JSON text and validates it.
pub fn parse_instance(text: &str) -> Result<MarketInstance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let lookup = |name: &str, ctx: &str| {
        doc.bidders
            .iter()
            .position(|b| b == name)
            .ok_or_else(|| Error::InvalidInstance(format!("{ctx} references unknown bidder '{name}'")))
    };

    let mut items = Vec::with_capacity(doc.items.len());
    for (j, it) in doc.items.iter().enumerate() {
        let ctx = format!("item {j}");
        let mut values = BTreeMap::new();
        for (name, v) in &it.values {
            values.insert(lookup(name, &ctx)?, v.to_spec(j)?);
        }
        let tie_break = match &it.tie_break {
            TieDoc::Uniform => TieBreak::UniformSplit,
            TieDoc::Favor(n) => TieBreak::Favor(lookup(n, &ctx)?),
            TieDoc::Disfavor(n) => TieBreak::Disfavor(lookup(n, &ctx)?),
        };
        items.push(ItemSpec {
            values,
            reserve: it.reserve,
            tie_break,
            copies: it.copies,
        });
    }
    let mut limits = BTreeMap::new();
    for (name, [floor, ceiling]) in &doc.limits {
        limits.insert(
            lookup(name, "limits")?,
            MultiplierLimits {
                floor: *floor,
                ceiling: *ceiling,
            },
        );
    }

    let inst = MarketInstance {
        bidders: doc.bidders.clone(),
        items,
        lambda: doc.lambda,
        limits,
    };
    inst.ensure_valid()?;
    Ok(inst)
}

pub fn to_json(inst: &MarketInstance) -> String {
    let name = |b: usize| inst.bidders[b].clone();
    let doc = InstanceDoc {
        lambda: inst.lambda,
        bidders: inst.bidders.clone(),
        items: inst
            .items
            .iter()
            .map(|it| ItemDoc {
                values: it
                    .values
                    .iter()
                    .map(|(&b, v)| (name(b), ValueDoc::from_spec(v)))
                    .collect(),
                reserve: it.reserve,
                tie_break: match it.tie_break {
                    TieBreak::UniformSplit => TieDoc::Uniform,
                    TieBreak::Favor(b) => TieDoc::Favor(name(b)),
                    TieBreak::Disfavor(b) => TieDoc::Disfavor(name(b)),
                },
                copies: it.copies,
            })
            .collect(),
        limits: inst
            .limits
            .iter()
            .map(|(&b, l)| (name(b), [l.floor, l.ceiling]))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<MarketInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::InvalidInstance(msg) => Error::InvalidInstance(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_instance(inst: &MarketInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json(inst);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let inst = parse_instance(r#"{"bidders": ["x"], "items": [{"values": {"x": {"beta": [2, 1]}}}]}"#)
            .unwrap();
        assert_eq!(inst.lambda, 1.0);
        let it = &inst.items[0];
        assert_eq!(it.reserve, 0.0);
        assert_eq!(it.copies, 1.0);
        assert_eq!(it.tie_break, TieBreak::UniformSplit);
        assert_eq!(it.values[&0], ValueSpec::Beta { a: 2, b: 1, scale: 1.0 });
    }

    #[test]
    fn zero_value_as_string() {
        let inst = parse_instance(
            r#"{"bidders": ["x", "y"], "items": [{"values": {"x": {"fixed": 1}, "y": "zero"}}]}"#,
        )
        .unwrap();
        assert_eq!(inst.items[0].values[&1], ValueSpec::Zero);
    }

    #[test]
    fn lambda_out_of_range() {
        let err = parse_instance(r#"{"lambda": 1.5, "bidders": ["x"]}"#).unwrap_err();
        assert!(err.to_string().contains("lambda out of [0,1]"), "{err}");
    }

    #[test]
    fn unknown_bidder_names_the_item() {
        let err = parse_instance(
            r#"{"bidders": ["x"], "items": [{"values": {"x": {"fixed": 1}}}, {"values": {"q": {"fixed": 1}}}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("item 1") && msg.contains("'q'"), "{msg}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = parse_instance(r#"{"bidders": [], "colour": 3}"#).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = parse_instance(r#"{"bidders": ["x"], "items": [{"values": {"x": {"fixed": 1}}, "reserv": 2}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("reserv"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_instance("{\n  \"bidders\": [\"x\",\n  ]\n}").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn non_integer_beta_rejected() {
        let err = parse_instance(r#"{"bidders": ["x"], "items": [{"values": {"x": {"beta": [2.5, 1]}}}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("integer"), "{err}");
    }
}
