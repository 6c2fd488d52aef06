//! JSON documents for fans, morphisms and divisors.
//!
//! Integers are written as JSON numbers when they fit in 64 bits and as
//! decimal strings otherwise; rationals are always strings `"p/q"`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{parse_rat, Int, IntMat, IntVec, Rat};
use crate::divisor::ToricDivisor;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::fibration::ToricMorphism;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInt {
    Signed(i64),
    Unsigned(u64),
    Text(String),
}

impl RawInt {
    fn to_int(&self) -> Result<Int> {
        match self {
            RawInt::Signed(n) => Ok(Int::from(*n)),
            RawInt::Unsigned(n) => Ok(Int::from(*n)),
            RawInt::Text(s) => s.trim().parse::<Int>().map_err(|_| parse_error(&format!("bad integer {s:?}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRat {
    Integer(i64),
    Text(String),
}

#[derive(Deserialize)]
struct FanDoc {
    rank: usize,
    rays: Vec<Vec<RawInt>>,
    max_cones: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct MorphismDoc {
    matrix: Vec<Vec<RawInt>>,
    source: FanDoc,
    target: FanDoc,
}

#[derive(Deserialize)]
struct DivisorDoc {
    coeffs: Vec<RawRat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Fan(Fan),
    Morphism(ToricMorphism),
    Divisor(ToricDivisor),
}

fn parse_error(message: &str) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

fn from_serde(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn ints(row: &[RawInt]) -> Result<IntVec> {
    row.iter().map(RawInt::to_int).collect()
}

fn build_fan(doc: FanDoc) -> Result<Fan> {
    let rays = doc.rays.iter().map(|r| ints(r)).collect::<Result<Vec<_>>>()?;
    Fan::new(doc.rank, rays, doc.max_cones)
}

fn build_morphism(doc: MorphismDoc) -> Result<ToricMorphism> {
    let source = build_fan(doc.source)?;
    let target = build_fan(doc.target)?;
    let rows = doc.matrix.iter().map(|r| ints(r)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = rows.iter().find(|r| r.len() != source.rank()) {
        return Err(Error::DimensionMismatch {
            expected: source.rank(),
            found: bad.len(),
        });
    }
    let matrix = IntMat::from_rows(&rows, source.rank())?;
    ToricMorphism::new(matrix, source, target)
}

fn build_divisor(doc: DivisorDoc) -> Result<ToricDivisor> {
    let coeffs = doc
        .coeffs
        .iter()
        .map(|c| match c {
            RawRat::Integer(n) => Ok(Rat::from_integer(Int::from(*n))),
            RawRat::Text(s) => parse_rat(s),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ToricDivisor::new(coeffs))
}

/// Parses a fan, morphism or divisor document. A CLI report is accepted too,
/// in which case its payload is parsed.
pub fn parse_input(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(from_serde)?;
    let Value::Object(map) = &value else {
        return Err(parse_error("expected a JSON object"));
    };
    if map.contains_key("command") {
        if let Some(payload) = map.get("payload") {
            return parse_input(&payload.to_string());
        }
    }
    if map.contains_key("matrix") {
        build_morphism(serde_json::from_str(text).map_err(from_serde)?)
            .map(Document::Morphism)
    } else if map.contains_key("coeffs") {
        build_divisor(serde_json::from_str(text).map_err(from_serde)?).map(Document::Divisor)
    } else if map.contains_key("rays") {
        build_fan(serde_json::from_str(text).map_err(from_serde)?).map(Document::Fan)
    } else {
        Err(parse_error("expected a fan, morphism or divisor document"))
    }
}

pub fn int_value(x: &Int) -> Value {
    match i64::try_from(x) {
        Ok(n) => json!(n),
        Err(_) => json!(x.to_string()),
    }
}

pub fn vec_value(v: &[Int]) -> Value {
    Value::Array(v.iter().map(int_value).collect())
}

pub fn rat_value(r: &Rat) -> Value {
    json!(r.to_string())
}

pub fn rats_value(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_value).collect())
}

pub fn matrix_value(m: &IntMat) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vec_value(r)).collect())
}

pub fn fan_value(fan: &Fan) -> Value {
    json!({
        "rank": fan.rank(),
        "rays": fan.rays().iter().map(|r| vec_value(r)).collect::<Vec<_>>(),
        "max_cones": fan.max_cones(),
    })
}

pub fn morphism_value(f: &ToricMorphism) -> Value {
    json!({
        "matrix": matrix_value(f.matrix()),
        "source": fan_value(f.source()),
        "target": fan_value(f.target()),
    })
}

pub fn divisor_value(d: &ToricDivisor) -> Value {
    json!({ "coeffs": rats_value(d.coeffs()) })
}

pub fn document_value(doc: &Document) -> Value {
    match doc {
        Document::Fan(f) => fan_value(f),
        Document::Morphism(m) => morphism_value(m),
        Document::Divisor(d) => divisor_value(d),
    }
}

/// Serializes any `Serialize` value; used for report payloads.
pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}
