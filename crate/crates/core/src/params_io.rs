//! JSON parameter files and symbol files.
//!
//! A parameter file is `{"pi": {"0": w0, "1": w1}, "mk": [...], "nk": [...]}`
//! with an optional `"repeat"`: the listed pairs are one period and the
//! sequence is that period taken `repeat` times. Integers may be JSON numbers
//! or decimal strings. A factor-data file is `{"words": [...]}`.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::sadic::SadicParams;
use crate::substitution::{Substitution, TauParams};
use crate::word::{format_symbols, parse_symbols, Word};

#[derive(Clone, Debug)]
pub enum Source {
    Sadic(SadicParams),
    Factors(Vec<Word>),
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    pi: BTreeMap<String, String>,
    mk: Vec<Value>,
    nk: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    repeat: Option<u64>,
}

#[derive(Deserialize)]
struct FactorsFile {
    words: Vec<String>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn big(v: &Value) -> Result<BigUint> {
    match v {
        Value::Number(n) => n.as_u64().map(BigUint::from).ok_or_else(|| invalid(format!("{n} is not a non-negative integer"))),
        Value::String(s) => s.trim().parse().map_err(|_| invalid(format!("{s:?} is not a non-negative integer"))),
        other => Err(invalid(format!("expected an integer, got {other}"))),
    }
}

fn big_value(x: &BigUint) -> Value {
    match u64::try_from(x) {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(x.to_string()),
    }
}

fn word(s: &str) -> Result<Word> {
    Word::new(parse_symbols(s)?)
}

fn params_from(file: ParamsFile) -> Result<SadicParams> {
    let images = ["0", "1"]
        .iter()
        .map(|k| file.pi.get(*k).ok_or_else(|| invalid(format!("pi has no image for {k}"))).and_then(|s| word(s)))
        .collect::<Result<Vec<_>>>()?;
    if file.pi.len() != 2 {
        return Err(invalid("pi must have exactly the keys \"0\" and \"1\""));
    }
    if file.mk.len() != file.nk.len() {
        return Err(invalid(format!("mk has {} entries, nk has {}", file.mk.len(), file.nk.len())));
    }
    let period = file.mk.iter().zip(&file.nk).map(|(m, n)| TauParams::big(big(m)?, big(n)?)).collect::<Result<Vec<_>>>()?;
    let repeat = file.repeat.unwrap_or(1);
    if repeat == 0 || period.is_empty() {
        return Err(invalid("the parameter sequence is empty"));
    }
    let total = period.len() as u64 * repeat;
    if total > 1 << 20 {
        return Err(invalid(format!("{total} levels is more than the supported 2^20")));
    }
    let levels = period.iter().cycle().take(total as usize).cloned().collect();
    SadicParams::new(Substitution::new(images)?, levels)
}

pub fn parse_source(text: &str) -> Result<Source> {
    let v: Value = serde_json::from_str(text).map_err(|e| invalid(format!("not valid JSON: {e}")))?;
    if v.get("words").is_some() {
        let f: FactorsFile = serde_json::from_value(v).map_err(|e| invalid(e.to_string()))?;
        let words = f.words.iter().map(|s| word(s)).collect::<Result<Vec<_>>>()?;
        if words.is_empty() {
            return Err(invalid("factor data has no words"));
        }
        return Ok(Source::Factors(words));
    }
    let f: ParamsFile = serde_json::from_value(v).map_err(|e| invalid(e.to_string()))?;
    params_from(f).map(Source::Sadic)
}

pub fn parse_params(text: &str) -> Result<SadicParams> {
    match parse_source(text)? {
        Source::Sadic(p) => Ok(p),
        Source::Factors(_) => Err(invalid("expected S-adic parameters, found factor data")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn load_source(path: &Path) -> Result<Source> {
    parse_source(&read(path)?)
}

pub fn load_params(path: &Path) -> Result<SadicParams> {
    parse_params(&read(path)?)
}

/// Writes every level explicitly, without `repeat`.
pub fn params_to_json(p: &SadicParams) -> Value {
    let pi = p.pi().images().iter().enumerate().map(|(i, w)| (i.to_string(), format_symbols(w))).collect();
    let file = ParamsFile {
        pi,
        mk: p.levels().iter().map(|t| big_value(&t.m)).collect(),
        nk: p.levels().iter().map(|t| big_value(&t.n)).collect(),
        repeat: None,
    };
    serde_json::to_value(file).expect("plain data")
}

pub fn load_symbols(path: &Path) -> Result<Vec<u8>> {
    let text = read(path)?;
    if text.trim().contains(char::is_whitespace) {
        return Err(invalid("symbol files must not contain whitespace inside the data"));
    }
    parse_symbols(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn repeat_and_strings() {
        let p = parse_params(r#"{"pi": {"0": "0", "1": "1"}, "mk": [1], "nk": ["2"], "repeat": 30}"#).unwrap();
        assert_eq!(p.levels(), fixtures::fibonacci(30).levels());
        let huge = parse_params(
            r#"{"pi": {"0": "0", "1": "1"}, "mk": ["100000000000000000000000"], "nk": ["200000000000000000000000"]}"#,
        )
        .unwrap();
        assert_eq!(huge.m(1).to_string(), "100000000000000000000000");
        let back = params_to_json(&huge);
        assert_eq!(back["mk"][0], Value::from("100000000000000000000000"));
    }

    #[test]
    fn round_trip() {
        let p = fixtures::mixed(14);
        let text = params_to_json(&p).to_string();
        let q = parse_params(&text).unwrap();
        assert_eq!(q.levels(), p.levels());
        assert_eq!(q.pi(), p.pi());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "{",
            r#"{"pi": {"0": "0"}, "mk": [1], "nk": [2]}"#,
            r#"{"pi": {"0": "0", "1": "1"}, "mk": [1, 2], "nk": [2]}"#,
            r#"{"pi": {"0": "0", "1": "1"}, "mk": [-1], "nk": [2]}"#,
            r#"{"pi": {"0": "0", "1": "1"}, "mk": [], "nk": []}"#,
            r#"{"pi": {"0": "0", "1": "1"}, "mk": [1], "nk": [2], "repeat": 0}"#,
            r#"{"words": []}"#,
        ] {
            assert!(parse_source(bad).is_err(), "{bad}");
        }
        assert!(matches!(parse_source(r#"{"words": ["0100", "0010"]}"#), Ok(Source::Factors(w)) if w.len() == 2));
    }
}
