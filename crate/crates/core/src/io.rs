//! JSON file formats and deterministic number output.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::metric::{HorofunctionWindow, MetricInstance, NuMap};
use crate::semiring::{ExtReal, Kernel, MpVector, SemiringError, StateSpace};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error("{0}")]
    Invalid(String),
}

/// Kernel file: `{states, entries: [[i, j, w]]}` plus optional basepoint
/// and truncation flags. Missing entries are `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub states: Vec<String>,
    pub entries: Vec<(String, String, ExtReal)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_states: Vec<String>,
}

impl KernelFile {
    pub fn from_kernel(k: &Kernel) -> Self {
        let st = k.states();
        KernelFile {
            states: st.labels().to_vec(),
            entries: k
                .finite_entries()
                .map(|(i, j, w)| (st.label(i).to_string(), st.label(j).to_string(), w))
                .collect(),
            basepoint: None,
            edge_states: Vec::new(),
        }
    }

    pub fn to_kernel(&self) -> Result<Kernel, IoError> {
        let st = Arc::new(StateSpace::new(self.states.iter().cloned())?);
        Ok(Kernel::from_entries(
            st,
            self.entries.iter().map(|(i, j, w)| (i.as_str(), j.as_str(), *w)),
        )?)
    }

    /// Truncation flags indexed like `states`.
    pub fn edge_mask(&self, states: &StateSpace) -> Result<Vec<bool>, IoError> {
        let mut mask = vec![false; states.len()];
        for l in &self.edge_states {
            mask[states.resolve(l)?] = true;
        }
        Ok(mask)
    }
}

/// Vector file: label → value; absent labels are `-inf`.
pub type VectorFile = BTreeMap<String, ExtReal>;

pub fn vector_to_file(states: &StateSpace, v: &MpVector) -> VectorFile {
    v.iter()
        .enumerate()
        .map(|(i, x)| (states.label(i).to_string(), x))
        .collect()
}

pub fn vector_from_file(states: &StateSpace, f: &VectorFile) -> Result<MpVector, IoError> {
    let mut v = vec![ExtReal::NEG_INF; states.len()];
    for (l, &x) in f {
        v[states.resolve(l)?] = x;
    }
    Ok(MpVector::new(v))
}

/// A real with `+inf` and `-inf` written as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonReal(pub f64);

impl Serialize for JsonReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("+inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for JsonReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(JsonReal(v)),
            Raw::Str(s) if s == "+inf" || s == "inf" => Ok(JsonReal(f64::INFINITY)),
            Raw::Str(s) if s == "-inf" => Ok(JsonReal(f64::NEG_INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("not a number: \"{s}\""))),
        }
    }
}

pub fn nu_to_file(nu: &NuMap) -> BTreeMap<String, JsonReal> {
    nu.iter().map(|(k, &v)| (k.clone(), JsonReal(v))).collect()
}

pub fn nu_from_file(f: &BTreeMap<String, JsonReal>) -> NuMap {
    f.iter().map(|(k, v)| (k.clone(), v.0)).collect()
}

/// Horofunctions tabulated on a shared window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorofamilyFile {
    pub window: Vec<String>,
    pub points: BTreeMap<String, HoropointFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoropointFile {
    pub h: Vec<f64>,
    #[serde(default)]
    pub source_sequence: Vec<String>,
}

impl HorofamilyFile {
    pub fn from_windows(m: &MetricInstance, family: &[HorofunctionWindow]) -> Self {
        let st = m.states();
        let labels = |v: &[usize]| v.iter().map(|&s| st.label(s).to_string()).collect::<Vec<_>>();
        HorofamilyFile {
            window: family.first().map(|p| labels(&p.window)).unwrap_or_default(),
            points: family
                .iter()
                .map(|p| {
                    let h = p.h.iter().map(|v| v.value()).collect();
                    (p.name.clone(), HoropointFile { h, source_sequence: labels(&p.source_sequence) })
                })
                .collect(),
        }
    }

    pub fn resolve(&self, m: &MetricInstance) -> Result<Vec<HorofunctionWindow>, IoError> {
        let st = m.states();
        let resolve = |v: &[String]| v.iter().map(|l| st.resolve(l)).collect::<Result<Vec<_>, _>>();
        let window = resolve(&self.window)?;
        self.points
            .iter()
            .map(|(name, p)| {
                if p.h.len() != window.len() {
                    return Err(IoError::Invalid(format!("`{name}` has {} values", p.h.len())));
                }
                if p.h.iter().any(|v| !v.is_finite()) {
                    return Err(IoError::Invalid(format!("`{name}` is not finite")));
                }
                Ok(HorofunctionWindow {
                    name: name.clone(),
                    window: window.clone(),
                    h: MpVector::from_reals(&p.h),
                    source_sequence: resolve(&p.source_sequence)?,
                })
            })
            .collect()
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap()
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and rounded numbers.
pub fn to_stable_json<T: Serialize>(x: &T) -> Result<String, IoError> {
    let mut v = serde_json::to_value(x)?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(-0.0), 0.0);
        assert_eq!(round12(2.0), 2.0);
        let mut v = serde_json::json!({"b": [0.1 + 0.2], "a": 1});
        round_json(&mut v);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":1,"b":[0.3]}"#);
    }

    #[test]
    fn kernel_round_trip() {
        let text = r#"{"states": ["1", "2"], "entries": [["1", "2", -1.0], ["2", "1", "-inf"]]}"#;
        let f: KernelFile = serde_json::from_str(text).unwrap();
        let k = f.to_kernel().unwrap();
        assert_eq!(k.get(0, 1).value(), -1.0);
        assert!(k.get(1, 0).is_neg_inf());
        let back = KernelFile::from_kernel(&k);
        assert_eq!(back.entries.len(), 1);
    }

    #[test]
    fn nu_infinities() {
        let nu = NuMap::from([("a".to_string(), 1.5), ("b".to_string(), f64::INFINITY)]);
        let text = serde_json::to_string(&nu_to_file(&nu)).unwrap();
        assert_eq!(text, r#"{"a":1.5,"b":"+inf"}"#);
        let back: BTreeMap<String, JsonReal> = serde_json::from_str(&text).unwrap();
        assert_eq!(nu_from_file(&back), nu);
    }

    #[test]
    fn sparse_vectors() {
        let st = StateSpace::new(["x", "y"]).unwrap();
        let f = VectorFile::from([("y".to_string(), ExtReal::real(2.0))]);
        let v = vector_from_file(&st, &f).unwrap();
        assert!(v.get(0).is_neg_inf());
        assert_eq!(vector_to_file(&st, &v).len(), 2);
    }
}
