//! JSON function specifications.
//!
//! ```json
//! {"p": 3, "level": 2, "repr": "values",  "values": [[1.0, 0.0], ...]}
//! {"p": 3, "level": 2, "repr": "fourier", "fourier": [{"a": "1/3", "c": [1.0, 0.0]}]}
//! {"p": 3, "level": 2, "builtin": "log_norm", "params": {}}
//! ```
//!
//! Complex numbers are always `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::{fourier_forward, fourier_inverse, BuiltinFunction, FourierSpectrum, LocallyConstantFn};
use crate::error::{PqcError, Result};
use crate::padic::{Prime, PruferElement};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Values(Vec<Complex64>),
    Fourier(Vec<(PruferElement, Complex64)>),
    Builtin(BuiltinFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub p: Prime,
    pub level: u32,
    pub source: FunctionSource,
}

pub(crate) fn parse_complex(v: &Value) -> Result<Complex64> {
    let bad = || PqcError::InvalidSpec(format!("expected [re, im], got {v}"));
    let arr = v.as_array().ok_or_else(bad)?;
    if arr.len() != 2 {
        return Err(bad());
    }
    let re = arr[0].as_f64().ok_or_else(bad)?;
    let im = arr[1].as_f64().ok_or_else(bad)?;
    Ok(Complex64::new(re, im))
}

pub(crate) fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// Splits on commas that are not inside brackets, so `c=[1,2]` stays whole.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl FunctionSpec {
    pub fn builtin(p: Prime, level: u32, f: BuiltinFunction) -> Self {
        FunctionSpec { p, level, source: FunctionSource::Builtin(f) }
    }

    pub fn from_function(f: &LocallyConstantFn) -> Self {
        FunctionSpec { p: f.prime(), level: f.level(), source: FunctionSource::Values(f.values().to_vec()) }
    }

    /// Parses a spec object. `p` and `level` may be omitted when defaults are given.
    pub fn from_value(v: &Value, default_p: Option<Prime>, default_level: Option<u32>) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| PqcError::InvalidSpec("spec must be an object".into()))?;
        let p = match obj.get("p") {
            Some(x) => Prime::new(x.as_u64().ok_or_else(|| PqcError::InvalidSpec("p must be an integer".into()))?)?,
            None => default_p.ok_or_else(|| PqcError::InvalidSpec("missing p".into()))?,
        };
        let level = match obj.get("level") {
            Some(x) => x
                .as_u64()
                .and_then(|l| u32::try_from(l).ok())
                .ok_or_else(|| PqcError::InvalidSpec("level must be a small integer".into()))?,
            None => default_level.ok_or_else(|| PqcError::InvalidSpec("missing level".into()))?,
        };
        p.check_level(level)?;

        if let Some(kind) = obj.get("builtin") {
            let kind = kind.as_str().ok_or_else(|| PqcError::InvalidSpec("builtin must be a string".into()))?;
            let empty = Map::new();
            let params = match obj.get("params") {
                None => &empty,
                Some(v) => v.as_object().ok_or_else(|| PqcError::InvalidSpec("params must be an object".into()))?,
            };
            let f = BuiltinFunction::from_kind_params(kind, params, p)?;
            return Ok(Self::builtin(p, level, f));
        }

        let repr = obj.get("repr").and_then(Value::as_str);
        let source = match (repr, obj.get("values"), obj.get("fourier")) {
            (Some("values") | None, Some(vals), _) => {
                let vals = vals.as_array().ok_or_else(|| PqcError::InvalidSpec("values must be an array".into()))?;
                let values = vals.iter().map(parse_complex).collect::<Result<Vec<_>>>()?;
                let expected = p.dim(level);
                if values.len() != expected {
                    return Err(PqcError::LengthMismatch { len: values.len(), expected });
                }
                FunctionSource::Values(values)
            }
            (Some("fourier") | None, _, Some(entries)) => {
                let entries =
                    entries.as_array().ok_or_else(|| PqcError::InvalidSpec("fourier must be an array".into()))?;
                let mut out = Vec::with_capacity(entries.len());
                for e in entries {
                    let a = e
                        .get("a")
                        .and_then(Value::as_str)
                        .ok_or_else(|| PqcError::InvalidSpec("fourier entry needs \"a\"".into()))?;
                    let a = PruferElement::parse(a, p)?;
                    if a.level() > level {
                        return Err(PqcError::NormExceedsLevel { norm: a.norm(), level });
                    }
                    let c = parse_complex(e.get("c").unwrap_or(&Value::Null))?;
                    out.push((a, c));
                }
                FunctionSource::Fourier(out)
            }
            _ => return Err(PqcError::InvalidSpec("need one of values, fourier or builtin".into())),
        };
        Ok(FunctionSpec { p, level, source })
    }

    pub fn from_json_str(s: &str, default_p: Option<Prime>, default_level: Option<u32>) -> Result<Self> {
        Self::from_value(&serde_json::from_str(s)?, default_p, default_level)
    }

    pub fn from_file(path: &Path, default_p: Option<Prime>, default_level: Option<u32>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, default_p, default_level)
    }

    /// Parses a command-line function argument: `builtin:kind[:k=v,...]`,
    /// inline JSON (starting with `{`), or a path to a JSON file.
    pub fn from_cli_arg(arg: &str, p: Prime, level: u32) -> Result<Self> {
        if let Some(rest) = arg.strip_prefix("builtin:") {
            let (kind, params) = rest.split_once(':').unwrap_or((rest, ""));
            let mut map = Map::new();
            for kv in split_top_level(params).into_iter().filter(|s| !s.trim().is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| PqcError::InvalidSpec(format!("expected key=value, got {kv:?}")))?;
                let v = v.trim();
                let value = serde_json::from_str::<Value>(v)
                    .ok()
                    .filter(|x| x.is_number() || x.is_array())
                    .unwrap_or_else(|| Value::String(v.to_string()));
                map.insert(k.trim().to_string(), value);
            }
            let f = BuiltinFunction::from_kind_params(kind.trim(), &map, p)?;
            return Ok(Self::builtin(p, level, f));
        }
        if arg.trim_start().starts_with('{') {
            return Self::from_json_str(arg, Some(p), Some(level));
        }
        Self::from_file(Path::new(arg), Some(p), Some(level))
    }

    pub fn to_value(&self) -> Value {
        let mut obj = json!({ "p": self.p.get(), "level": self.level });
        let map = obj.as_object_mut().expect("object literal");
        match &self.source {
            FunctionSource::Values(vals) => {
                map.insert("repr".into(), json!("values"));
                map.insert("values".into(), Value::Array(vals.iter().copied().map(complex_json).collect()));
            }
            FunctionSource::Fourier(entries) => {
                map.insert("repr".into(), json!("fourier"));
                let arr = entries.iter().map(|(a, c)| json!({ "a": a.to_string(), "c": [c.re, c.im] })).collect();
                map.insert("fourier".into(), Value::Array(arr));
            }
            FunctionSource::Builtin(b) => {
                map.insert("builtin".into(), json!(b.kind()));
                map.insert("params".into(), b.params_json());
            }
        }
        obj
    }

    pub fn realize(&self) -> Result<LocallyConstantFn> {
        match &self.source {
            FunctionSource::Values(vals) => LocallyConstantFn::new(self.p, self.level, vals.clone()),
            FunctionSource::Fourier(_) => Ok(fourier_inverse(&self.spectrum()?)),
            FunctionSource::Builtin(b) => b.realize(self.p, self.level),
        }
    }

    /// Fourier coefficients; taken verbatim for Fourier-repr specs.
    pub fn spectrum(&self) -> Result<FourierSpectrum> {
        match &self.source {
            FunctionSource::Fourier(entries) => {
                FourierSpectrum::from_entries(self.p, self.level, entries.iter().copied())
            }
            FunctionSource::Builtin(BuiltinFunction::Character(a)) => {
                FourierSpectrum::character(*a).promote(self.level)
            }
            FunctionSource::Builtin(BuiltinFunction::Constant(c)) => {
                FourierSpectrum::from_entries(self.p, self.level, [(PruferElement::zero(self.p), *c)])
            }
            FunctionSource::Builtin(BuiltinFunction::RandomSpectrum { seed, gamma }) => {
                Ok(super::builtin::random_spectrum(self.p, self.level, *seed, *gamma))
            }
            _ => Ok(fourier_forward(&self.realize()?)),
        }
    }

    /// Coefficients known exactly (not produced by a floating transform).
    pub fn exact_coefficients(&self) -> Option<Vec<(PruferElement, Complex64)>> {
        match &self.source {
            FunctionSource::Fourier(entries) => Some(entries.clone()),
            FunctionSource::Builtin(BuiltinFunction::Character(a)) => Some(vec![(*a, Complex64::new(1.0, 0.0))]),
            FunctionSource::Builtin(BuiltinFunction::Constant(c)) => Some(vec![(PruferElement::zero(self.p), *c)]),
            _ => None,
        }
    }
}
