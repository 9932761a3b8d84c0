//! Resolution of the experiment spec from flags plus an optional JSON
//! config file. Flags override file values; every field is validated
//! before any computation starts.

use serde_json::Value;

use rsmooth_core::problems::{parse_problem, Objective};

use crate::CliError;

pub struct ConfigFile {
    map: serde_json::Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&str>) -> Result<Self, CliError> {
        let map = match path {
            None => serde_json::Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("config: cannot read `{p}`: {e}")))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => {
                        return Err(CliError::Usage(format!(
                            "config: `{p}` must contain a JSON object"
                        )))
                    }
                    Err(e) => {
                        return Err(CliError::Usage(format!("config: `{p}` is not valid JSON: {e}")))
                    }
                }
            }
        };
        Ok(Self { map })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(v) => Err(CliError::Usage(format!("config: `{key}` must be a string, got {v}"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(v) => Err(CliError::Usage(format!("config: `{key}` must be a number, got {v}"))),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_u64()
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("config: `{key}` must be a nonnegative integer"))),
            Some(v) => Err(CliError::Usage(format!("config: `{key}` must be a number, got {v}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(v) => Err(CliError::Usage(format!("config: `{key}` must be a boolean, got {v}"))),
        }
    }
}

pub fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required field `{field}`")))
}

/// Parse a comma-separated vector, e.g. `1,0.5,-2`.
pub fn parse_vector(s: &str, field: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| {
                CliError::Usage(format!("field `{field}`: invalid number `{tok}` in `{s}`"))
            })
        })
        .collect()
}

pub fn parse_u64_list(s: &str, field: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<u64>().map_err(|_| {
                CliError::Usage(format!("field `{field}`: invalid integer `{tok}` in `{s}`"))
            })
        })
        .collect()
}

pub fn resolve_problem(desc: &str) -> Result<Objective, CliError> {
    parse_problem(desc).map_err(|e| CliError::Usage(format!("field `problem`: {e}")))
}

pub fn check_point_dim(x: &[f64], dim: usize) -> Result<(), CliError> {
    if x.len() != dim {
        return Err(CliError::Usage(format!(
            "field `x`: expected {dim} coordinates, got {}",
            x.len()
        )));
    }
    for &v in x {
        if !v.is_finite() {
            return Err(CliError::Usage(format!("field `x`: non-finite coordinate {v}")));
        }
    }
    Ok(())
}
