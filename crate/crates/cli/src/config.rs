//! Flat key-value run configuration read from TOML. Nested tables and dotted
//! keys both flatten to dotted names; every name must be registered below.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use serde::Serialize;

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<f64>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "a boolean",
            Value::Int(_) => "an integer",
            Value::Float(_) => "a number",
            Value::Text(_) => "a string",
            Value::List(_) => "a list of numbers",
        }
    }
}

fn f(x: f64) -> Value {
    Value::Float(x)
}

fn i(x: i64) -> Value {
    Value::Int(x)
}

fn b(x: bool) -> Value {
    Value::Bool(x)
}

fn s(x: &str) -> Value {
    Value::Text(x.to_string())
}

fn l(x: &[f64]) -> Value {
    Value::List(x.to_vec())
}

/// Every accepted key with its default.
fn registry() -> Vec<(&'static str, Value)> {
    vec![
        ("alpha", f(0.5)),
        ("n", i(9)),
        ("c_m", f(1.0)),
        ("period", f(TAU)),
        ("run.workers", i(0)),
        // distance field
        ("grid.r_max", f(3.0)),
        ("grid.v_max", f(3.0)),
        ("grid.nr", i(49)),
        ("grid.nv", i(97)),
        ("grid.grading", f(1.0)),
        ("grid.stencil_radius", i(2)),
        ("grid.tolerance", f(0.1)),
        ("geodesic.source", l(&[1.0, 0.0])),
        ("geodesic.dilation.r_max", f(9.0)),
        ("geodesic.dilation.v_max", f(9.0)),
        ("geodesic.dilation.nr", i(361)),
        ("geodesic.dilation.nv", i(721)),
        ("geodesic.dilation.stencil_radius", i(6)),
        ("geodesic.dilation.pairs", i(12)),
        ("geodesic.dilation.lambdas", l(&[0.5, 2.0])),
        ("geodesic.dilation.pair_r", l(&[0.5, 2.0])),
        ("geodesic.dilation.pair_v", l(&[-0.5, 0.5])),
        ("geodesic.dilation.min_separation", f(0.3)),
        ("geodesic.dilation.tolerance", f(0.02)),
        ("geodesic.boundary.nr", i(33)),
        ("geodesic.boundary.nv", i(33)),
        ("geodesic.boundary.grading", f(1.05)),
        ("geodesic.boundary.stencil_radius", i(8)),
        ("geodesic.boundary.levels", i(4)),
        ("geodesic.snowflake.v", l(&[0.25, 0.5, 1.0, 2.0, 4.0])),
        ("geodesic.snowflake.nr", i(129)),
        ("geodesic.snowflake.nv", i(257)),
        ("geodesic.snowflake.grading", f(1.05)),
        ("geodesic.snowflake.stencil_radius", i(8)),
        ("geodesic.snowflake.tolerance", f(0.01)),
        // volumes
        ("volumes.tau_min", f(0.01)),
        ("volumes.tau_max", f(10.0)),
        ("volumes.tau_count", i(13)),
        ("volumes.nodes", i(129)),
        ("volumes.stencil_radius", i(8)),
        ("volumes.samples", i(50)),
        ("volumes.sample_r", l(&[1.0, 10.0])),
        ("volumes.sample_s_fraction", l(&[0.02, 0.5])),
        ("volumes.asymptote_tau", l(&[0.05, 0.02, 0.01])),
        ("volumes.asymptote_tolerance", f(0.05)),
        // spectrum
        ("spectrum.space", s("ybar")),
        ("spectrum.period", f(0.0)),
        ("spectrum.truncation", f(0.0)),
        ("spectrum.lambda_max", f(60.0)),
        ("spectrum.grid.cells", i(0)),
        ("spectrum.grid.points_per_wavelength", f(12.0)),
        ("spectrum.richardson", b(true)),
        ("spectrum.tolerance", f(1e-2)),
        ("spectrum.k_max", i(-1)),
        ("spectrum.include_k0", b(false)),
        ("spectrum.oracle_tolerance", f(1e-4)),
        // weyl
        ("weyl.source", s("computed")),
        ("weyl.spectrum_file", s("")),
        ("weyl.file_lambda_max", f(0.0)),
        ("weyl.space", s("xdouble")),
        ("weyl.lambda_max", f(3e4)),
        ("weyl.grid.points_per_wavelength", f(12.0)),
        ("weyl.law", s("auto")),
        ("weyl.beta", f(0.0)),
        ("weyl.window", l(&[])),
        ("weyl.tolerance", f(0.15)),
        ("weyl.expected", f(0.0)),
        ("weyl.expected_tolerance", f(0.05)),
        ("weyl.check_exclusion", b(true)),
        ("weyl.localized", b(true)),
        ("weyl.localized_lambda_max", f(2000.0)),
        ("weyl.region", l(&[0.0, 0.5])),
        ("weyl.epsilon", f(0.5)),
        ("weyl.localized_min_ratio", f(0.1)),
        // heat trace
        ("heattrace.t", l(&[0.0025, 0.01, 0.04])),
        ("heattrace.truncation", f(0.0)),
        ("heattrace.cells", i(0)),
        ("heattrace.h_r", l(&[0.0, 0.5, 1.0, 2.0, 4.0])),
        ("heattrace.box_v", l(&[0.0, 1.0])),
        ("heattrace.box_r2", f(1.0)),
        ("heattrace.s_range", l(&[0.05, 0.5])),
        ("heattrace.s_count", i(11)),
        ("heattrace.slope_tolerance", f(0.05)),
        ("heattrace.per_decade", i(8)),
        ("heattrace.ltilde_s", l(&[0.01, 0.1])),
        ("heattrace.ltilde_tolerance", f(0.01)),
        ("heattrace.route_boxes", l(&[0.0, 1.0, 0.5, 2.0])),
        ("heattrace.route_tolerance", f(0.01)),
        ("heattrace.x_times", l(&[0.05, 0.1, 0.2])),
        ("heattrace.x_cells", i(300)),
        ("heattrace.x_tolerance", f(1e-6)),
        // covering
        ("covercheck.t", l(&[0.01, 0.1, 1.0])),
        ("covercheck.offsets", l(&[0.0, 0.25, 0.5])),
        ("covercheck.terms", i(50)),
        ("covercheck.tolerance", f(1e-10)),
        ("covercheck.r0", f(0.0)),
        ("covercheck.s", l(&[0.3, 0.2, 0.1])),
        ("covercheck.tail_terms", i(8)),
        ("covercheck.c_ly", f(0.0)),
        ("covercheck.affine_tolerance", f(0.01)),
        ("covercheck.nr", i(33)),
        ("covercheck.nv", i(33)),
        ("covercheck.grading", f(1.05)),
        ("covercheck.stencil_radius", i(8)),
    ]
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: registry().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn coerce(key: &str, default: &Value, raw: &toml::Value) -> Result<Value, Failure> {
    let mismatch = || Failure::Config(format!("config key `{key}` expects {}, got `{raw}`", default.kind()));
    Ok(match (default, raw) {
        (Value::Bool(_), toml::Value::Boolean(x)) => Value::Bool(*x),
        (Value::Int(_), toml::Value::Integer(x)) => Value::Int(*x),
        (Value::Float(_), toml::Value::Float(x)) => Value::Float(*x),
        (Value::Float(_), toml::Value::Integer(x)) => Value::Float(*x as f64),
        (Value::Text(_), toml::Value::String(x)) => Value::Text(x.clone()),
        (Value::List(_), toml::Value::Array(items)) => Value::List(
            items
                .iter()
                .map(|item| match item {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(x) => Ok(*x as f64),
                    _ => Err(mismatch()),
                })
                .collect::<Result<_, _>>()?,
        ),
        _ => return Err(mismatch()),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Failure::Config(format!("malformed config: {}", e.message())))?;
        let mut entries = Vec::new();
        flatten("", &table, &mut entries);
        let mut cfg = RunConfig::default();
        for (key, raw) in entries {
            let default = cfg
                .values
                .get(&key)
                .ok_or_else(|| Failure::Config(format!("unknown config key `{key}`")))?;
            let value = coerce(&key, default, &raw)?;
            cfg.values.insert(key, value);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("config key `{key}` is not registered"))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            other => panic!("config key `{key}` holds {other:?}"),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(x) => *x,
            other => panic!("config key `{key}` holds {other:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(x) => *x,
            other => panic!("config key `{key}` holds {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(x) => x,
            other => panic!("config key `{key}` holds {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::List(x) => x,
            other => panic!("config key `{key}` holds {other:?}"),
        }
    }

    /// Non-negative integer.
    pub fn count(&self, key: &str) -> Result<usize, Failure> {
        usize::try_from(self.int(key)).map_err(|_| Failure::Config(format!("config key `{key}` must be non-negative")))
    }

    /// List of exactly `len` numbers.
    pub fn tuple(&self, key: &str, len: usize) -> Result<&[f64], Failure> {
        let v = self.list(key);
        if v.len() != len {
            return Err(Failure::Config(format!("config key `{key}` needs {len} numbers, got {}", v.len())));
        }
        Ok(v)
    }

    /// Non-empty list.
    pub fn values(&self, key: &str) -> Result<&[f64], Failure> {
        let v = self.list(key);
        if v.is_empty() {
            return Err(Failure::Config(format!("config key `{key}` must not be empty")));
        }
        Ok(v)
    }

    pub fn choice<'a>(&'a self, key: &str, options: &[&str]) -> Result<&'a str, Failure> {
        let v = self.text(key);
        if options.contains(&v) {
            Ok(v)
        } else {
            Err(Failure::Config(format!("config key `{key}` must be one of {options:?}, got `{v}`")))
        }
    }
}
