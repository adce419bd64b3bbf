//! Output directory: CSV tables, JSON reports, plot scripts and the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::Failure;

/// `%.17g`: shortest of fixed and exponent notation with 17 significant
/// digits, trailing zeros dropped.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => g17(*x),
            Cell::I(x) => x.to_string(),
            Cell::S(x) => x.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: &'a str,
    refine: u32,
    workers: usize,
    status: &'a str,
    config: &'a RunConfig,
    artifacts: &'a [String],
    checks: &'a [Check],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorRecord<'a>>,
}

pub struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
    checks: Vec<Check>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = Cell>,
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter().map(|c| c.render()))?;
        }
        w.flush()?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Gnuplot script; every file it plots must already be an artifact.
    pub fn script(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        for line in text.lines() {
            for (i, piece) in line.split('\'').enumerate() {
                if i % 2 == 1 && piece.ends_with(".csv") && !self.artifacts.iter().any(|a| a == piece) {
                    panic!("plot script {name} references {piece}, which was not emitted");
                }
            }
        }
        let mut body = String::from("set datafile separator ','\nset key autotitle columnhead\n");
        body.push_str(text);
        fs::write(self.path(name), body)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Records `value ≤ bound`.
    pub fn check_below(&mut self, name: &str, value: f64, bound: f64) -> bool {
        self.record(name, value, bound, value <= bound)
    }

    /// Records `value ≥ bound`.
    pub fn check_above(&mut self, name: &str, value: f64, bound: f64) -> bool {
        self.record(name, value, bound, value >= bound)
    }

    pub fn record(&mut self, name: &str, value: f64, bound: f64, passed: bool) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            bound,
            passed,
        });
        passed
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes `manifest.json`; the run is `ok` only without error and with
    /// every check passed.
    pub fn finish(
        &mut self,
        command: &str,
        refine: u32,
        workers: usize,
        config: &RunConfig,
        error: Option<&Failure>,
    ) -> Result<(), Failure> {
        let status = if error.is_none() && self.all_passed() { "ok" } else { "FAILED" };
        let manifest = Manifest {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            refine,
            workers,
            status,
            config,
            artifacts: &self.artifacts,
            checks: &self.checks,
            error: error.map(|e| ErrorRecord {
                kind: e.kind(),
                exit_code: e.exit_code(),
                message: e.to_string(),
            }),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.path("manifest.json"), text)?;
        Ok(())
    }
}
