//! Experiment configuration, presets, the acceptance battery and report
//! serialization.

pub mod commands;
pub mod corpus;
pub mod criteria;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{CertifiedValue, StepFunction1D};
use crate::error::{Error, Result};
use crate::weights::{km_weight_1d, km_weight_nd, KmRule, PsiFunction, Weight};

pub const PRESETS: [&str; 2] = ["km-geometric", "km-harmonic"];
pub const BATTERIES: [&str; 2] = ["acceptance", "km-divergence"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Preset {
        name: String,
        #[serde(default = "two")]
        p: f64,
    },
    Km {
        rule: KmRule,
        #[serde(default = "one_dim")]
        dim: usize,
    },
    Constant {
        value: f64,
    },
    HalfLine {
        start: f64,
    },
    PowerLaw {
        a: f64,
    },
    SparsePower {
        a: f64,
    },
    Step {
        function: StepFunction1D,
    },
}

fn two() -> f64 {
    2.0
}
fn one_dim() -> usize {
    1
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match self {
            WeightSpec::Preset { name, p } => km_weight_1d(preset_rule(name, *p)?),
            WeightSpec::Km { rule, dim } if *dim == 1 => km_weight_1d(rule.clone()),
            WeightSpec::Km { rule, dim } => km_weight_nd(rule.clone(), *dim),
            WeightSpec::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(Error::Config(format!("constant weight must be positive, got {value}")));
                }
                Ok(Weight::constant(*value))
            }
            WeightSpec::HalfLine { start } => Ok(Weight::half_line(*start)),
            WeightSpec::PowerLaw { a } => Weight::power_law(*a),
            WeightSpec::SparsePower { a } => Weight::sparse_power(*a),
            WeightSpec::Step { function } => Ok(Weight::step(function.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Power { p: f64 },
    PhiP { p: f64 },
}

impl PsiSpec {
    pub fn build(&self) -> PsiFunction {
        match *self {
            PsiSpec::Power { p } => PsiFunction::Power(p),
            PsiSpec::PhiP { p } => PsiFunction::PhiP(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MenuSpec {
    pub count: usize,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for MenuSpec {
    fn default() -> Self {
        MenuSpec { count: 32, scale_min: 1.0 / 64.0, scale_max: 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel_tol: 1e-9 }
    }
}

/// JSON experiment description. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub weight: WeightSpec,
    pub psi: PsiSpec,
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    pub delta: f64,
    pub theta: f64,
    pub s: f64,
    pub menu: MenuSpec,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub battery: Vec<String>,
    /// inputs for the function-driven subcommands; a seeded corpus when empty
    pub functions: Vec<StepFunction1D>,
    pub k_max: i64,
    pub whitney_r: f64,
    /// 1D open sets for `whitney`, each a list of `[lo, hi]` intervals; seeded
    /// random sets when empty
    pub open_sets: Vec<Vec<[f64; 2]>>,
    /// evaluation points for `maximal`; a grid over each support when empty
    pub points: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: "experiment".into(),
            weight: WeightSpec::Preset { name: "km-geometric".into(), p: 2.0 },
            psi: PsiSpec::Power { p: 2.0 },
            p: 2.0,
            q: 3.0,
            eps: 0.1,
            delta: 0.5,
            theta: 0.5,
            s: 2.0,
            menu: MenuSpec::default(),
            tolerances: Tolerances::default(),
            seed: 7,
            battery: vec!["acceptance".into()],
            functions: Vec::new(),
            k_max: 20,
            whitney_r: 1.0,
            open_sets: Vec::new(),
            points: Vec::new(),
        }
    }
}

fn preset_rule(name: &str, p: f64) -> Result<KmRule> {
    let key = name.strip_prefix("km-").unwrap_or("");
    if !PRESETS.contains(&name) {
        return Err(Error::Config(format!("unknown preset '{name}'; available: {}", PRESETS.join(", "))));
    }
    KmRule::preset(key, p)
}

/// Config fragment for a named preset.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    preset_rule(name, 2.0)?;
    Ok(ExperimentConfig { id: name.into(), weight: WeightSpec::Preset { name: name.into(), p: 2.0 }, ..Default::default() })
}

fn battery_known(name: &str) -> bool {
    BATTERIES.contains(&name) || criterion_id(name).is_some()
}

/// `"c5"` or `"criterion-5"` to 5.
pub fn criterion_id(name: &str) -> Option<u32> {
    let n = name.strip_prefix("criterion-").or_else(|| name.strip_prefix('c'))?;
    n.parse().ok().filter(|k| (1..=criteria::COUNT).contains(k))
}

impl ExperimentConfig {
    /// Every violated precondition.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        need(self.p > 1.0 && self.p.is_finite(), format!("p must be a finite number above 1, got {}", self.p));
        need(self.q > 1.0 && self.q.is_finite(), format!("q must be a finite number above 1, got {}", self.q));
        need(self.eps > 0.0 && self.eps.is_finite(), format!("eps must be positive, got {}", self.eps));
        need(self.delta > 0.0 && self.delta <= 1.0, format!("delta must lie in (0, 1], got {}", self.delta));
        need(self.theta > 0.0 && self.theta < 1.0, format!("theta must lie in (0, 1), got {}", self.theta));
        if self.theta > 0.0 && self.theta < 1.0 {
            need(self.s > 1.0 && self.s <= 1.0 / (1.0 - self.theta), format!("s must lie in (1, 1/(1-theta)], got {}", self.s));
        }
        need(self.menu.count >= 1, "menu.count must be at least 1".into());
        need(
            self.menu.scale_min > 0.0 && self.menu.scale_min <= self.menu.scale_max && self.menu.scale_max.is_finite(),
            format!("menu scales must satisfy 0 < scale_min ≤ scale_max, got [{}, {}]", self.menu.scale_min, self.menu.scale_max),
        );
        need(
            self.tolerances.rel_tol > 0.0 && self.tolerances.rel_tol < 1.0,
            format!("tolerances.rel_tol must lie in (0, 1), got {}", self.tolerances.rel_tol),
        );
        need(self.whitney_r >= 1.0, format!("whitney_r must be at least 1, got {}", self.whitney_r));
        need(self.k_max >= 0, format!("k_max must be nonnegative, got {}", self.k_max));
        for b in &self.battery {
            need(battery_known(b), format!("unknown battery '{b}'; available: {}, c1..c{}", BATTERIES.join(", "), criteria::COUNT));
        }
        for (i, f) in self.functions.iter().enumerate() {
            need(f.has_zero_tails(), format!("functions[{i}] must be compactly supported"));
        }
        for (i, set) in self.open_sets.iter().enumerate() {
            need(!set.is_empty() && set.iter().all(|[a, b]| a.is_finite() && b.is_finite() && a < b), format!("open_sets[{i}] needs finite intervals with lo < hi"));
        }
        need(self.points.iter().all(|x| x.is_finite()), "points must be finite".into());
        if let Err(e) = self.weight.build() {
            v.push(format!("weight: {e}"));
        }
        if let Err(e) = self.psi.build().validate() {
            v.push(format!("psi: {e}"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        ExperimentConfig::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }
}

/// A report cell. Non-finite numbers serialize as the strings
/// `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Num(x) => s.serialize_str(nonfinite_label(*x)),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Ok(match v {
            serde_json::Value::Bool(b) => Cell::Bool(b),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            serde_json::Value::String(t) => match t.as_str() {
                "inf" => Cell::Num(f64::INFINITY),
                "-inf" => Cell::Num(f64::NEG_INFINITY),
                "nan" => Cell::Num(f64::NAN),
                _ => Cell::Text(t),
            },
            other => Cell::Text(other.to_string()),
        })
    }
}

fn nonfinite_label(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Cell {
        Cell::Int(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Cell {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Cell {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Cell {
        Cell::Text(x.into())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Cell {
        Cell::Text(x)
    }
}

pub type Row = BTreeMap<String, Cell>;

/// Builder for report rows.
#[derive(Debug, Clone, Default)]
pub struct RowBuilder(Row);

impl RowBuilder {
    pub fn new() -> RowBuilder {
        RowBuilder(Row::new())
    }
    pub fn set(mut self, key: &str, v: impl Into<Cell>) -> RowBuilder {
        self.0.insert(key.into(), v.into());
        self
    }
    /// `key` and `key_err`.
    pub fn cert(self, key: &str, v: CertifiedValue) -> RowBuilder {
        let err = format!("{key}_err");
        self.set(key, v.value).set(&err, v.error_bound)
    }
    pub fn build(self) -> Row {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub measured: Row,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub seed: u64,
    pub version: String,
    pub config: serde_json::Value,
    pub rows: Vec<Row>,
    pub summary: Row,
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Report {
        Report {
            id: config.id.clone(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            rows: Vec::new(),
            summary: Row::new(),
            criteria: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Runs the configured batteries in order.
pub fn run_suite(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let mut report = Report::new(config);
    let mut ids: Vec<u32> = Vec::new();
    for b in &config.battery {
        let add: Vec<u32> = match b.as_str() {
            "acceptance" => (1..=criteria::COUNT).collect(),
            "km-divergence" => vec![5, 6],
            other => criterion_id(other).into_iter().collect(),
        };
        for k in add {
            if !ids.contains(&k) {
                ids.push(k);
            }
        }
    }
    for id in ids {
        let out = criteria::run(id, config.seed);
        report.rows.push(
            RowBuilder::new()
                .set("criterion", id as i64)
                .set("name", out.result.name.as_str())
                .set("passed", out.result.passed)
                .set("detail", out.result.detail.as_str())
                .build(),
        );
        report.criteria.push(out.result);
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    report.summary.insert("criteria".into(), Cell::from(report.criteria.len()));
    report.summary.insert("passed".into(), Cell::from(passed));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format '{other}'; expected json or csv"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Float text with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        nonfinite_label(x).into()
    }
}

fn write_json(v: &serde_json::Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        serde_json::Value::String(s) => out.push_str(&serde_json::Value::String(s.clone()).to_string()),
        serde_json::Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(indent));
        }
        serde_json::Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            // serde_json's default map is ordered by key
            for (i, (k, x)) in m.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), serde_json::Value::String(k.clone()));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(indent));
        }
    }
}

/// Sorted keys, floats with 17 significant digits.
pub fn report_json(report: &Report) -> Result<String> {
    let v = serde_json::to_value(report).map_err(|e| Error::Unsupported(format!("report serialization: {e}")))?;
    let mut out = String::new();
    write_json(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

/// One row per case; columns are the sorted union of row keys.
pub fn report_csv(report: &Report) -> Result<String> {
    let mut keys: Vec<&String> = report.rows.iter().flat_map(|r| r.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Unsupported(format!("csv serialization: {e}"));
    if !keys.is_empty() {
        w.write_record(keys.iter().map(|k| k.as_str())).map_err(io)?;
    }
    for r in &report.rows {
        w.write_record(keys.iter().map(|k| r.get(*k).map(cell_text).unwrap_or_default())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Unsupported(format!("csv serialization: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Unsupported(e.to_string()))
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => report_json(report),
        Format::Csv => report_csv(report),
    }
}

/// Writes `<dir>/<id>.<ext>` and returns its path.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(format!("{}.{}", report.id, format.extension()));
    let text = render(report, format)?;
    std::fs::write(&path, text).map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}
