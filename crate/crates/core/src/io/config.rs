//! Versioned TOML experiment configuration.
//!
//! Parsing runs in three passes: a schema walk over the raw TOML that collects
//! every unknown, mistyped or missing key, a typed decode, and a semantic pass
//! re-checking the physical invariants. Each pass reports all of its findings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Error, Result};
use crate::geometry::{build_patch, build_region, Grid, PatchSpec, Region, Shape, SmoothField, TimeGrid};
use crate::maxwell::{build_em_patch, EmCoefficients, EmProblem, Field, YeeGrid};
use crate::wave::{CoefficientField, SpaceTimeWindow, WaveProblem};
use crate::wave_localize::LocalizeOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Wave2d,
    Wave3d,
    Maxwell3d,
}

impl ProblemKind {
    pub fn dim(self) -> usize {
        match self {
            ProblemKind::Wave2d => 2,
            _ => 3,
        }
    }

    pub fn is_wave(self) -> bool {
        self != ProblemKind::Maxwell3d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "localize-space")]
    LocalizeSpace,
    #[serde(rename = "localize-time-I")]
    LocalizeTimeI,
    #[serde(rename = "localize-time-II")]
    LocalizeTimeII,
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "verify-adjoint")]
    VerifyAdjoint,
    #[serde(rename = "distance-map")]
    DistanceMap,
}

const MODES: &[&str] =
    &["localize-space", "localize-time-I", "localize-time-II", "simulate", "verify-adjoint", "distance-map"];
const PROBLEMS: &[&str] = &["wave2d", "wave3d", "maxwell3d"];
const FACES: &[&str] = &["x-", "x+", "y-", "y+", "z-", "z+"];
const FIELDS: &[&str] = &["E", "H", "e", "h"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemKind,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    pub gamma: PatchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppression: Option<SuppressionConfig>,
    #[serde(default)]
    pub localize: LocalizeConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub verify_adjoint: VerifyConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub cells: Vec<usize>,
    /// Domain size per axis; the unit box by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    pub final_time: f64,
    /// Explicit step; otherwise the fewest steps within `cfl_fraction` of the
    /// stability bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub cfl_fraction: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<SmoothField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<SmoothField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<SmoothField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<SmoothField>,
}

/// The target window `B_{a,b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub region: Shape,
    pub a: f64,
    pub b: f64,
}

/// `D` for localization in space, `(c,d)` for the time modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppressionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizeConfig {
    #[serde(flatten)]
    pub options: LocalizeOptions,
    /// Maxwell target field.
    #[serde(default = "default_field")]
    pub field: Field,
    /// Amplitude of the default Maxwell seed.
    #[serde(default = "one")]
    pub seed_amplitude: f64,
}

fn default_field() -> Field {
    Field::E
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self { options: LocalizeOptions::default(), field: Field::E, seed_amplitude: 1.0 }
    }
}

/// Boundary datum `amplitude·sin²(πt/duration)` on all of Γ for `t < duration`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub amplitude: f64,
    /// A quarter of the final time by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// The final time by default.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Radiation time of the final-time and snapshot operators; a quarter of
    /// the final time by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

fn default_trials() -> usize {
    20
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { trials: default_trials(), tau: None }
    }
}

#[derive(Clone, Copy)]
enum Ty {
    Int,
    Num,
    Str(&'static [&'static str]),
    Nums,
    Ints,
    Strs(&'static [&'static str]),
    Table(&'static [Key]),
    Shape,
    Smooth,
}

struct Key {
    name: &'static str,
    ty: Ty,
    required: bool,
}

const fn req(name: &'static str, ty: Ty) -> Key {
    Key { name, ty, required: true }
}

const fn opt(name: &'static str, ty: Ty) -> Key {
    Key { name, ty, required: false }
}

const GRID: &[Key] = &[
    req("cells", Ty::Ints),
    opt("extent", Ty::Nums),
    opt("origin", Ty::Nums),
    req("final_time", Ty::Num),
    opt("dt", Ty::Num),
    opt("cfl_fraction", Ty::Num),
];
const COEFFICIENTS: &[Key] = &[opt("c", Ty::Smooth), opt("q", Ty::Smooth), opt("eps", Ty::Smooth), opt("mu", Ty::Smooth)];
const GAMMA: &[Key] = &[req("faces", Ty::Strs(FACES)), opt("window", Ty::Shape)];
const TARGET: &[Key] = &[req("region", Ty::Shape), req("a", Ty::Num), req("b", Ty::Num)];
const SUPPRESSION: &[Key] = &[opt("region", Ty::Shape), opt("c", Ty::Num), opt("d", Ty::Num)];
const LOCALIZE: &[Key] = &[
    opt("beta", Ty::Num),
    opt("tau", Ty::Num),
    opt("k_schedule", Ty::Nums),
    opt("cg_tol", Ty::Num),
    opt("cg_max_iter", Ty::Int),
    opt("field", Ty::Str(FIELDS)),
    opt("seed_amplitude", Ty::Num),
];
const SIMULATE: &[Key] = &[opt("amplitude", Ty::Num), opt("duration", Ty::Num), opt("snapshot_times", Ty::Nums)];
const VERIFY: &[Key] = &[opt("trials", Ty::Int), opt("tau", Ty::Num)];
const TOP: &[Key] = &[
    req("schema_version", Ty::Int),
    req("problem", Ty::Str(PROBLEMS)),
    req("mode", Ty::Str(MODES)),
    opt("seed", Ty::Int),
    req("grid", Ty::Table(GRID)),
    opt("coefficients", Ty::Table(COEFFICIENTS)),
    req("gamma", Ty::Table(GAMMA)),
    opt("target", Ty::Table(TARGET)),
    opt("suppression", Ty::Table(SUPPRESSION)),
    opt("localize", Ty::Table(LOCALIZE)),
    opt("simulate", Ty::Table(SIMULATE)),
    opt("verify_adjoint", Ty::Table(VERIFY)),
];
const BUMP: &[Key] = &[req("amplitude", Ty::Num), req("center", Ty::Nums), req("width", Ty::Num)];
const BALL: &[Key] = &[req("kind", Ty::Str(&["ball"])), req("center", Ty::Nums), req("radius", Ty::Num)];
const BOX: &[Key] = &[req("kind", Ty::Str(&["box"])), req("min", Ty::Nums), req("max", Ty::Nums)];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn check_table(table: &mut toml::Table, keys: &[Key], path: &str, errs: &mut Vec<String>) {
    for name in table.keys() {
        if !keys.iter().any(|k| k.name == name) {
            errs.push(format!("`{}`: unknown key", join(path, name)));
        }
    }
    for key in keys {
        let p = join(path, key.name);
        match table.get_mut(key.name) {
            Some(v) => check_value(v, key.ty, &p, errs),
            None if key.required => errs.push(format!("`{p}`: missing")),
            None => {}
        }
    }
}

/// Also widens integers to floats where numbers are expected.
fn check_value(v: &mut Value, ty: Ty, path: &str, errs: &mut Vec<String>) {
    let widen = |v: &mut Value| {
        if let Value::Integer(i) = *v {
            *v = Value::Float(i as f64);
        }
        v.is_float()
    };
    let ok = match ty {
        Ty::Int => v.as_integer().is_some_and(|i| i >= 0),
        Ty::Num => widen(v),
        Ty::Str(allowed) => match v.as_str() {
            Some(s) if allowed.contains(&s) => true,
            Some(s) => {
                errs.push(format!("`{path}`: `{s}` is not one of {}", allowed.join(", ")));
                return;
            }
            None => false,
        },
        Ty::Nums => v.as_array_mut().is_some_and(|a| a.iter_mut().fold(true, |ok, x| widen(x) && ok)),
        Ty::Ints => v.as_array().is_some_and(|a| a.iter().all(|x| x.as_integer().is_some_and(|i| i >= 0))),
        Ty::Strs(allowed) => match v.as_array() {
            Some(a) => {
                for (i, x) in a.iter().enumerate() {
                    match x.as_str() {
                        Some(s) if allowed.contains(&s) => {}
                        _ => errs.push(format!("`{path}[{i}]`: expected one of {}", allowed.join(", "))),
                    }
                }
                true
            }
            None => false,
        },
        Ty::Table(keys) => match v.as_table_mut() {
            Some(t) => {
                check_table(t, keys, path, errs);
                true
            }
            None => false,
        },
        Ty::Shape => return check_shape(v, path, errs),
        Ty::Smooth => match v.as_table_mut() {
            Some(t) => {
                smooth_keys(t, path, errs);
                true
            }
            None => false,
        },
    };
    if !ok {
        errs.push(format!("`{path}`: expected {}", describe(ty)));
    }
}

fn smooth_keys(t: &mut toml::Table, path: &str, errs: &mut Vec<String>) {
    for name in t.keys() {
        if name != "constant" && name != "bumps" {
            errs.push(format!("`{}`: unknown key", join(path, name)));
        }
    }
    match t.get_mut("constant") {
        Some(v) => check_value(v, Ty::Num, &join(path, "constant"), errs),
        None => errs.push(format!("`{}`: missing", join(path, "constant"))),
    }
    if let Some(b) = t.get_mut("bumps") {
        let p = join(path, "bumps");
        match b.as_array_mut() {
            Some(items) => {
                for (i, item) in items.iter_mut().enumerate() {
                    check_value(item, Ty::Table(BUMP), &format!("{p}[{i}]"), errs);
                }
            }
            None => errs.push(format!("`{p}`: expected array of tables")),
        }
    }
}

fn check_shape(v: &mut Value, path: &str, errs: &mut Vec<String>) {
    let Some(t) = v.as_table_mut() else {
        errs.push(format!("`{path}`: expected shape table"));
        return;
    };
    match t.get("kind").and_then(|k| k.as_str()) {
        Some("ball") => check_table(t, BALL, path, errs),
        Some("box") => check_table(t, BOX, path, errs),
        Some("union") => {
            for name in t.keys() {
                if name != "kind" && name != "parts" {
                    errs.push(format!("`{}`: unknown key", join(path, name)));
                }
            }
            let p = join(path, "parts");
            match t.get_mut("parts").and_then(|x| x.as_array_mut()) {
                Some(parts) => {
                    for (i, part) in parts.iter_mut().enumerate() {
                        check_shape(part, &format!("{p}[{i}]"), errs);
                    }
                }
                None => errs.push(format!("`{p}`: expected array of shapes")),
            }
        }
        _ => errs.push(format!("`{}`: expected one of ball, box, union", join(path, "kind"))),
    }
}

fn describe(ty: Ty) -> &'static str {
    match ty {
        Ty::Int => "non-negative integer",
        Ty::Num => "number",
        Ty::Str(_) => "string",
        Ty::Nums => "array of numbers",
        Ty::Ints => "array of non-negative integers",
        Ty::Strs(_) => "array of strings",
        Ty::Table(_) => "table",
        Ty::Shape => "shape table",
        Ty::Smooth => "table with `constant` and optional `bumps`",
    }
}

impl ExperimentConfig {
    /// Parses and validates; every violation is listed in one `Config` error.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(vec![format!("TOML syntax: {e}")]))?;
        let mut errs = Vec::new();
        check_table(&mut table, TOP, "", &mut errs);
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        let cfg: Self = Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let errs = cfg.semantic_errors();
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    /// The same experiment in another mode, re-validated.
    pub fn with_mode(mut self, mode: Mode) -> Result<Self> {
        self.mode = mode;
        let errs = self.semantic_errors();
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Error::Config(errs))
        }
    }

    fn semantic_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let dim = self.problem.dim();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!("`schema_version`: {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let g = &self.grid;
        if g.cells.len() != dim {
            errs.push(format!("`grid.cells`: {:?} does not have {dim} entries", g.cells));
        }
        if g.cells.iter().any(|&n| n < 4) {
            errs.push(format!("`grid.cells`: {:?} has fewer than 4 cells on an axis", g.cells));
        }
        for (name, v) in [("extent", &g.extent), ("origin", &g.origin)] {
            if let Some(v) = v {
                if v.len() != dim {
                    errs.push(format!("`grid.{name}`: {v:?} does not have {dim} entries"));
                }
            }
        }
        if g.extent.as_ref().is_some_and(|e| e.iter().any(|x| !(*x > 0.0))) {
            errs.push("`grid.extent`: entries must be positive".into());
        }
        if !(g.final_time > 0.0) {
            errs.push(format!("`grid.final_time`: {} must be positive", g.final_time));
        }
        if g.dt.is_some_and(|dt| !(dt > 0.0)) {
            errs.push("`grid.dt`: must be positive".into());
        }
        if !(g.cfl_fraction > 0.0 && g.cfl_fraction <= 1.0) {
            errs.push(format!("`grid.cfl_fraction`: {} must lie in (0, 1]", g.cfl_fraction));
        }
        let c = &self.coefficients;
        let foreign = if self.problem.is_wave() {
            [("eps", c.eps.is_some()), ("mu", c.mu.is_some())]
        } else {
            [("c", c.c.is_some()), ("q", c.q.is_some())]
        };
        for (name, present) in foreign {
            if present {
                errs.push(format!("`coefficients.{name}`: not a coefficient of a {:?} problem", self.problem));
            }
        }
        if self.gamma.faces.is_empty() {
            errs.push("`gamma.faces`: must name at least one face".into());
        }
        for f in &self.gamma.faces {
            if f.axis() >= dim {
                errs.push(format!("`gamma.faces`: {f:?} does not exist in {dim}D"));
            }
        }
        let needs_target = !matches!(self.mode, Mode::Simulate | Mode::DistanceMap);
        if needs_target && self.target.is_none() {
            errs.push(format!("`target`: required by mode {:?}", self.mode));
        }
        let supp = self.suppression.as_ref();
        match self.mode {
            Mode::LocalizeSpace => {
                if supp.and_then(|s| s.region.as_ref()).is_none() {
                    errs.push("`suppression.region`: required by localize-space".into());
                }
            }
            Mode::LocalizeTimeI | Mode::LocalizeTimeII => {
                for (name, v) in [("c", supp.and_then(|s| s.c)), ("d", supp.and_then(|s| s.d))] {
                    if v.is_none() {
                        errs.push(format!("`suppression.{name}`: required by the time modes"));
                    }
                }
            }
            _ => {}
        }
        let mut shapes: Vec<(&str, &Shape)> = Vec::new();
        if let Some(t) = &self.target {
            shapes.push(("target.region", &t.region));
            if !(t.a < t.b) {
                errs.push(format!("`target`: a = {} must be below b = {}", t.a, t.b));
            }
        }
        if let Some(r) = supp.and_then(|s| s.region.as_ref()) {
            shapes.push(("suppression.region", r));
        }
        if let Some(w) = &self.gamma.window {
            shapes.push(("gamma.window", w));
        }
        for (name, s) in shapes {
            if let Some(msg) = shape_dim_error(s, dim) {
                errs.push(format!("`{name}`: {msg}"));
            }
        }
        if let Err(e) = self.localize.options.validate() {
            errs.push(format!("`localize`: {e}"));
        }
        if !(self.localize.seed_amplitude != 0.0 && self.localize.seed_amplitude.is_finite()) {
            errs.push("`localize.seed_amplitude`: must be finite and nonzero".into());
        }
        if self.simulate.duration.is_some_and(|d| !(d > 0.0)) {
            errs.push("`simulate.duration`: must be positive".into());
        }
        if self.simulate.snapshot_times.iter().any(|t| !(*t >= 0.0 && *t <= g.final_time)) {
            errs.push(format!("`simulate.snapshot_times`: entries must lie in [0, {}]", g.final_time));
        }
        if self.verify_adjoint.trials == 0 {
            errs.push("`verify_adjoint.trials`: must be positive".into());
        }
        if self.verify_adjoint.tau.is_some_and(|t| !(t > 0.0 && t <= g.final_time)) {
            errs.push(format!("`verify_adjoint.tau`: must lie in (0, {}]", g.final_time));
        }
        errs
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let dim = self.problem.dim();
        let extent = self.grid.extent.clone().unwrap_or_else(|| vec![1.0; dim]);
        let origin = self.grid.origin.clone().unwrap_or_else(|| vec![0.0; dim]);
        let spacing: Vec<f64> = extent.iter().zip(&self.grid.cells).map(|(e, &n)| e / n as f64).collect();
        Grid::new(&self.grid.cells, &spacing, &origin)
    }

    fn time_grid(&self, max_dt: f64) -> Result<TimeGrid> {
        match self.grid.dt {
            Some(dt) => TimeGrid::new((self.grid.final_time / dt).round().max(1.0) as usize, dt),
            None => TimeGrid::fitting(self.grid.final_time, self.grid.cfl_fraction * max_dt),
        }
    }

    /// Grids, coefficients and Γ; the solver re-checks CFL and shapes.
    pub fn build(&self) -> Result<Setup> {
        let grid = self.build_grid()?;
        let field = |f: &Option<SmoothField>, v: f64| f.clone().unwrap_or_else(|| SmoothField::constant(v));
        if self.problem.is_wave() {
            let coeff = CoefficientField::from_fields(&grid, &field(&self.coefficients.c, 1.0), &field(&self.coefficients.q, 0.0))?;
            let gamma = build_patch(&grid, &self.gamma)?;
            let time = self.time_grid(WaveProblem::max_stable_dt(&grid, &coeff))?;
            Ok(Setup::Wave(Arc::new(WaveProblem::new(grid, time, coeff, gamma)?)))
        } else {
            let yee = YeeGrid::new(&grid)?;
            let coeff =
                EmCoefficients::from_fields(&yee, &field(&self.coefficients.eps, 1.0), &field(&self.coefficients.mu, 1.0))?;
            let gamma = build_em_patch(&yee, &self.gamma)?;
            let time = self.time_grid(EmProblem::max_stable_dt(&yee, &coeff))?;
            Ok(Setup::Maxwell(Arc::new(EmProblem::new(yee, time, coeff, gamma)?)))
        }
    }

    pub fn target_window(&self, grid: &Grid, time: &TimeGrid) -> Result<SpaceTimeWindow> {
        let t = self.target.as_ref().ok_or_else(|| Error::Config(vec!["`target`: missing".into()]))?;
        SpaceTimeWindow::new(build_region(grid, &t.region)?, t.a, t.b, time)
    }

    pub fn suppression_region(&self, grid: &Grid) -> Result<Region> {
        let shape = self.suppression.as_ref().and_then(|s| s.region.as_ref());
        build_region(grid, shape.ok_or_else(|| Error::Config(vec!["`suppression.region`: missing".into()]))?)
    }

    pub fn suppression_interval(&self) -> Result<(f64, f64)> {
        let s = self.suppression.as_ref();
        match (s.and_then(|s| s.c), s.and_then(|s| s.d)) {
            (Some(c), Some(d)) => Ok((c, d)),
            _ => Err(Error::Config(vec!["`suppression.c` and `suppression.d`: missing".into()])),
        }
    }
}

fn shape_dim_error(s: &Shape, dim: usize) -> Option<String> {
    match s {
        Shape::Ball { center, radius } => {
            if center.len() != dim {
                Some(format!("ball center has {} coordinates, need {dim}", center.len()))
            } else if !(*radius > 0.0) {
                Some(format!("ball radius {radius} must be positive"))
            } else {
                None
            }
        }
        Shape::Box { min, max } => {
            if min.len() != dim || max.len() != dim {
                Some(format!("box corners need {dim} coordinates"))
            } else if min.iter().zip(max).any(|(a, b)| a > b) {
                Some("box min exceeds max".into())
            } else {
                None
            }
        }
        Shape::Union { parts } => parts.iter().find_map(|p| shape_dim_error(p, dim)),
    }
}

/// A discretized problem ready to run.
#[derive(Clone, Debug)]
pub enum Setup {
    Wave(Arc<WaveProblem>),
    Maxwell(Arc<EmProblem>),
}

impl Setup {
    pub fn grid(&self) -> &Grid {
        match self {
            Setup::Wave(p) => p.grid(),
            Setup::Maxwell(p) => p.yee().grid(),
        }
    }

    pub fn time(&self) -> &TimeGrid {
        match self {
            Setup::Wave(p) => p.time(),
            Setup::Maxwell(p) => p.time(),
        }
    }
}
