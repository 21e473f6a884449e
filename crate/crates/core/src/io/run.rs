//! Runs one configured experiment and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Mode, Setup};
use super::field_file::{write_csv_slice, FieldFile};
use crate::error::{Error, Result};
use crate::geometry::{travel_time_map, Grid};
use crate::linops::{dot_test, LinearMap};
use crate::maxwell::{
    em_energy, forward_maxwell, make_em_op, make_em_p_op, make_em_t_op, EmFieldMovie, EmProblem,
    Field, Observed,
};
use crate::maxwell_localize::{localize_space_em, localize_time_em_case_i, localize_time_em_case_ii, EmSeed};
use crate::wave::{
    forward_wave, make_l_op, make_p_op, make_t_op, wave_energy, AdjointMode, BoundaryTimeSeries, WaveProblem,
};
use crate::wave_localize::{localize_space, localize_time_case_i, localize_time_case_ii, Localization};

/// Largest dot-test defect counted as a pass.
pub const DOT_TEST_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the config seed.
    pub seed: Option<u64>,
    pub strict_reproducible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discretization {
    pub cells: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub nt: usize,
    pub dt: f64,
    pub final_time: f64,
    /// Scalar nodes or tangential edges carrying boundary data.
    pub boundary_dofs: usize,
}

/// Contents of `report.json`. Only `timestamp` varies between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub software: Software,
    pub seed: u64,
    pub strict_reproducible: bool,
    pub config: ExperimentConfig,
    pub discretization: Discretization,
    pub result: Value,
    pub artifacts: Vec<String>,
    pub timestamp: String,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub report_path: PathBuf,
}

struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn field(&mut self, name: &str, file: &FieldFile) -> Result<String> {
        file.write(&self.dir.join(name))?;
        self.names.push(name.to_string());
        Ok(name.to_string())
    }

    fn csv_slice(&mut self, name: &str, grid: &Grid, values: &[f64]) -> Result<()> {
        let [nx, ny, _] = grid.node_dims();
        let o = grid.origin();
        let (hx, hy) = (grid.spacing(0), grid.spacing(1));
        write_csv_slice(&self.dir.join(name), nx, ny, |i, j| [o[0] + i as f64 * hx, o[1] + j as f64 * hy], values)?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.names.push(name.to_string());
        Ok(())
    }
}

/// Exit status of the command-line driver for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidInput(_)
        | Error::Cfl { .. }
        | Error::EmptyRegion
        | Error::Shape(_)
        | Error::InvalidCoefficient(_)
        | Error::Format(_) => 2,
        Error::Feasibility(_) | Error::RegionOverlap(_) => 3,
        _ => 4,
    }
}

/// Machine-readable description of an error.
pub fn diagnostic(err: &Error) -> Value {
    let kind = match err {
        Error::Config(_) => "config",
        Error::InvalidInput(_) => "invalid-input",
        Error::Cfl { .. } => "cfl",
        Error::EmptyRegion => "empty-region",
        Error::Shape(_) => "shape",
        Error::InvalidCoefficient(_) => "invalid-coefficient",
        Error::Format(_) => "format",
        Error::Feasibility(_) => "feasibility",
        Error::RegionOverlap(_) => "region-overlap",
        Error::NotPositiveDefinite(_) => "not-positive-definite",
        Error::MaxIterations { .. } => "max-iterations",
        Error::NumericalBreakdown(_) => "numerical-breakdown",
        Error::DegenerateXi { .. } => "degenerate-xi",
        Error::Io(_) => "io",
    };
    let mut d = json!({ "error": kind, "message": err.to_string(), "exit_code": exit_code(err) });
    match err {
        Error::Config(list) => d["problems"] = json!(list),
        Error::Feasibility(report) => d["feasibility"] = json!(report),
        Error::Cfl { dt, max_dt } => d["admissible_dt"] = json!({ "dt": dt, "max_dt": max_dt }),
        _ => {}
    }
    d
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

/// Reductions inside the library are sequential, so runs are reproducible at
/// any thread count; `strict_reproducible` is echoed in the report.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let setup = cfg.build()?;
    fs::create_dir_all(&opts.out_dir)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let mut art = Artifacts { dir: opts.out_dir.clone(), names: Vec::new() };
    let result = match (&setup, cfg.mode) {
        (Setup::Wave(p), Mode::Simulate) => simulate_wave(cfg, p, &mut art)?,
        (Setup::Maxwell(p), Mode::Simulate) => simulate_maxwell(cfg, p, &mut art)?,
        (_, Mode::VerifyAdjoint) => verify_adjoint(cfg, &setup, seed)?,
        (_, Mode::DistanceMap) => distance_map(&setup, &mut art)?,
        (_, mode) => localize(cfg, &setup, mode, &mut art)?,
    };
    let grid = setup.grid();
    let time = setup.time();
    let dim = grid.dim();
    let discretization = Discretization {
        cells: (0..dim).map(|a| grid.cells(a)).collect(),
        spacing: (0..dim).map(|a| grid.spacing(a)).collect(),
        origin: grid.origin()[..dim].to_vec(),
        nt: time.nt(),
        dt: time.dt(),
        final_time: time.final_time(),
        boundary_dofs: match &setup {
            Setup::Wave(p) => p.gamma().len(),
            Setup::Maxwell(p) => p.gamma().len(),
        },
    };
    let mut artifacts = art.names;
    artifacts.sort();
    let report = RunReport {
        software: Software { name: "wavefocus".into(), version: env!("CARGO_PKG_VERSION").into() },
        seed,
        strict_reproducible: opts.strict_reproducible,
        config: cfg.clone(),
        discretization,
        result,
        artifacts,
        timestamp: timestamp(),
    };
    let report_path = opts.out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(format!("report JSON: {e}")))?;
    fs::write(&report_path, text + "\n")?;
    Ok(RunOutcome { report, report_path })
}

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(format!("report JSON: {e}")))
}

/// Node field dims, slowest axis first.
fn node_dims(grid: &Grid) -> Vec<usize> {
    let d = grid.node_dims();
    d[..grid.dim()].iter().rev().copied().collect()
}

fn series_file(s: &BoundaryTimeSeries) -> Result<FieldFile> {
    FieldFile::new(vec![s.nt(), s.dofs()], 1, s.values().to_vec())
}

fn pulse(cfg: &ExperimentConfig, dofs: usize, time: &crate::geometry::TimeGrid) -> BoundaryTimeSeries {
    let amp = cfg.simulate.amplitude;
    let dur = cfg.simulate.duration.unwrap_or(0.25 * time.final_time());
    BoundaryTimeSeries::from_fn(dofs, time, |_, t| {
        if t < dur {
            amp * (std::f64::consts::PI * t / dur).sin().powi(2)
        } else {
            0.0
        }
    })
}

fn snapshot_levels(cfg: &ExperimentConfig, time: &crate::geometry::TimeGrid) -> Vec<usize> {
    let mut levels: Vec<usize> = if cfg.simulate.snapshot_times.is_empty() {
        vec![time.nt()]
    } else {
        cfg.simulate.snapshot_times.iter().map(|&t| time.snap(t)).collect()
    };
    levels.sort_unstable();
    levels.dedup();
    levels
}

fn write_wave_snapshot(art: &mut Artifacts, grid: &Grid, stem: &str, level: usize, u: &[f64]) -> Result<String> {
    let name = art.field(&format!("{stem}_t{level:05}.wfoc"), &FieldFile::new(node_dims(grid), level as u64, u.to_vec())?)?;
    if grid.dim() == 2 {
        art.csv_slice(&format!("{stem}_t{level:05}.csv"), grid, u)?;
    }
    Ok(name)
}

fn simulate_wave(cfg: &ExperimentConfig, p: &Arc<WaveProblem>, art: &mut Artifacts) -> Result<Value> {
    let time = p.time();
    let f = pulse(cfg, p.gamma().len(), time);
    art.field("boundary.wfoc", &series_file(&f)?)?;
    let movie = forward_wave(p, &f)?;
    let vol = p.grid().cell_volume();
    let mut snaps = Vec::new();
    for level in snapshot_levels(cfg, time) {
        let u = movie.level(level);
        let file = write_wave_snapshot(art, p.grid(), "u", level, u)?;
        snaps.push(json!({
            "level": level,
            "time": time.time(level),
            "file": file,
            "l2_norm": (vol * u.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            "max_abs": u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }));
    }
    let nt = time.nt();
    Ok(json!({
        "kind": "simulate",
        "source": { "amplitude": cfg.simulate.amplitude, "duration": cfg.simulate.duration.unwrap_or(0.25 * time.final_time()) },
        "snapshots": snaps,
        "max_abs": movie.max_abs(),
        "final_energy": wave_energy(p, movie.level(nt), movie.level(nt - 1)),
    }))
}

fn write_em_snapshot(art: &mut Artifacts, p: &EmProblem, movie: &EmFieldMovie, level: usize) -> Result<Vec<String>> {
    let y = p.yee();
    let mut files = Vec::new();
    for (name, data, field) in [("E", movie.e.level(level), Field::E), ("H", movie.h.level(level), Field::H)] {
        for (c, axis) in ["x", "y", "z"].iter().enumerate() {
            let (d, range) = if field == Field::E { y.edge_block(c) } else { y.face_block(c) };
            let file = FieldFile::new(vec![d[2], d[1], d[0]], level as u64, data[range].to_vec())?;
            files.push(art.field(&format!("{name}{axis}_t{level:05}.wfoc"), &file)?);
        }
    }
    Ok(files)
}

fn em_level_norms(p: &EmProblem, movie: &EmFieldMovie, level: usize) -> (f64, f64) {
    let v = p.yee().volume();
    let e = movie.e.level(level).iter().zip(p.coeff().eps()).map(|(x, w)| w * x * x).sum::<f64>();
    let h = movie.h.level(level).iter().zip(p.coeff().mu()).map(|(x, w)| w * x * x).sum::<f64>();
    ((v * e).sqrt(), (v * h).sqrt())
}

fn simulate_maxwell(cfg: &ExperimentConfig, p: &Arc<EmProblem>, art: &mut Artifacts) -> Result<Value> {
    let time = p.time();
    let f = pulse(cfg, p.gamma().len(), time);
    art.field("boundary.wfoc", &series_file(&f)?)?;
    let movie = forward_maxwell(p, &f)?;
    let mut snaps = Vec::new();
    for level in snapshot_levels(cfg, time) {
        let files = write_em_snapshot(art, p, &movie, level)?;
        let (e, h) = em_level_norms(p, &movie, level);
        snaps.push(json!({ "level": level, "time": time.time(level), "files": files, "e_norm": e, "h_norm": h }));
    }
    let nt = time.nt();
    Ok(json!({
        "kind": "simulate",
        "source": { "amplitude": cfg.simulate.amplitude, "duration": cfg.simulate.duration.unwrap_or(0.25 * time.final_time()) },
        "snapshots": snaps,
        "max_abs": movie.max_abs(),
        "final_energy": em_energy(p, movie.e.level(nt - 1), movie.h.level(nt - 1), movie.h.level(nt)),
    }))
}

/// Relative L² gap between the continuous and exact adjoints on one random
/// window datum.
fn adjoint_gap(exact: &dyn LinearMap, continuous: &dyn LinearMap, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..exact.codomain().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a = exact.adjoint(&g);
    let b = continuous.adjoint(&g);
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    exact.domain().norm(&diff) / exact.domain().norm(&a).max(f64::MIN_POSITIVE)
}

fn verify_adjoint(cfg: &ExperimentConfig, setup: &Setup, seed: u64) -> Result<Value> {
    let trials = cfg.verify_adjoint.trials;
    let time = setup.time();
    let target = cfg.target_window(setup.grid(), time)?;
    let tau = cfg.verify_adjoint.tau.unwrap_or(0.25 * time.final_time());
    let mut ops: Vec<(String, Box<dyn LinearMap>)> = Vec::new();
    let mut gaps = Vec::new();
    match setup {
        Setup::Wave(p) => {
            let l = make_l_op(p, &target, AdjointMode::Exact)?;
            let lc = make_l_op(p, &target, AdjointMode::Continuous)?;
            gaps.push(json!({ "operator": "L", "relative_l2_gap": adjoint_gap(&l, &lc, seed) }));
            ops.push(("L".into(), Box::new(l)));
            ops.push(("T".into(), Box::new(make_t_op(p, tau, &target.region)?)));
            ops.push(("P".into(), Box::new(make_p_op(p, tau)?)));
        }
        Setup::Maxwell(p) => {
            for (name, obs) in [("L", Observed::L), ("E", Observed::E), ("H", Observed::H)] {
                let op = make_em_op(p, &target, obs, AdjointMode::Exact)?;
                let cont = make_em_op(p, &target, obs, AdjointMode::Continuous)?;
                gaps.push(json!({ "operator": name, "relative_l2_gap": adjoint_gap(&op, &cont, seed) }));
                ops.push((name.into(), Box::new(op)));
            }
            let sigma = (target.b - tau).max(0.0);
            for (name, field) in [("T_E", Field::E), ("T_H", Field::H)] {
                ops.push((name.into(), Box::new(make_em_t_op(p, sigma, tau, &target.region, field)?)));
            }
            ops.push(("P".into(), Box::new(make_em_p_op(p, tau)?)));
        }
    }
    let mut rows = Vec::new();
    let mut all = true;
    for (name, op) in &ops {
        let defect = dot_test(op.as_ref(), trials, seed)?;
        let passed = defect <= DOT_TEST_TOLERANCE;
        all &= passed;
        rows.push(json!({
            "operator": name,
            "domain_dim": op.domain().dim(),
            "codomain_dim": op.codomain().dim(),
            "defect": defect,
            "passed": passed,
        }));
    }
    Ok(json!({
        "kind": "verify-adjoint",
        "trials": trials,
        "tolerance": DOT_TEST_TOLERANCE,
        "tau": tau,
        "tau_snapped": time.time(time.snap(tau)),
        "operators": rows,
        "continuous_vs_exact": gaps,
        "all_passed": all,
    }))
}

fn distance_map(setup: &Setup, art: &mut Artifacts) -> Result<Value> {
    let (grid, ttm) = match setup {
        Setup::Wave(p) => (p.grid(), travel_time_map(p.grid(), p.coeff().c(), p.gamma())?),
        Setup::Maxwell(p) => {
            let y = p.yee();
            (y.grid(), travel_time_map(y.grid(), &p.coeff().node_speed(y), p.gamma().node_patch())?)
        }
    };
    let v = ttm.values();
    let file = art.field("distance.wfoc", &FieldFile::new(node_dims(grid), 0, v.to_vec())?)?;
    if grid.dim() == 2 {
        art.csv_slice("distance.csv", grid, v)?;
    }
    let finite = v.iter().copied().filter(|x| x.is_finite());
    Ok(json!({
        "kind": "distance-map",
        "file": file,
        "max_distance": finite.clone().fold(0.0f64, f64::max),
        "min_distance": finite.fold(f64::INFINITY, f64::min),
        "dist_omega_gamma": ttm.dist_omega_gamma(),
    }))
}

fn norms_csv(loc: &Localization) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string(), "target_norm".into(), "suppression_norm".into(), "ratio".into()];
    let comps: Vec<String> = loc.report.steps.first().map(|s| s.components.keys().cloned().collect()).unwrap_or_default();
    header.extend(comps.iter().cloned());
    let err = |e: csv::Error| Error::Format(format!("CSV: {e}"));
    w.write_record(&header).map_err(err)?;
    for s in &loc.report.steps {
        let mut row = vec![s.k.to_string(), s.target_norm.to_string(), s.suppression_norm.to_string()];
        row.push(s.ratio.map(|r| r.to_string()).unwrap_or_default());
        row.extend(comps.iter().map(|c| s.components.get(c).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row).map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).map_err(|e| Error::Format(e.to_string()))
}

fn localize(cfg: &ExperimentConfig, setup: &Setup, mode: Mode, art: &mut Artifacts) -> Result<Value> {
    let time = setup.time();
    let target = cfg.target_window(setup.grid(), time)?;
    let opts = &cfg.localize.options;
    let loc = match setup {
        Setup::Wave(p) => match mode {
            Mode::LocalizeSpace => localize_space(p, &target, &cfg.suppression_region(p.grid())?, opts)?,
            Mode::LocalizeTimeI => {
                let (c, d) = cfg.suppression_interval()?;
                localize_time_case_i(p, &target, c, d, opts)?
            }
            _ => {
                let (c, d) = cfg.suppression_interval()?;
                localize_time_case_ii(p, &target, c, d, opts)?
            }
        },
        Setup::Maxwell(p) => {
            let field = cfg.localize.field;
            let seed = EmSeed::CurlBump { amplitude: cfg.localize.seed_amplitude };
            match mode {
                Mode::LocalizeSpace => {
                    let d = cfg.suppression_region(p.yee().grid())?;
                    localize_space_em(p, field, &target, &d, &seed, opts)?
                }
                Mode::LocalizeTimeI => {
                    let (c, d) = cfg.suppression_interval()?;
                    localize_time_em_case_i(p, &target, c, d, opts)?
                }
                _ => {
                    let (c, d) = cfg.suppression_interval()?;
                    localize_time_em_case_ii(p, field, &target, c, d, &seed, opts)?
                }
            }
        }
    };
    art.text("norms.csv", &norms_csv(&loc)?)?;
    if let Some(xi) = &loc.xi {
        art.field("xi.wfoc", &series_file(xi)?)?;
    }
    for (i, f) in loc.sequence.iter().enumerate() {
        art.field(&format!("f_{i:02}.wfoc"), &series_file(f)?)?;
    }
    let level = target.last;
    let mut snapshot = Vec::new();
    if let Some(last) = loc.sequence.last() {
        match setup {
            Setup::Wave(p) => {
                let movie = forward_wave(p, last)?;
                snapshot.push(write_wave_snapshot(art, p.grid(), "u_last", level, movie.level(level))?);
            }
            Setup::Maxwell(p) => {
                let movie = forward_maxwell(p, last)?;
                snapshot = write_em_snapshot(art, p, &movie, level)?;
            }
        }
    }
    let mut value = to_json(&loc.report)?;
    value["kind"] = json!("localize");
    value["last_member_snapshot"] = json!({ "level": level, "time": time.time(level), "files": snapshot });
    Ok(value)
}

/// Reads `report.json` back as JSON with the timestamp removed.
pub fn report_without_timestamp(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::Format(format!("report JSON: {e}")))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timestamp");
    }
    Ok(v)
}
