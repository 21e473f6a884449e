use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{standard_notes, KNorms, LocalizationReport, Parameters, Trends, WindowEcho, XiProvenance};
use crate::error::{Error, Result};
use crate::geometry::{check_feasibility, travel_time_map, FeasibilityMode, FeasibilityReport, Intervals, Region};
use crate::linops::{
    accept_unconverged, localizer_sequence, tikhonov_solve, Adjoint, LinearMap, LocalizerConfig, LocalizerOutput,
    SolveOptions,
};
use crate::wave::{
    make_l_op, make_p_op, make_t_op, AdjointMode, BoundaryTimeSeries, SpaceTimeWindow, WaveProblem, WindowOp,
};

/// Knobs shared by the localization pipelines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeOptions {
    /// Tikhonov parameter of the radiating-source step.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Radiation time: τ for localization in space, δ for time case II.
    /// `None` picks half of the admissible bound.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_k_schedule")]
    pub k_schedule: Vec<f64>,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default)]
    pub cg_max_iter: Option<usize>,
}

fn default_beta() -> f64 {
    1e-4
}

fn default_k_schedule() -> Vec<f64> {
    (0..=4).map(|j| 10f64.powi(j)).collect()
}

fn default_cg_tol() -> f64 {
    1e-10
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { beta: default_beta(), tau: None, k_schedule: default_k_schedule(), cg_tol: default_cg_tol(), cg_max_iter: None }
    }
}

impl LocalizeOptions {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.cg_tol, max_iter: self.cg_max_iter }
    }

    pub fn localizer(&self) -> LocalizerConfig {
        LocalizerConfig { cg_tol: self.cg_tol, cg_max_iter: self.cg_max_iter, ..LocalizerConfig::from_k_schedule(&self.k_schedule) }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidInput(format!("β = {} must be positive", self.beta)));
        }
        if self.k_schedule.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::InvalidInput("k schedule entries must be positive".into()));
        }
        self.localizer().validate()
    }

    pub(crate) fn parameters(&self, tau: Option<f64>, delta: Option<f64>) -> Parameters {
        Parameters {
            k_schedule: self.k_schedule.clone(),
            beta: Some(self.beta),
            tau,
            delta,
            sigma: None,
            cg_tol: self.cg_tol,
        }
    }
}

/// A computed localizing sequence with its report.
#[derive(Clone, Debug)]
pub struct Localization {
    pub report: LocalizationReport,
    pub sequence: Vec<BoundaryTimeSeries>,
    pub xi: Option<BoundaryTimeSeries>,
}

/// ξ together with the radiating source it came from.
#[derive(Clone, Debug)]
pub struct XiConstruction {
    pub xi: BoundaryTimeSeries,
    /// Tikhonov source `g` on `B × [0,τ)`, level-major.
    pub source: Vec<f64>,
    pub provenance: XiProvenance,
    pub feasibility: FeasibilityReport,
}

fn feasibility(
    problem: &WaveProblem,
    windows: Intervals,
    mode: FeasibilityMode,
    region: &Region,
) -> Result<FeasibilityReport> {
    let ttm = travel_time_map(problem.grid(), problem.coeff().c(), problem.gamma())?;
    let report = check_feasibility(&ttm, &windows, mode, region);
    if report.passed {
        Ok(report)
    } else {
        Err(Error::Feasibility(Box::new(report)))
    }
}

/// `ξ = L*_B[ℛ_T 𝒯_{T−b} g]` with `g = (𝕋_τ*𝕋_τ + β)⁻¹ 𝕋_τ*[𝟙_M]`.
fn radiate_xi(
    problem: &Arc<WaveProblem>,
    target: &SpaceTimeWindow,
    tau: f64,
    beta: f64,
    opts: &SolveOptions,
    feasibility: FeasibilityReport,
) -> Result<XiConstruction> {
    let t = make_t_op(problem, tau, &target.region)?;
    if t.shell().is_empty() || t.domain().dim() == 0 {
        return Err(Error::InvalidInput(format!("τ = {tau} leaves no room for radiation; the shell M^(τ) is empty")));
    }
    let ones = vec![1.0; t.shell().len()];
    let sol = accept_unconverged(tikhonov_solve(&t, beta, &ones, opts))?;
    let g = sol.x;
    let tg = t.apply(&g);
    let miss: Vec<f64> = tg.iter().map(|v| v - 1.0).collect();
    let target_misfit = t.codomain().norm(&miss) / t.codomain().norm(&ones);

    let l = make_l_op(problem, target, AdjointMode::Exact)?;
    let s = l.sampling();
    let m = s.dofs.len();
    debug_assert_eq!(t.sources().dofs, s.dofs);
    let mut y = vec![0.0; s.len()];
    for n in 0..t.step() {
        if let Some(off) = target.last.checked_sub(n).and_then(|lvl| s.offset(lvl)) {
            y[off..off + m].copy_from_slice(&g[n * m..(n + 1) * m]);
        }
    }
    let xi = l.adjoint(&y);
    let xi_norm = l.domain().norm(&xi);
    let threshold = 1e-12 * l.codomain().norm(&y);
    if !(xi_norm > threshold) {
        return Err(Error::DegenerateXi { norm: xi_norm, threshold });
    }
    let provenance = XiProvenance {
        construction: "adjoint of the target window applied to the reversed radiating source".into(),
        tau,
        tau_snapped: problem.time().time(t.step()),
        beta,
        shell_size: t.shell().len(),
        tikhonov_iterations: sol.iterations,
        tikhonov_residual: sol.residual,
        tikhonov_converged: sol.converged,
        target_misfit,
        xi_norm,
    };
    let xi = BoundaryTimeSeries::from_values(problem.gamma().len(), problem.time().nt(), xi)?;
    Ok(XiConstruction { xi, source: g, provenance, feasibility })
}

/// ξ for localization in space; `tau = None` takes `½·min(b−a, b−dist(Ω,Γ))`.
pub fn build_xi_space(
    problem: &Arc<WaveProblem>,
    target: &SpaceTimeWindow,
    beta: f64,
    tau: Option<f64>,
    opts: &SolveOptions,
) -> Result<XiConstruction> {
    let windows = Intervals { a: target.a, b: target.b, c: None, d: None };
    let report = feasibility(problem, windows, FeasibilityMode::Space, &target.region)?;
    let bound = (target.b - target.a).min(target.b - report.dist_omega_gamma);
    let tau = tau.unwrap_or(0.5 * bound);
    if !(tau > 0.0 && tau < bound) {
        return Err(Error::InvalidInput(format!("τ = {tau} must lie in (0, {bound})")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!("β = {beta} must be positive")));
    }
    radiate_xi(problem, target, tau, beta, opts, report)
}

/// Norms of `f` over each window, from one fresh forward solve.
pub fn window_norms(problem: &WaveProblem, f: &[f64], windows: &[&WindowOp]) -> Vec<f64> {
    let steps = windows.iter().map(|w| w.sampling().levels.end.saturating_sub(1)).max().unwrap_or(0);
    let mut sums = vec![0.0; windows.len()];
    problem.propagate(steps, Some(f), None, &mut |n, u| {
        for (sum, w) in sums.iter_mut().zip(windows) {
            let s = w.sampling();
            if s.levels.contains(&n) {
                *sum += s.dofs.iter().map(|&d| u[d] * u[d]).sum::<f64>();
            }
        }
    });
    let weight = problem.grid().cell_volume() * problem.time().dt();
    sums.iter().map(|s| (s * weight).sqrt()).collect()
}

fn evaluate_sequence(
    problem: &WaveProblem,
    out: &LocalizerOutput,
    ks: &[f64],
    target: &WindowOp,
    suppress: &WindowOp,
) -> Vec<KNorms> {
    out.steps
        .par_iter()
        .zip(ks.par_iter())
        .map(|(step, &k)| {
            let norms = window_norms(problem, &step.xi_alpha, &[target, suppress]);
            let mut kn = KNorms::new(k, norms[0], norms[1]);
            kn.operator_target_norm = Some(step.norm_a1);
            kn.operator_suppression_norm = Some(step.norm_a2);
            kn.pairing = Some(step.pairing);
            kn.pairing_identity = Some(step.pairing_identity);
            kn.solver_iterations = Some(step.iterations);
            kn.solver_converged = Some(step.converged);
            kn
        })
        .collect()
}

fn sequence_of(problem: &WaveProblem, out: &LocalizerOutput) -> Result<Vec<BoundaryTimeSeries>> {
    out.steps
        .iter()
        .map(|s| BoundaryTimeSeries::from_values(problem.gamma().len(), problem.time().nt(), s.xi_alpha.clone()))
        .collect()
}

/// `f_k = 𝕁_k ξ / ⟨ξ, 𝕁_k ξ⟩^{3/4}` with `𝕁_k = (L_S* L_S + k⁻¹)⁻¹`, for the
/// target window `L_T` and suppression window `L_S`.
pub fn localizing_sequence(
    xi: &BoundaryTimeSeries,
    target: &WindowOp,
    suppress: &WindowOp,
    opts: &LocalizeOptions,
) -> Result<LocalizerOutput> {
    localizer_sequence(&Adjoint(target), &Adjoint(suppress), xi.values(), &opts.localizer())
}

pub(crate) fn check_disjoint(b: &Region, d: &Region) -> Result<()> {
    let cells = b.overlap(d);
    let bn = b.interior_nodes();
    let dn = d.interior_nodes();
    let nodes = bn.iter().filter(|i| dn.binary_search(i).is_ok()).count();
    if cells + nodes > 0 {
        return Err(Error::RegionOverlap(cells.max(nodes)));
    }
    Ok(())
}

/// Large on `B_{a,b}`, small on `D × (0,T)`.
pub fn localize_space(
    problem: &Arc<WaveProblem>,
    target: &SpaceTimeWindow,
    d_region: &Region,
    opts: &LocalizeOptions,
) -> Result<Localization> {
    opts.validate()?;
    check_disjoint(&target.region, d_region)?;
    if !d_region.is_interior() {
        return Err(Error::InvalidInput("D must stay away from the boundary of the domain".into()));
    }
    let xi = build_xi_space(problem, target, opts.beta, opts.tau, &opts.solve_options())?;
    let d_window = SpaceTimeWindow::new(d_region.clone(), 0.0, problem.time().final_time(), problem.time())?;
    let l_b = make_l_op(problem, target, AdjointMode::Exact)?;
    let l_d = make_l_op(problem, &d_window, AdjointMode::Exact)?;
    let out = localizing_sequence(&xi.xi, &l_b, &l_d, opts)?;
    let steps = evaluate_sequence(problem, &out, &opts.k_schedule, &l_b, &l_d);
    let report = LocalizationReport {
        pipeline: "wave/localize-space".into(),
        target: WindowEcho::of(target, problem.time()),
        suppression: WindowEcho::of(&d_window, problem.time()),
        feasibility: xi.feasibility.clone(),
        parameters: opts.parameters(Some(xi.provenance.tau), None),
        xi: Some(xi.provenance.clone()),
        trends: Trends::of(&steps),
        steps,
        notes: standard_notes(),
    };
    Ok(Localization { report, sequence: sequence_of(problem, &out)?, xi: Some(xi.xi) })
}

pub(crate) fn check_intervals(target: &SpaceTimeWindow, c: f64, d: f64, t_end: f64) -> Result<()> {
    if !(0.0 <= c && c < d && d <= t_end * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("suppression interval ({c}, {d}) is not ordered inside [0, {t_end}]")));
    }
    if !(d < target.a || c > target.b) {
        return Err(Error::InvalidInput(format!(
            "intervals [{}, {}] and [{c}, {d}] intersect",
            target.a, target.b
        )));
    }
    Ok(())
}

/// Case I (`d < a`): `f_k = k·f` with `f` radiating into `B` from `t = d`;
/// the suppression window hears nothing at all.
pub fn localize_time_case_i(
    problem: &Arc<WaveProblem>,
    target: &SpaceTimeWindow,
    c: f64,
    d: f64,
    opts: &LocalizeOptions,
) -> Result<Localization> {
    opts.validate()?;
    let time = problem.time();
    check_intervals(target, c, d, time.final_time())?;
    if c > target.b {
        return Err(Error::InvalidInput("suppression interval follows the target; use case II".into()));
    }
    let windows = Intervals { a: target.a, b: target.b, c: Some(c), d: Some(d) };
    let report = feasibility(problem, windows, FeasibilityMode::TimeI, &target.region)?;

    let tau = target.b - d;
    let p_op = make_p_op(problem, tau)?;
    let mask = target.region.node_mask();
    let indicator: Vec<f64> = p_op.nodes().iter().map(|&i| if mask[i] { 1.0 } else { 0.0 }).collect();
    let sol = accept_unconverged(tikhonov_solve(&p_op, opts.beta, &indicator, &opts.solve_options()))?;
    let miss: Vec<f64> = p_op.apply(&sol.x).iter().zip(&indicator).map(|(u, e)| u - e).collect();
    let target_misfit = p_op.codomain().norm(&miss) / p_op.codomain().norm(&indicator);

    let ng = problem.gamma().len();
    let nt = time.nt();
    let shift = time.snap(d);
    let mut base = vec![0.0; ng * nt];
    for n in 1..=p_op.step() {
        if n + shift <= nt {
            base[(n + shift - 1) * ng..(n + shift) * ng].copy_from_slice(&sol.x[(n - 1) * ng..n * ng]);
        }
    }
    let supp_window = SpaceTimeWindow::new(target.region.clone(), c, d, time)?;
    let l_b = make_l_op(problem, target, AdjointMode::Exact)?;
    let l_s = make_l_op(problem, &supp_window, AdjointMode::Exact)?;
    let base_norm = l_b.codomain().norm(&l_b.apply(&base));
    let base_supp = l_s.codomain().norm(&l_s.apply(&base));
    if !(base_norm > 0.0) {
        return Err(Error::DegenerateXi { norm: base_norm, threshold: 0.0 });
    }

    let sequence: Vec<Vec<f64>> = opts.k_schedule.iter().map(|&k| base.iter().map(|v| k * v).collect()).collect();
    let steps: Vec<KNorms> = sequence
        .par_iter()
        .zip(opts.k_schedule.par_iter())
        .map(|(f, &k)| {
            let norms = window_norms(problem, f, &[&l_b, &l_s]);
            let mut kn = KNorms::new(k, norms[0], norms[1]);
            kn.operator_target_norm = Some(k * base_norm);
            kn.operator_suppression_norm = Some(k * base_supp);
            kn
        })
        .collect();
    let provenance = XiProvenance {
        construction: "boundary Tikhonov source against the indicator of B, translated by d".into(),
        tau,
        tau_snapped: time.time(p_op.step()),
        beta: opts.beta,
        shell_size: indicator.iter().filter(|&&v| v > 0.0).count(),
        tikhonov_iterations: sol.iterations,
        tikhonov_residual: sol.residual,
        tikhonov_converged: sol.converged,
        target_misfit,
        xi_norm: p_op.domain().norm(&sol.x),
    };
    let mut notes = standard_notes();
    notes.push("f_k = k·f; the data vanish before t = d, so the suppression window sees exact zeros".into());
    let report = LocalizationReport {
        pipeline: "wave/localize-time-I".into(),
        target: WindowEcho::of(target, time),
        suppression: WindowEcho::of(&supp_window, time),
        feasibility: report,
        parameters: opts.parameters(Some(tau), None),
        xi: Some(provenance),
        trends: Trends::of(&steps),
        steps,
        notes,
    };
    let sequence = sequence.into_iter().map(|v| BoundaryTimeSeries::from_values(ng, nt, v)).collect::<Result<_>>()?;
    Ok(Localization { report, sequence, xi: Some(BoundaryTimeSeries::from_values(ng, nt, base)?) })
}

/// Case II (`c > b`): large on `B_{a,b}`, small on `B_{c,d}`.
pub fn localize_time_case_ii(
    problem: &Arc<WaveProblem>,
    target: &SpaceTimeWindow,
    c: f64,
    d: f64,
    opts: &LocalizeOptions,
) -> Result<Localization> {
    opts.validate()?;
    let time = problem.time();
    check_intervals(target, c, d, time.final_time())?;
    if d < target.a {
        return Err(Error::InvalidInput("suppression interval precedes the target; use case I".into()));
    }
    if !target.region.is_interior() {
        return Err(Error::InvalidInput("B must stay away from the boundary of the domain".into()));
    }
    let windows = Intervals { a: target.a, b: target.b, c: Some(c), d: Some(d) };
    let report = feasibility(problem, windows, FeasibilityMode::TimeII, &target.region)?;
    let bound = target.b - report.dist_omega_gamma;
    let delta = opts.tau.unwrap_or(0.5 * bound);
    if !(delta > 0.0 && delta < bound) {
        return Err(Error::InvalidInput(format!("δ = {delta} must lie in (0, {bound})")));
    }
    let xi = radiate_xi(problem, target, delta, opts.beta, &opts.solve_options(), report)?;
    let supp_window = SpaceTimeWindow::new(target.region.clone(), c, d, time)?;
    let l_b = make_l_op(problem, target, AdjointMode::Exact)?;
    let l_s = make_l_op(problem, &supp_window, AdjointMode::Exact)?;
    let out = localizing_sequence(&xi.xi, &l_b, &l_s, opts)?;
    let steps = evaluate_sequence(problem, &out, &opts.k_schedule, &l_b, &l_s);
    let report = LocalizationReport {
        pipeline: "wave/localize-time-II".into(),
        target: WindowEcho::of(target, time),
        suppression: WindowEcho::of(&supp_window, time),
        feasibility: xi.feasibility.clone(),
        parameters: opts.parameters(None, Some(delta)),
        xi: Some(xi.provenance.clone()),
        trends: Trends::of(&steps),
        steps,
        notes: standard_notes(),
    };
    Ok(Localization { report, sequence: sequence_of(problem, &out)?, xi: Some(xi.xi) })
}
