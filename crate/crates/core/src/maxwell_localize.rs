//! Boundary data whose electromagnetic fields are large in one space-time
//! window and small in another, for `E` or `H` targets.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    check_feasibility, travel_time_map, travel_times_from, FeasibilityMode, FeasibilityReport, Intervals, Region,
};
use crate::linops::{accept_unconverged, localizer_sequence, tikhonov_solve, Adjoint, LinearMap, LocalizerOutput, SolveOptions};
use crate::maxwell::{
    make_em_op, make_em_p_op, make_em_t_op, travel_times_to, DivFreeProjector, EmBoundarySeries, EmFinalTimeOp,
    EmProblem, EmWindowOp, Field, Observed,
};
use crate::wave::{AdjointMode, SpaceTimeWindow};
use crate::wave_localize::{
    check_disjoint, check_intervals, standard_notes, KNorms, Localization, LocalizationReport, LocalizeOptions,
    Trends, WindowEcho, XiProvenance,
};

/// Seed `g̃` of the radiating-source step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmSeed {
    /// Divergence-free part of `ε⁻¹ curl Ψ` (E) or `μ⁻¹ curl Ψ` (H), with
    /// `Ψ = amplitude·sin²(π d/τ)` on the shell, `d` the travel time to `B`.
    CurlBump { amplitude: f64 },
    /// Values on the shell dofs, in the order of [`EmFinalTimeOp::shell`].
    Values(Vec<f64>),
}

impl Default for EmSeed {
    fn default() -> Self {
        EmSeed::CurlBump { amplitude: 1.0 }
    }
}

/// Parameters of ξ for a Maxwell target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmXiRecipe {
    pub field: Field,
    /// Radiation time; `None` takes half of the admissible bound.
    pub tau: Option<f64>,
    pub beta: f64,
    pub seed: EmSeed,
}

/// ξ together with the radiating source it came from.
#[derive(Clone, Debug)]
pub struct EmXiConstruction {
    pub xi: EmBoundarySeries,
    /// Tikhonov source on `B × [σ, σ+τ]`, level-major.
    pub source: Vec<f64>,
    /// The seed actually used, on the shell dofs.
    pub seed: Vec<f64>,
    pub sigma: f64,
    pub provenance: XiProvenance,
    pub feasibility: FeasibilityReport,
}

fn feasibility(problem: &EmProblem, windows: Intervals, mode: FeasibilityMode, region: &Region) -> Result<FeasibilityReport> {
    let y = problem.yee();
    let ttm = travel_time_map(y.grid(), &problem.coeff().node_speed(y), problem.gamma().node_patch())?;
    let report = check_feasibility(&ttm, &windows, mode, region);
    if report.passed {
        Ok(report)
    } else {
        Err(Error::Feasibility(Box::new(report)))
    }
}

fn observed(field: Field) -> Observed {
    match field {
        Field::E => Observed::E,
        Field::H => Observed::H,
    }
}

/// The curl-bump seed on the shell of `t`, before projection.
fn curl_bump(problem: &EmProblem, t: &EmFinalTimeOp, region: &Region, tau: f64, amplitude: f64) -> Result<Vec<f64>> {
    let y = problem.yee();
    let d = travel_times_to(problem, region)?;
    let bump = |time: f64, x: &[f64; 3]| {
        if time < tau && !region.contains(x) {
            amplitude * (PI * time / tau).sin().powi(2)
        } else {
            0.0
        }
    };
    let full = match t.field() {
        Field::E => {
            let psi: Vec<f64> = (0..y.face_count())
                .map(|f| bump(y.face_nodes(f).iter().map(|&v| d[v]).sum::<f64>() / 4.0, &y.face_position(f)))
                .collect();
            let mut g = vec![0.0; y.edge_count()];
            y.curl_t(&psi, &mut g);
            g.iter().zip(problem.coeff().eps()).map(|(g, e)| g / e).collect::<Vec<_>>()
        }
        Field::H => {
            let psi: Vec<f64> = (0..y.edge_count())
                .map(|e| {
                    let (a, b) = y.edge_nodes(e);
                    if problem.is_free_edge(e) {
                        bump(0.5 * (d[a] + d[b]), &y.edge_position(e))
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut g = vec![0.0; y.face_count()];
            y.curl(&psi, &mut g);
            g.iter().zip(problem.coeff().mu()).map(|(g, m)| g / m).collect()
        }
    };
    Ok(t.shell().iter().map(|&k| full[k]).collect())
}

/// `ξ = 𝔼*_{B_{a,b}}[j]` (or `ℍ*`) with `j = (𝕋*𝕋 + β)⁻¹ 𝕋*[g̃]` and
/// `𝕋 = 𝕋_{b−τ,τ}`.
fn radiate_em_xi(
    problem: &Arc<EmProblem>,
    target: &SpaceTimeWindow,
    recipe: &EmXiRecipe,
    tau: f64,
    opts: &SolveOptions,
    feasibility: FeasibilityReport,
) -> Result<EmXiConstruction> {
    if !(recipe.beta > 0.0) {
        return Err(Error::InvalidInput(format!("β = {} must be positive", recipe.beta)));
    }
    let sigma = target.b - tau;
    let t = make_em_t_op(problem, sigma, tau, &target.region, recipe.field)?;
    if t.steps() == 0 {
        return Err(Error::InvalidInput(format!("τ = {tau} is shorter than one time step")));
    }
    let seed = match &recipe.seed {
        EmSeed::CurlBump { amplitude } => t.projector().apply(&curl_bump(problem, &t, &target.region, tau, *amplitude)?),
        EmSeed::Values(v) => {
            if v.len() != t.shell().len() {
                return Err(Error::Shape(format!("seed has {} values for {} shell dofs", v.len(), t.shell().len())));
            }
            v.clone()
        }
    };
    let seed_norm = t.codomain().norm(&seed);
    if !(seed_norm > 0.0) {
        return Err(Error::InvalidInput("the seed field vanishes on the shell".into()));
    }
    let sol = accept_unconverged(tikhonov_solve(&t, recipe.beta, &seed, opts))?;
    let j = sol.x;
    let miss: Vec<f64> = t.apply(&j).iter().zip(&seed).map(|(u, g)| u - g).collect();
    let target_misfit = t.codomain().norm(&miss) / seed_norm;

    let a1 = make_em_op(problem, target, observed(recipe.field), AdjointMode::Exact)?;
    let per = a1.edges().len() + a1.faces().len();
    debug_assert_eq!(per, t.sources().len());
    let mut y = vec![0.0; a1.codomain().dim()];
    let levels = a1.levels();
    for l in 0..=t.steps() {
        let lvl = t.first_level() + l;
        if levels.contains(&lvl) {
            let off = (lvl - levels.start) * per;
            y[off..off + per].copy_from_slice(&j[l * per..(l + 1) * per]);
        }
    }
    let xi = a1.adjoint(&y);
    let xi_norm = a1.domain().norm(&xi);
    let threshold = 1e-12 * a1.codomain().norm(&y);
    if !(xi_norm > threshold) {
        return Err(Error::DegenerateXi { norm: xi_norm, threshold });
    }
    let provenance = XiProvenance {
        construction: format!(
            "adjoint of the {:?} target window applied to the Tikhonov source radiating the divergence-free seed",
            recipe.field
        ),
        tau,
        tau_snapped: problem.time().time(t.steps()),
        beta: recipe.beta,
        shell_size: t.shell().len(),
        tikhonov_iterations: sol.iterations,
        tikhonov_residual: sol.residual,
        tikhonov_converged: sol.converged,
        target_misfit,
        xi_norm,
    };
    let xi = EmBoundarySeries::from_values(problem.gamma().len(), problem.time().nt(), xi)?;
    Ok(EmXiConstruction { xi, source: j, seed, sigma, provenance, feasibility })
}

/// ξ for localization in space; `tau = None` takes `½·min(b−a, b−dist(Ω,Γ))`.
pub fn build_em_xi(
    problem: &Arc<EmProblem>,
    target: &SpaceTimeWindow,
    recipe: &EmXiRecipe,
    opts: &SolveOptions,
) -> Result<EmXiConstruction> {
    let windows = Intervals { a: target.a, b: target.b, c: None, d: None };
    let report = feasibility(problem, windows, FeasibilityMode::Space, &target.region)?;
    let bound = (target.b - target.a).min(target.b - report.dist_omega_gamma);
    let tau = recipe.tau.unwrap_or(0.5 * bound);
    if !(tau > 0.0 && tau < bound) {
        return Err(Error::InvalidInput(format!("τ = {tau} must lie in (0, {bound})")));
    }
    radiate_em_xi(problem, target, recipe, tau, opts, report)
}

/// `‖E‖_ε` and `‖H‖_μ` over each window, from one fresh forward solve.
pub fn em_window_norms(problem: &EmProblem, f: &[f64], windows: &[&EmWindowOp]) -> Vec<(f64, f64)> {
    let steps = windows.iter().map(|w| w.levels().end.saturating_sub(1)).max().unwrap_or(0);
    let (eps, mu) = (problem.coeff().eps(), problem.coeff().mu());
    let mut sums = vec![(0.0, 0.0); windows.len()];
    problem.propagate(steps, Some(f), &mut |_, _, _| {}, &mut |n, e, h| {
        for (sum, w) in sums.iter_mut().zip(windows) {
            if w.levels().contains(&n) {
                sum.0 += w.edges().iter().map(|&d| eps[d] * e[d] * e[d]).sum::<f64>();
                sum.1 += w.faces().iter().map(|&d| mu[d] * h[d] * h[d]).sum::<f64>();
            }
        }
    });
    let weight = problem.yee().volume() * problem.time().dt();
    sums.iter().map(|(a, b)| ((a * weight).sqrt(), (b * weight).sqrt())).collect()
}

/// Per-k norms: the chosen field over the target window, both fields combined
/// over the suppression window, and all four components.
fn em_knorms(problem: &EmProblem, f: &[f64], k: f64, field: Field, target: &EmWindowOp, suppress: &EmWindowOp) -> KNorms {
    let n = em_window_norms(problem, f, &[target, suppress]);
    let ((te, th), (se, sh)) = (n[0], n[1]);
    let t = match field {
        Field::E => te,
        Field::H => th,
    };
    let mut kn = KNorms::new(k, t, se.hypot(sh));
    for (name, v) in [("target_E", te), ("target_H", th), ("suppression_E", se), ("suppression_H", sh)] {
        kn.components.insert(name.into(), v);
    }
    kn
}

fn evaluate_sequence(
    problem: &EmProblem,
    out: &LocalizerOutput,
    ks: &[f64],
    field: Field,
    target: &EmWindowOp,
    suppress: &EmWindowOp,
) -> Vec<KNorms> {
    out.steps
        .par_iter()
        .zip(ks.par_iter())
        .map(|(step, &k)| {
            let mut kn = em_knorms(problem, &step.xi_alpha, k, field, target, suppress);
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

fn sequence_of(problem: &EmProblem, out: &LocalizerOutput) -> Result<Vec<EmBoundarySeries>> {
    out.steps
        .iter()
        .map(|s| EmBoundarySeries::from_values(problem.gamma().len(), problem.time().nt(), s.xi_alpha.clone()))
        .collect()
}

fn em_notes() -> Vec<String> {
    let mut notes = standard_notes();
    notes.push("boundary data carry the discrete H¹-in-time × L²(Γ) product in place of the trace-space norm".into());
    notes.push("components lists the ε-weighted E and μ-weighted H norms over both windows".into());
    notes
}

fn recipe(field: Field, opts: &LocalizeOptions, seed: &EmSeed) -> EmXiRecipe {
    EmXiRecipe { field, tau: opts.tau, beta: opts.beta, seed: seed.clone() }
}

/// `field` large on `B_{a,b}`, both fields small on `D × (0,T)`.
pub fn localize_space_em(
    problem: &Arc<EmProblem>,
    field: Field,
    target: &SpaceTimeWindow,
    d_region: &Region,
    seed: &EmSeed,
    opts: &LocalizeOptions,
) -> Result<Localization> {
    opts.validate()?;
    check_disjoint(&target.region, d_region)?;
    if !d_region.is_interior() {
        return Err(Error::InvalidInput("D must stay away from the boundary of the domain".into()));
    }
    let xi = build_em_xi(problem, target, &recipe(field, opts, seed), &opts.solve_options())?;
    let d_window = SpaceTimeWindow::new(d_region.clone(), 0.0, problem.time().final_time(), problem.time())?;
    localize_with(problem, field, target, d_window, xi, opts, "maxwell/localize-space", None)
}

#[allow(clippy::too_many_arguments)]
fn localize_with(
    problem: &Arc<EmProblem>,
    field: Field,
    target: &SpaceTimeWindow,
    suppress: SpaceTimeWindow,
    xi: EmXiConstruction,
    opts: &LocalizeOptions,
    pipeline: &str,
    delta: Option<f64>,
) -> Result<Localization> {
    let a1 = make_em_op(problem, target, observed(field), AdjointMode::Exact)?;
    let a2 = make_em_op(problem, &suppress, Observed::L, AdjointMode::Exact)?;
    let out = localizer_sequence(&Adjoint(&a1), &Adjoint(&a2), xi.xi.values(), &opts.localizer())?;
    let full_target = make_em_op(problem, target, Observed::L, AdjointMode::Exact)?;
    let steps = evaluate_sequence(problem, &out, &opts.k_schedule, field, &full_target, &a2);
    let mut parameters = opts.parameters(delta.is_none().then_some(xi.provenance.tau), delta);
    parameters.sigma = Some(xi.sigma);
    let report = LocalizationReport {
        pipeline: format!("{pipeline}/{field:?}"),
        target: WindowEcho::of(target, problem.time()),
        suppression: WindowEcho::of(&suppress, problem.time()),
        feasibility: xi.feasibility.clone(),
        parameters,
        xi: Some(xi.provenance.clone()),
        trends: Trends::of(&steps),
        steps,
        notes: em_notes(),
    };
    Ok(Localization { report, sequence: sequence_of(problem, &out)?, xi: Some(xi.xi) })
}

/// `ε⁻¹ curl Ψ` with `Ψ = sin²(π/2·min(1, depth/r))` on the faces inside `B`,
/// `depth` the travel time to the complement of `B` and `r` half its maximum.
fn inner_curl_bump(problem: &EmProblem, region: &Region) -> Result<Vec<f64>> {
    let y = problem.yee();
    let grid = y.grid();
    let inside = region.node_mask();
    let outside: Vec<usize> = (0..inside.len()).filter(|&i| !inside[i]).collect();
    if outside.is_empty() {
        return Err(Error::InvalidInput("B covers the whole domain".into()));
    }
    let depth = travel_times_from(grid, &problem.coeff().node_speed(y), &outside)?;
    let r = 0.5 * depth.iter().copied().fold(0.0, f64::max);
    if !(r > 0.0) {
        return Err(Error::InvalidInput("B contains no grid node".into()));
    }
    let psi: Vec<f64> = (0..y.face_count())
        .map(|f| {
            let d = y.face_nodes(f).iter().map(|&v| depth[v]).sum::<f64>() / 4.0;
            (0.5 * PI * (d / r).min(1.0)).sin().powi(2)
        })
        .collect();
    let mut g = vec![0.0; y.edge_count()];
    y.curl_t(&psi, &mut g);
    Ok(g.iter().zip(problem.coeff().eps()).map(|(g, e)| g / e).collect())
}

/// Case I (`d < a`): `f_k = k·f`, `f` driving the divergence-free part of an
/// `ε⁻¹ curl Ψ` bump inside `B` at `t = b−d`, translated by `d`.
pub fn localize_time_em_case_i(
    problem: &Arc<EmProblem>,
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
    let p_op = make_em_p_op(problem, tau)?;
    let full = inner_curl_bump(problem, &target.region)?;
    let phi = p_op.projector().apply(&p_op.edges().iter().map(|&e| full[e]).collect::<Vec<_>>());
    let phi_norm = p_op.codomain().norm(&phi);
    if !(phi_norm > 0.0) {
        return Err(Error::InvalidInput("the target field vanishes; B is too small for the grid".into()));
    }
    let sol = accept_unconverged(tikhonov_solve(&p_op, opts.beta, &phi, &opts.solve_options()))?;
    let miss: Vec<f64> = p_op.apply(&sol.x).iter().zip(&phi).map(|(u, e)| u - e).collect();
    let target_misfit = p_op.codomain().norm(&miss) / phi_norm;

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
    let l_b = make_em_op(problem, target, Observed::L, AdjointMode::Exact)?;
    let l_s = make_em_op(problem, &supp_window, Observed::L, AdjointMode::Exact)?;
    let base_norms = &em_window_norms(problem, &base, &[&l_b, &l_s]);
    if !(base_norms[0].0 > 0.0) {
        return Err(Error::DegenerateXi { norm: base_norms[0].0, threshold: 0.0 });
    }

    let sequence: Vec<Vec<f64>> = opts.k_schedule.iter().map(|&k| base.iter().map(|v| k * v).collect()).collect();
    let steps: Vec<KNorms> = sequence
        .par_iter()
        .zip(opts.k_schedule.par_iter())
        .map(|(f, &k)| {
            let mut kn = em_knorms(problem, f, k, Field::E, &l_b, &l_s);
            kn.operator_target_norm = Some(k * base_norms[0].0);
            kn.operator_suppression_norm = Some(k * base_norms[1].0.hypot(base_norms[1].1));
            kn
        })
        .collect();
    let provenance = XiProvenance {
        construction: "boundary Tikhonov source against the divergence-free part of a curl bump in B, translated by d"
            .into(),
        tau,
        tau_snapped: time.time(p_op.step()),
        beta: opts.beta,
        shell_size: phi.iter().filter(|v| **v != 0.0).count(),
        tikhonov_iterations: sol.iterations,
        tikhonov_residual: sol.residual,
        tikhonov_converged: sol.converged,
        target_misfit,
        xi_norm: p_op.domain().norm(&sol.x),
    };
    let mut notes = em_notes();
    notes.push("f_k = k·f; the data vanish before t = d, so the suppression window sees exact zeros".into());
    let report = LocalizationReport {
        pipeline: "maxwell/localize-time-I/E".into(),
        target: WindowEcho::of(target, time),
        suppression: WindowEcho::of(&supp_window, time),
        feasibility: report,
        parameters: opts.parameters(Some(tau), None),
        xi: Some(provenance),
        trends: Trends::of(&steps),
        steps,
        notes,
    };
    let sequence =
        sequence.into_iter().map(|v| EmBoundarySeries::from_values(ng, nt, v)).collect::<Result<_>>()?;
    Ok(Localization { report, sequence, xi: Some(EmBoundarySeries::from_values(ng, nt, base)?) })
}

/// Case II (`c > b`): `field` large on `B_{a,b}`, both fields small on `B_{c,d}`.
pub fn localize_time_em_case_ii(
    problem: &Arc<EmProblem>,
    field: Field,
    target: &SpaceTimeWindow,
    c: f64,
    d: f64,
    seed: &EmSeed,
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
    let xi = radiate_em_xi(problem, target, &recipe(field, opts, seed), delta, &opts.solve_options(), report)?;
    let supp_window = SpaceTimeWindow::new(target.region.clone(), c, d, time)?;
    localize_with(problem, field, target, supp_window, xi, opts, "maxwell/localize-time-II", Some(delta))
}

/// The projector onto the seed space of `𝕋_{σ,τ}`, for callers supplying
/// [`EmSeed::Values`].
pub fn seed_projector(
    problem: &Arc<EmProblem>,
    target: &SpaceTimeWindow,
    field: Field,
    tau: f64,
) -> Result<(Vec<usize>, DivFreeProjector)> {
    let t = make_em_t_op(problem, target.b - tau, tau, &target.region, field)?;
    Ok((t.shell().to_vec(), t.projector().clone()))
}
