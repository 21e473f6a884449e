use std::sync::Arc;

use wavefocus::geometry::{build_patch, build_region, Face, Grid, PatchSpec, Shape, TimeGrid};
use wavefocus::linops::{localizer_sequence, tikhonov_solve, Adjoint, LinearMap, LocalizerConfig, SolveOptions};
use wavefocus::wave::{make_l_op, make_t_op, AdjointMode, CoefficientField, SpaceTimeWindow, WaveProblem};
use wavefocus::wave_localize::{
    build_xi_space, localize_space, localize_time_case_i, localize_time_case_ii, LocalizeOptions,
};
use wavefocus::Error;

fn problem(n: usize, t_end: f64) -> Arc<WaveProblem> {
    let g = Grid::unit(2, n).unwrap();
    let coeff = CoefficientField::constant(&g, 1.0, 0.0).unwrap();
    let gamma = build_patch(&g, &PatchSpec::faces(&[Face::XMin])).unwrap();
    let time = TimeGrid::fitting(t_end, WaveProblem::max_stable_dt(&g, &coeff)).unwrap();
    Arc::new(WaveProblem::new(g, time, coeff, gamma).unwrap())
}

fn ball(p: &WaveProblem, c: [f64; 2], r: f64) -> wavefocus::geometry::Region {
    build_region(p.grid(), &Shape::ball(&c, r)).unwrap()
}

fn quick() -> LocalizeOptions {
    LocalizeOptions { k_schedule: vec![1.0, 10.0, 100.0], cg_tol: 1e-8, ..Default::default() }
}

#[test]
fn xi_is_nonzero_when_b_touches_gamma() {
    let p = problem(24, 2.0);
    let b = ball(&p, [0.1, 0.5], 0.12);
    let w = SpaceTimeWindow::new(b, 0.9, 1.6, p.time()).unwrap();
    let xi = build_xi_space(&p, &w, 1e-3, None, &SolveOptions::default()).unwrap();
    assert!(xi.provenance.xi_norm > 0.0);
    assert!(xi.source.iter().any(|&v| v != 0.0));
}

#[test]
fn late_enough_window_is_required() {
    let p = problem(24, 2.0);
    let w = SpaceTimeWindow::new(ball(&p, [0.3, 0.5], 0.1), 0.2, 0.8, p.time()).unwrap();
    let err = build_xi_space(&p, &w, 1e-3, None, &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Feasibility(_)), "{err}");
    let w = SpaceTimeWindow::new(ball(&p, [0.3, 0.5], 0.1), 0.9, 1.4, p.time()).unwrap();
    assert!(matches!(build_xi_space(&p, &w, 1e-3, Some(0.6), &SolveOptions::default()), Err(Error::InvalidInput(_))));
}

#[test]
fn tikhonov_residual_shrinks_with_beta() {
    let p = problem(24, 1.0);
    let t = make_t_op(&p, 0.2, &ball(&p, [0.5, 0.5], 0.1)).unwrap();
    let ones = vec![1.0; t.shell().len()];
    let opts = SolveOptions { tol: 1e-12, max_iter: None };
    let mut last = f64::INFINITY;
    for j in 1..=6 {
        let g = tikhonov_solve(&t, 10f64.powi(-j), &ones, &opts).unwrap().x;
        let res: Vec<f64> = t.apply(&g).iter().map(|v| v - 1.0).collect();
        let r = t.codomain().norm(&res);
        assert!(r <= last * (1.0 + 1e-9), "β = 1e-{j}: {r} > {last}");
        last = r;
    }
}

#[test]
fn overlapping_regions_are_rejected() {
    let p = problem(24, 2.0);
    let w = SpaceTimeWindow::new(ball(&p, [0.3, 0.5], 0.1), 0.9, 1.4, p.time()).unwrap();
    let err = localize_space(&p, &w, &ball(&p, [0.35, 0.5], 0.1), &quick()).unwrap_err();
    assert!(matches!(err, Error::RegionOverlap(n) if n > 0));
    let edge = build_region(p.grid(), &Shape::boxed(&[0.8, 0.0], &[1.0, 1.0])).unwrap();
    assert!(matches!(localize_space(&p, &w, &edge, &quick()), Err(Error::InvalidInput(_))));
}

#[test]
fn space_localization_ratio_grows() {
    let p = problem(24, 2.0);
    let w = SpaceTimeWindow::new(ball(&p, [0.3, 0.5], 0.1), 0.9, 1.4, p.time()).unwrap();
    let loc = localize_space(&p, &w, &ball(&p, [0.7, 0.5], 0.2), &quick()).unwrap();
    let r = &loc.report;
    assert_eq!(loc.sequence.len(), 3);
    assert!(r.trends.ratio_gain.unwrap() > 2.0, "{:?}", r.trends);
    assert!(r.trends.max_operator_mismatch.unwrap() <= 1e-12);
    for s in &r.steps {
        let (p1, p2) = (s.pairing.unwrap(), s.pairing_identity.unwrap());
        assert!(p1 > 0.0 && ((p1 - p2) / p1).abs() <= 1e-8, "{p1} vs {p2}");
    }
}

#[test]
fn doubling_xi_scales_the_sequence_by_inverse_root_two() {
    let p = problem(20, 1.6);
    let w = SpaceTimeWindow::new(ball(&p, [0.3, 0.5], 0.1), 0.9, 1.4, p.time()).unwrap();
    let d = SpaceTimeWindow::new(ball(&p, [0.7, 0.5], 0.15), 0.0, 1.6, p.time()).unwrap();
    let xi = build_xi_space(&p, &w, 1e-3, None, &SolveOptions::default()).unwrap().xi;
    let l_b = make_l_op(&p, &w, AdjointMode::Exact).unwrap();
    let l_d = make_l_op(&p, &d, AdjointMode::Exact).unwrap();
    let cfg = LocalizerConfig::from_k_schedule(&[1.0, 100.0]);
    let one = localizer_sequence(&Adjoint(&l_b), &Adjoint(&l_d), xi.values(), &cfg).unwrap();
    let twice: Vec<f64> = xi.values().iter().map(|v| 2.0 * v).collect();
    let two = localizer_sequence(&Adjoint(&l_b), &Adjoint(&l_d), &twice, &cfg).unwrap();
    let s = 2f64.powf(-0.5);
    for (a, b) in one.steps.iter().zip(&two.steps) {
        let scale = a.xi_alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.xi_alpha.iter().zip(&b.xi_alpha) {
            assert!((s * x - y).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn case_one_is_silent_before_d_and_linear_in_k() {
    let p = problem(24, 2.0);
    let w = SpaceTimeWindow::new(ball(&p, [0.5, 0.5], 0.1), 1.3, 1.6, p.time()).unwrap();
    let loc = localize_time_case_i(&p, &w, 0.0, 0.2, &quick()).unwrap();
    let base = loc.report.steps[0].target_norm;
    assert!(base > 0.0);
    for s in &loc.report.steps {
        assert_eq!(s.suppression_norm.to_bits(), 0);
        assert!(s.suppressed_to_zero);
        assert!((s.target_norm - s.k * base).abs() <= 1e-12 * s.target_norm);
    }
    let early = SpaceTimeWindow::new(ball(&p, [0.5, 0.5], 0.1), 0.8, 1.0, p.time()).unwrap();
    assert!(matches!(localize_time_case_i(&p, &early, 0.0, 0.2, &quick()), Err(Error::Feasibility(_))));
    assert!(matches!(localize_time_case_i(&p, &w, 1.0, 1.4, &quick()), Err(Error::InvalidInput(_))));
}

#[test]
fn case_two_gates() {
    let p = problem(24, 2.0);
    let b = ball(&p, [0.5, 0.5], 0.08);
    let w = SpaceTimeWindow::new(b.clone(), 0.9, 1.2, p.time()).unwrap();
    assert!(matches!(localize_time_case_ii(&p, &w, 1.1, 1.5, &quick()), Err(Error::InvalidInput(_))));
    let fat = SpaceTimeWindow::new(ball(&p, [0.5, 0.5], 0.3), 0.9, 1.2, p.time()).unwrap();
    let err = localize_time_case_ii(&p, &fat, 1.6, 1.9, &quick()).unwrap_err();
    match err {
        Error::Feasibility(r) => assert!(r.conditions.iter().any(|c| c.name.starts_with("inradius") && !c.passed)),
        e => panic!("unexpected {e}"),
    }
    let loc = localize_time_case_ii(&p, &w, 1.6, 1.9, &quick()).unwrap();
    assert!(loc.report.trends.ratio_gain.unwrap() > 1.0);
    assert_eq!(loc.report.parameters.delta, Some(0.5 * (1.2 - loc.report.feasibility.dist_omega_gamma)));
}
