use std::f64::consts::PI;
use std::sync::Arc;

use wavefocus::geometry::{build_region, Face, GaussianBump, Grid, PatchSpec, Shape, SmoothField, TimeGrid};
use wavefocus::linops::LinearMap;
use wavefocus::maxwell::{
    build_em_patch, electric_divergence, em_energy, forward_maxwell, magnetic_divergence, make_em_op, EmBoundarySeries,
    EmCoefficients, EmProblem, Observed, YeeGrid,
};
use wavefocus::wave::{AdjointMode, SpaceTimeWindow};

fn pulse(t: f64, width: f64) -> f64 {
    if t > 0.0 && t < width {
        (PI * t / width).sin().powi(4)
    } else {
        0.0
    }
}

fn cube(n: usize, cfl: f64, final_time: Option<f64>, nt: usize, coeff: impl Fn(&YeeGrid) -> EmCoefficients) -> EmProblem {
    let yee = YeeGrid::new(&Grid::unit(3, n).unwrap()).unwrap();
    let coeff = coeff(&yee);
    let gamma = build_em_patch(&yee, &PatchSpec::faces(&[Face::XMin])).unwrap();
    let dt = cfl * EmProblem::max_stable_dt(&yee, &coeff);
    let time = match final_time {
        Some(t) => TimeGrid::fitting(t, dt).unwrap(),
        None => TimeGrid::new(nt, dt).unwrap(),
    };
    EmProblem::new(yee, time, coeff, gamma).unwrap()
}

fn unit(yee: &YeeGrid) -> EmCoefficients {
    EmCoefficients::constant(yee, 1.0, 1.0).unwrap()
}

fn bumpy(yee: &YeeGrid) -> EmCoefficients {
    let bump = |a, c: f64| SmoothField {
        constant: 1.0,
        bumps: vec![GaussianBump { amplitude: a, center: vec![c, 0.5, 0.5], width: 0.2 }],
    };
    EmCoefficients::from_fields(yee, &bump(0.8, 0.6), &bump(0.3, 0.4)).unwrap()
}

/// Smooth data on every Γ edge, varying along the face.
fn face_pulse(p: &EmProblem, width: f64) -> EmBoundarySeries {
    let y = p.yee();
    let pos: Vec<[f64; 3]> = p.gamma().edges().iter().map(|&e| y.edge_position(e)).collect();
    EmBoundarySeries::from_fn(p.gamma().len(), p.time(), |k, t| {
        let [_, a, b] = pos[k];
        pulse(t, width) * (PI * a).sin() * (PI * b).sin()
    })
}

#[test]
fn energy_is_conserved_after_the_pulse() {
    let steps_after = 1000;
    let pulse_steps = 20;
    let p = cube(10, 0.9, None, pulse_steps + steps_after + 1, bumpy);
    let width = (pulse_steps - 1) as f64 * p.time().dt();
    let m = forward_maxwell(&p, &face_pulse(&p, width)).unwrap();
    let energy = |n: usize| em_energy(&p, m.e.level(n), m.h.level(n), m.h.level(n + 1));
    let e0 = energy(pulse_steps);
    assert!(e0 > 0.0);
    let drift = (pulse_steps..=pulse_steps + steps_after).map(|n| (energy(n) - e0).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-10 * e0, "relative drift {}", drift / e0);
}

#[test]
fn divergence_stays_zero_at_interior_nodes_and_cells() {
    let p = cube(12, 0.9, None, 80, bumpy);
    let width = 30.0 * p.time().dt();
    let m = forward_maxwell(&p, &face_pulse(&p, width)).unwrap();
    let y = p.yee();
    let grid = y.grid();
    let h = grid.min_spacing();
    let interior: Vec<usize> = (0..grid.node_count()).filter(|&v| !grid.is_boundary_node(v)).collect();
    let scale_e = p.coeff().eps().iter().fold(0.0f64, |a, b| a.max(*b)) * m.e.max_abs() / h;
    let scale_h = p.coeff().mu().iter().fold(0.0f64, |a, b| a.max(*b)) * m.h.max_abs() / h;
    assert!(scale_e > 0.0 && scale_h > 0.0);
    for n in 0..=p.time().nt() {
        let de = electric_divergence(&p, m.e.level(n));
        let worst = interior.iter().map(|&v| de[v].abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12 * scale_e, "level {n}: div εE = {worst}");
        let dh = magnetic_divergence(&p, m.h.level(n));
        let worst = dh.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(worst <= 1e-12 * scale_h, "level {n}: div μH = {worst}");
    }
}

#[test]
fn fields_outside_the_stencil_cone_are_bitwise_zero() {
    let p = cube(12, 0.9, None, 14, unit);
    let y = p.yee();
    let k = p.gamma().len() / 2;
    let src = y.edge_position(p.gamma().edges()[k]);
    let f = EmBoundarySeries::from_fn(p.gamma().len(), p.time(), |j, t| if j == k { 1.0 + t } else { 0.0 });
    let m = forward_maxwell(&p, &f).unwrap();
    let h = y.spacing();
    let hops = |x: [f64; 3]| (0..3).map(|a| (x[a] - src[a]).abs() / h[a]).sum::<f64>();
    for n in 0..=p.time().nt() {
        for e in 0..y.edge_count() {
            if hops(y.edge_position(e)) > n as f64 + 1e-9 {
                assert_eq!(m.e.level(n)[e].to_bits(), 0, "E level {n} edge {e}");
            }
        }
        for f in 0..y.face_count() {
            if hops(y.face_position(f)) > n as f64 + 1e-9 {
                assert_eq!(m.h.level(n)[f].to_bits(), 0, "H level {n} face {f}");
            }
        }
    }
}

#[test]
fn forward_solve_is_linear() {
    let p = cube(8, 0.9, None, 40, bumpy);
    let a = face_pulse(&p, 15.0 * p.time().dt());
    let b = EmBoundarySeries::from_fn(p.gamma().len(), p.time(), |k, t| ((k % 7) as f64 - 3.0) * t.sin());
    let combo = EmBoundarySeries::from_values(
        a.dofs(),
        a.nt(),
        a.values().iter().zip(b.values()).map(|(x, y)| 2.0 * x - 0.5 * y).collect(),
    )
    .unwrap();
    let (ma, mb, mc) = (forward_maxwell(&p, &a).unwrap(), forward_maxwell(&p, &b).unwrap(), forward_maxwell(&p, &combo).unwrap());
    let scale = mc.max_abs();
    for (field_a, field_b, field_c) in [(&ma.e, &mb.e, &mc.e), (&ma.h, &mb.h, &mc.h)] {
        for ((x, y), z) in field_a.values().iter().zip(field_b.values()).zip(field_c.values()) {
            assert!((2.0 * x - 0.5 * y - z).abs() <= 1e-12 * scale);
        }
    }
}

/// Relative gap between the exact and continuous adjoints on smooth data.
fn adjoint_gap(n: usize) -> f64 {
    let p = Arc::new(cube(n, 0.5, Some(1.2), 0, unit));
    let y = p.yee();
    let b = build_region(y.grid(), &Shape::ball(&[0.5, 0.5, 0.5], 0.25)).unwrap();
    let w = SpaceTimeWindow::new(b, 0.6, 1.0, p.time()).unwrap();
    let exact = make_em_op(&p, &w, Observed::L, AdjointMode::Exact).unwrap();
    let cont = make_em_op(&p, &w, Observed::L, AdjointMode::Continuous).unwrap();
    let mut data = Vec::new();
    for lvl in exact.levels() {
        let s = (PI * (p.time().time(lvl) - 0.6) / 0.4).sin().powi(2);
        for &e in exact.edges() {
            let (c, _) = y.edge_of(e);
            let x = y.edge_position(e);
            data.push(if c == 1 { s * (3.0 * x[2]).cos() } else { 0.0 });
        }
        for &f in exact.faces() {
            let (c, _) = y.face_of(f);
            let x = y.face_position(f);
            data.push(if c == 2 { s * (3.0 * x[1]).cos() } else { 0.0 });
        }
    }
    let a = exact.adjoint(&data);
    let b = cont.adjoint(&data);
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    exact.domain().norm(&diff) / exact.domain().norm(&a)
}

#[test]
fn continuous_adjoint_approaches_the_exact_one() {
    let e1 = adjoint_gap(8);
    let e2 = adjoint_gap(16);
    let order = (e1 / e2).log2();
    assert!(order >= 1.0, "gaps {e1} {e2}, order {order}");
}
