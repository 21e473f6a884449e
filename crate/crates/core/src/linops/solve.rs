use super::map::{axpy, Gram, LinearMap};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the problem dimension.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    /// Relative residual before each iteration and after the last.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Turns an iteration-cap error into an unconverged solution, logging a warning.
pub fn accept_unconverged(result: Result<Solution>) -> Result<Solution> {
    match result {
        Err(Error::MaxIterations { iterate, residual, iterations }) => {
            log::warn!("solver stopped at the iteration cap ({iterations}) with relative residual {residual:.3e}");
            Ok(Solution { x: *iterate, iterations, residual, history: Vec::new(), converged: false })
        }
        other => other,
    }
}

/// Conjugate residuals for `K x = b` with `K` self-adjoint and positive
/// definite in `gram`.
///
/// This member of the conjugate-gradient family minimizes the residual norm
/// over the Krylov space, so the residual history is monotone. A nonpositive
/// `⟨r, K r⟩` reveals an indefinite operator.
pub fn conjugate_residual(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    gram: &Gram,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<Solution> {
    let n = gram.dim();
    if b.len() != n {
        return Err(Error::Shape(format!("right-hand side has length {}, space has dimension {n}", b.len())));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let b_norm = gram.norm(b);
    if b_norm == 0.0 {
        return Ok(Solution { x: vec![0.0; n], iterations: 0, residual: 0.0, history: vec![0.0], converged: true });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => return Err(Error::Shape(format!("initial guess has length {}, expected {n}", x0.len()))),
        None => vec![0.0; n],
    };
    let mut r = b.to_vec();
    if x0.is_some() {
        axpy(&mut r, -1.0, &op(&x));
    }
    let mut history = vec![gram.norm(&r) / b_norm];
    if history[0] <= opts.tol {
        return Ok(Solution { x, iterations: 0, residual: history[0], history, converged: true });
    }
    let mut kr = op(&r);
    let mut rho = gram.dot(&r, &kr);
    let mut p = r.clone();
    let mut kp = kr.clone();
    for it in 1..=max_iter {
        let rr = gram.dot(&r, &r);
        if rho <= 0.0 {
            return Err(Error::NotPositiveDefinite(rho / rr));
        }
        let kpkp = gram.dot(&kp, &kp);
        if !(kpkp > 0.0) {
            return Err(Error::NumericalBreakdown(format!("search direction collapsed at iteration {it}")));
        }
        let step = rho / kpkp;
        axpy(&mut x, step, &p);
        axpy(&mut r, -step, &kp);
        let res = gram.norm(&r) / b_norm;
        history.push(res);
        if res <= opts.tol {
            return Ok(Solution { x, iterations: it, residual: res, history, converged: true });
        }
        kr = op(&r);
        let rho_next = gram.dot(&r, &kr);
        let beta = rho_next / rho;
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
            kp[i] = kr[i] + beta * kp[i];
        }
    }
    let residual = *history.last().unwrap();
    Err(Error::MaxIterations { iterate: Box::new(x), residual, iterations: max_iter })
}

/// `η = (A A* + αI)⁻¹ ξ` in the codomain of `A`.
pub fn cg_gram_solve(a: &dyn LinearMap, alpha: f64, xi: &[f64], opts: &SolveOptions) -> Result<Solution> {
    cg_gram_solve_from(a, alpha, xi, None, opts)
}

pub fn cg_gram_solve_from(
    a: &dyn LinearMap,
    alpha: f64,
    xi: &[f64],
    x0: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<Solution> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("regularization α = {alpha} must be positive")));
    }
    let op = |y: &[f64]| {
        let mut out = a.apply(&a.adjoint(y));
        axpy(&mut out, alpha, y);
        out
    };
    conjugate_residual(&op, a.codomain(), xi, x0, opts)
}

/// Tikhonov minimizer `x = (A*A + βI)⁻¹ A* target`.
pub fn tikhonov_solve(a: &dyn LinearMap, beta: f64, target: &[f64], opts: &SolveOptions) -> Result<Solution> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!("regularization β = {beta} must be positive")));
    }
    if target.len() != a.codomain().dim() {
        return Err(Error::Shape(format!(
            "target has length {}, codomain has dimension {}",
            target.len(),
            a.codomain().dim()
        )));
    }
    let rhs = a.adjoint(target);
    let op = |x: &[f64]| {
        let mut out = a.adjoint(&a.apply(x));
        axpy(&mut out, beta, x);
        out
    };
    conjugate_residual(&op, a.domain(), &rhs, None, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::DenseMap;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn gram_solve_closed_forms() {
        let col = DenseMap::new(2, 1, vec![0.0, 1.0]);
        for alpha in [1.0, 0.3, 1e-4] {
            let eta = cg_gram_solve(&col, alpha, &[1.0, 0.0], &SolveOptions::default()).unwrap();
            assert!(close(&eta.x, &[1.0 / alpha, 0.0], 1e-12));
        }
        let xi = [0.5, -2.0, 3.0];
        let eta = cg_gram_solve(&DenseMap::identity(3), 1.0, &xi, &SolveOptions::default()).unwrap();
        assert!(close(&eta.x, &[0.25, -1.0, 1.5], 1e-12));
        let zero = DenseMap::new(3, 2, vec![0.0; 6]);
        let eta = cg_gram_solve(&zero, 0.2, &xi, &SolveOptions::default()).unwrap();
        assert!(close(&eta.x, &[2.5, -10.0, 15.0], 1e-12));
    }

    #[test]
    fn tikhonov_closed_forms() {
        let y = [1.0, -3.0];
        let x = tikhonov_solve(&DenseMap::identity(2), 0.5, &y, &SolveOptions::default()).unwrap();
        assert!(close(&x.x, &[1.0 / 1.5, -3.0 / 1.5], 1e-12));
        let diag = DenseMap::new(2, 2, vec![2.0, 0.0, 0.0, 0.0]);
        let x = tikhonov_solve(&diag, 1.0, &[1.0, 1.0], &SolveOptions::default()).unwrap();
        // (4 + 1) x₀ = 2, (0 + 1) x₁ = 0
        assert!(close(&x.x, &[0.4, 0.0], 1e-12));
        let zero = DenseMap::new(2, 2, vec![0.0; 4]);
        let x = tikhonov_solve(&zero, 1.0, &[1.0, 1.0], &SolveOptions::default()).unwrap();
        assert_eq!(x.x, vec![0.0, 0.0]);
    }

    #[test]
    fn detects_indefinite_operator() {
        let op = |x: &[f64]| vec![x[0], -x[1]];
        let err = conjugate_residual(&op, &Gram::Euclidean(2), &[0.0, 1.0], None, &SolveOptions::default());
        assert!(matches!(err, Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn iteration_cap_is_soft() {
        let a = DenseMap::new(3, 3, vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let opts = SolveOptions { tol: 1e-14, max_iter: Some(1) };
        let err = cg_gram_solve(&a, 1e-3, &[1.0, 2.0, 3.0], &opts);
        assert!(matches!(err, Err(Error::MaxIterations { .. })));
        let sol = accept_unconverged(cg_gram_solve(&a, 1e-3, &[1.0, 2.0, 3.0], &opts)).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.x.len(), 3);
    }

    #[test]
    fn warm_start_from_solution_takes_no_iterations() {
        let a = DenseMap::new(2, 2, vec![2.0, 1.0, 0.0, 1.0]);
        let first = cg_gram_solve(&a, 0.1, &[1.0, 1.0], &SolveOptions::default()).unwrap();
        let again = cg_gram_solve_from(&a, 0.1, &[1.0, 1.0], Some(&first.x), &SolveOptions::default()).unwrap();
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn nonpositive_regularization_is_rejected() {
        let a = DenseMap::identity(2);
        assert!(matches!(cg_gram_solve(&a, 0.0, &[1.0, 0.0], &SolveOptions::default()), Err(Error::InvalidInput(_))));
        assert!(matches!(tikhonov_solve(&a, -1.0, &[1.0, 0.0], &SolveOptions::default()), Err(Error::InvalidInput(_))));
    }
}
