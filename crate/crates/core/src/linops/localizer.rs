use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::LinearMap;
use super::solve::{accept_unconverged, cg_gram_solve_from, SolveOptions};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    /// Strictly decreasing regularization parameters.
    pub alphas: Vec<f64>,
    pub cg_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_max_iter: Option<usize>,
}

impl Default for LocalizerConfig {
    /// `α_j = 10^{−j}`, `j = 0…8`.
    fn default() -> Self {
        Self { alphas: (0..=8).map(|j| 10f64.powi(-j)).collect(), cg_tol: 1e-10, cg_max_iter: None }
    }
}

impl LocalizerConfig {
    /// Schedule `α = 1/k` for increasing `k`.
    pub fn from_k_schedule(ks: &[f64]) -> Self {
        Self { alphas: ks.iter().map(|k| 1.0 / k).collect(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidInput("regularization schedule is empty".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput("regularization parameters must be positive and finite".into()));
        }
        if self.alphas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("α schedule must be strictly decreasing (k strictly increasing)".into()));
        }
        if !(self.cg_tol > 0.0) {
            return Err(Error::InvalidInput(format!("cg_tol = {} must be positive", self.cg_tol)));
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.cg_tol, max_iter: self.cg_max_iter }
    }
}

#[derive(Clone, Debug)]
pub struct LocalizerStep {
    pub alpha: f64,
    pub xi_alpha: Vec<f64>,
    /// `‖𝒜₁* ξ_α‖`.
    pub norm_a1: f64,
    /// `‖𝒜₂* ξ_α‖`.
    pub norm_a2: f64,
    /// `⟨ξ, η_α⟩` evaluated directly.
    pub pairing: f64,
    /// `‖𝒜₂* η_α‖² + α‖η_α‖²`, equal to the pairing in exact arithmetic.
    pub pairing_identity: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct LocalizerOutput {
    pub steps: Vec<LocalizerStep>,
}

/// `ξ_α = η_α / ⟨ξ,η_α⟩^{3/4}` with `η_α = (𝒜₂𝒜₂* + α)⁻¹ ξ`.
///
/// When `ξ ∈ ran 𝒜₁ ∖ ran 𝒜₂`, `‖𝒜₁*ξ_α‖ → ∞` and `‖𝒜₂*ξ_α‖ → 0` as `α → 0`.
/// Each solve is warm-started from the previous `η`.
pub fn localizer_sequence(
    a1: &dyn LinearMap,
    a2: &dyn LinearMap,
    xi: &[f64],
    cfg: &LocalizerConfig,
) -> Result<LocalizerOutput> {
    cfg.validate()?;
    let space = a2.codomain();
    if a1.codomain().dim() != space.dim() || xi.len() != space.dim() {
        return Err(Error::Shape(format!(
            "𝒜₁, 𝒜₂ and ξ must share one space: {}, {}, {}",
            a1.codomain().dim(),
            space.dim(),
            xi.len()
        )));
    }
    if space.norm(xi) == 0.0 {
        return Err(Error::InvalidInput("ξ is zero".into()));
    }
    let opts = cfg.solve_options();
    let mut steps = Vec::with_capacity(cfg.alphas.len());
    let mut warm: Option<Vec<f64>> = None;
    for &alpha in &cfg.alphas {
        let sol = accept_unconverged(cg_gram_solve_from(a2, alpha, xi, warm.as_deref(), &opts))?;
        let eta = sol.x;
        let pairing = space.dot(xi, &eta);
        if !(pairing > 0.0) {
            return Err(Error::NumericalBreakdown(format!("⟨ξ,η_α⟩ = {pairing:e} at α = {alpha:e}")));
        }
        let a2_eta = a2.adjoint(&eta);
        let a2_norm = a2.domain().norm(&a2_eta);
        let pairing_identity = a2_norm * a2_norm + alpha * space.dot(&eta, &eta);
        let scale = pairing.powf(-0.75);
        let xi_alpha: Vec<f64> = eta.iter().map(|v| v * scale).collect();
        let norm_a1 = a1.domain().norm(&a1.adjoint(&xi_alpha));
        steps.push(LocalizerStep {
            alpha,
            norm_a1,
            norm_a2: a2_norm * scale,
            pairing,
            pairing_identity,
            iterations: sol.iterations,
            converged: sol.converged,
            xi_alpha,
        });
        warm = Some(eta);
    }
    Ok(LocalizerOutput { steps })
}

#[derive(Clone, Debug)]
pub struct ProbeResult {
    /// Largest observed `‖𝒜₁*ξ‖ / ‖𝒜₂*ξ‖` (infinite when `𝒜₂*ξ = 0`).
    pub max_ratio: f64,
    pub argmax: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Samples `‖𝒜₁*ξ‖/‖𝒜₂*ξ‖` over random `ξ`. A bounded supremum is the range
/// inclusion `ran 𝒜₁ ⊆ ran 𝒜₂`; growth with the trial count suggests failure.
pub fn range_inclusion_probe(a1: &dyn LinearMap, a2: &dyn LinearMap, trials: usize, seed: u64) -> Result<ProbeResult> {
    let n = a2.codomain().dim();
    if a1.codomain().dim() != n {
        return Err(Error::Shape("𝒜₁ and 𝒜₂ must share their codomain".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trials);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..trials {
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let num = a1.domain().norm(&a1.adjoint(&xi));
        let den = a2.domain().norm(&a2.adjoint(&xi));
        let r = if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 };
        if r > best.0 {
            best = (r, xi);
        }
        ratios.push(r);
    }
    Ok(ProbeResult { max_ratio: best.0, argmax: best.1, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::DenseMap;

    #[test]
    fn closed_form_two_vector_example() {
        let a1 = DenseMap::new(2, 1, vec![1.0, 0.0]);
        let a2 = DenseMap::new(2, 1, vec![0.0, 1.0]);
        let cfg = LocalizerConfig { alphas: vec![1.0, 1e-2, 1e-4], ..Default::default() };
        let out = localizer_sequence(&a1, &a2, &[1.0, 0.0], &cfg).unwrap();
        for s in &out.steps {
            let expected = s.alpha.powf(-0.25);
            assert!((s.xi_alpha[0] - expected).abs() <= 1e-10 * expected);
            assert_eq!(s.xi_alpha[1], 0.0);
            assert!((s.norm_a1 - expected).abs() <= 1e-10 * expected);
            assert_eq!(s.norm_a2, 0.0);
        }
    }

    #[test]
    fn included_range_stays_bounded() {
        let id = DenseMap::identity(3);
        let out = localizer_sequence(&id, &id, &[1.0, 2.0, -1.0], &LocalizerConfig::default()).unwrap();
        // ξ_α → ξ/|ξ|^{3/2} as α → 0 when 𝒜₂ = I.
        let bound = 6f64.powf(-0.25) * 1.01;
        assert!(out.steps.iter().all(|s| s.norm_a1 <= bound && s.norm_a2 <= bound));
    }

    #[test]
    fn rejects_zero_xi_and_bad_schedules() {
        let id = DenseMap::identity(2);
        assert!(matches!(
            localizer_sequence(&id, &id, &[0.0, 0.0], &LocalizerConfig::default()),
            Err(Error::InvalidInput(_))
        ));
        let bad = LocalizerConfig { alphas: vec![1.0, 1.0], ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(LocalizerConfig::from_k_schedule(&[1.0, 10.0, 100.0]).validate().is_ok());
    }

    #[test]
    fn probe_scaling_and_equality() {
        let a = DenseMap::new(3, 2, vec![1.0, 2.0, 0.0, 1.0, 4.0, 0.0]);
        let p = range_inclusion_probe(&a, &a, 20, 1).unwrap();
        assert!(p.ratios.iter().all(|r| (r - 1.0).abs() < 1e-14));
        let p2 = range_inclusion_probe(&a.scaled(2.0), &a, 20, 1).unwrap();
        assert!(p2.ratios.iter().all(|r| (r - 2.0).abs() < 1e-14));
    }

    #[test]
    fn probe_grows_when_ranges_differ() {
        let a1 = DenseMap::new(2, 1, vec![1.0, 0.0]);
        let a2 = DenseMap::new(2, 1, vec![0.0, 1.0]);
        let few = range_inclusion_probe(&a1, &a2, 10, 3).unwrap();
        let many = range_inclusion_probe(&a1, &a2, 10_000, 3).unwrap();
        assert!(many.max_ratio >= few.max_ratio);
        assert!(many.max_ratio > 100.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn pairing_grows_and_energy_identity_holds(
            m1 in proptest::collection::vec(-1.0f64..1.0, 8),
            m2 in proptest::collection::vec(-1.0f64..1.0, 8),
            z in proptest::collection::vec(-1.0f64..1.0, 2),
        ) {
            let a1 = DenseMap::new(4, 2, m1);
            let a2 = DenseMap::new(4, 2, m2);
            let xi = a1.apply(&z);
            proptest::prop_assume!(xi.iter().map(|v| v * v).sum::<f64>() > 1e-4);
            let cfg = LocalizerConfig { alphas: (0..=6).map(|j| 10f64.powi(-j)).collect(), ..Default::default() };
            let out = localizer_sequence(&a1, &a2, &xi, &cfg).unwrap();
            for w in out.steps.windows(2) {
                proptest::prop_assert!(w[1].pairing > w[0].pairing);
            }
            // ⟨ξ,ξ_α⟩² (‖𝒜₂*ξ_α‖² + α‖ξ_α‖²) = 1 for every α.
            for s in &out.steps {
                let pair: f64 = xi.iter().zip(&s.xi_alpha).map(|(a, b)| a * b).sum();
                let sq: f64 = s.xi_alpha.iter().map(|v| v * v).sum();
                let identity = pair * pair * (s.norm_a2 * s.norm_a2 + s.alpha * sq);
                proptest::prop_assert!((identity - 1.0).abs() <= 1e-8, "alpha {} identity {}", s.alpha, identity);
            }
        }
    }
}
