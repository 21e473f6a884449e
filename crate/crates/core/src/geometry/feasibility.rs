use serde::{Deserialize, Serialize};

use super::{region_inradius, Region, TravelTimeMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityMode {
    #[serde(rename = "space")]
    Space,
    #[serde(rename = "time-I")]
    TimeI,
    #[serde(rename = "time-II")]
    TimeII,
}

/// Target interval `(a,b)` and, for the time modes, suppression interval `(c,d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intervals {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

/// One strict inequality `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl Condition {
    fn strict(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs, passed: lhs < rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub mode: FeasibilityMode,
    pub dist_omega_gamma: f64,
    /// `sup_{x∈B} dist(x,∂B)`, the reading of the paper's `dist(B,∂B)` used here.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inradius_b: Option<f64>,
    pub conditions: Vec<Condition>,
    pub passed: bool,
}

impl FeasibilityReport {
    pub fn summary(&self) -> String {
        let failed: Vec<String> = self
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} fails ({:.6} vs {:.6})", c.name, c.lhs, c.rhs))
            .collect();
        if failed.is_empty() {
            "all conditions hold".into()
        } else {
            failed.join(", ")
        }
    }
}

/// Evaluates the hypotheses of the localization theorems. Diagnostic only:
/// callers decide whether a failure is fatal.
pub fn check_feasibility(
    ttm: &TravelTimeMap,
    windows: &Intervals,
    mode: FeasibilityMode,
    b_region: &Region,
) -> FeasibilityReport {
    let dist = ttm.dist_omega_gamma();
    let mut inradius_b = None;
    let nan = f64::NAN;
    let conditions = match mode {
        FeasibilityMode::Space => vec![Condition::strict("dist(Omega,Gamma) < b", dist, windows.b)],
        FeasibilityMode::TimeI => {
            let d = windows.d.unwrap_or(nan);
            vec![
                Condition::strict("d < a", d, windows.a),
                Condition::strict("dist(Omega,Gamma) < b - d", dist, windows.b - d),
            ]
        }
        FeasibilityMode::TimeII => {
            let c = windows.c.unwrap_or(nan);
            let r = region_inradius(ttm.grid(), ttm.speed(), b_region).unwrap_or(f64::INFINITY);
            inradius_b = Some(r);
            vec![
                Condition::strict("b < c", windows.b, c),
                Condition::strict("dist(Omega,Gamma) < b", dist, windows.b),
                Condition::strict("inradius(B) < (c - b)/2", r, (c - windows.b) / 2.0),
            ]
        }
    };
    let passed = conditions.iter().all(|c| c.passed);
    FeasibilityReport { mode, dist_omega_gamma: dist, inradius_b, conditions, passed }
}
