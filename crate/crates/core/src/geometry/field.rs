use serde::{Deserialize, Serialize};

/// Closed-form smooth scalar field: a constant plus Gaussian bumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothField {
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<GaussianBump>,
}

/// `amplitude · exp(−|x − center|² / width²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

impl SmoothField {
    pub fn constant(value: f64) -> Self {
        Self { constant: value, bumps: Vec::new() }
    }

    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        self.constant
            + self
                .bumps
                .iter()
                .map(|b| {
                    let r2: f64 = b.center.iter().enumerate().map(|(a, c)| (p[a] - c).powi(2)).sum();
                    b.amplitude * (-r2 / (b.width * b.width)).exp()
                })
                .sum::<f64>()
    }
}
