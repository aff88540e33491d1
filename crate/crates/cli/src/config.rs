//! Run configuration. Every default lives here; `config/defaults.json` is a
//! serialized copy and `config/schema.json` documents each field.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every randomized sample point or state.
    pub seed: u64,
    pub spectrum: SpectrumConfig,
    pub basis: BasisConfig,
    pub projectors: ProjectorConfig,
    pub dynamics: DynamicsConfig,
    pub normalize: NormalizeConfig,
    pub kernel: KernelConfig,
    pub limit: LimitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            spectrum: SpectrumConfig::default(),
            basis: BasisConfig::default(),
            projectors: ProjectorConfig::default(),
            dynamics: DynamicsConfig::default(),
            normalize: NormalizeConfig::default(),
            kernel: KernelConfig::default(),
            limit: LimitConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub lambda_max: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { lambda_max: 10.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub lambda_max: f64,
    /// (n_χ, n_ϑ, n_φ) of the product grid.
    pub grid: [usize; 3],
    pub gram_tol: f64,
    pub residual_points: usize,
    pub fd_step: f64,
    pub residual_tol: f64,
    /// Sample points keep this distance from χ, ϑ ∈ {0, π}.
    pub interior_margin: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            lambda_max: 3.5,
            grid: [32, 24, 48],
            gram_tol: 1e-7,
            residual_points: 10,
            fd_step: 1e-3,
            residual_tol: 1e-6,
            interior_margin: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectorConfig {
    pub n_max: u32,
    pub chi_range: [f64; 2],
    pub chi_samples: usize,
    /// χ of the reference point standing in for the pole in the mode sum.
    pub pole_chi: f64,
    pub closed_form_tol: f64,
    pub trace_points: usize,
    pub trace_tol: f64,
    pub idempotency: IdempotencyConfig,
}

impl Default for ProjectorConfig {
    fn default() -> Self {
        Self {
            n_max: 4,
            chi_range: [0.2, 3.0],
            chi_samples: 29,
            pole_chi: 1e-10,
            closed_form_tol: 1e-8,
            trace_points: 20,
            trace_tol: 1e-8,
            idempotency: IdempotencyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdempotencyConfig {
    pub m_bar: f64,
    pub delta: f64,
    pub s: f64,
    pub lambda_max: f64,
    pub mu_nodes: usize,
    pub tol: f64,
}

impl Default for IdempotencyConfig {
    fn default() -> Self {
        Self { m_bar: 1.0, delta: 0.1, s: 10.0, lambda_max: 10.5, mu_nodes: 16, tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub mass: f64,
    pub lambdas: Vec<f64>,
    /// Scale functions of the WKB sweep, `constant:S`, `cycloid:S_max` or `file:path.csv`.
    pub scales: Vec<String>,
    /// Compared span; null selects the middle half of the admissible span.
    pub span: Option<[f64; 2]>,
    /// WKB phase origin; null selects the middle of the compared span.
    pub tau0: Option<f64>,
    pub samples: usize,
    pub ode_tol: f64,
    pub drift_tol: f64,
    /// Allowed ratio of sup error to ∫ indicator dτ.
    pub wkb_ratio: f64,
    /// Present-day Hubble rate and electron mass in s⁻¹ for the magnitude estimate.
    pub hubble_rate: f64,
    pub electron_mass: f64,
    pub magnitude_target: f64,
    pub bound: LifetimeBoundConfig,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            lambdas: vec![1.5, 5.5],
            scales: vec!["cycloid:10".into(), "cycloid:100".into()],
            span: None,
            tau0: None,
            samples: 60,
            ode_tol: 1e-11,
            drift_tol: 1e-8,
            wkb_ratio: 5.0,
            hubble_rate: 2.3e-18,
            electron_mass: 1.24e20,
            magnitude_target: 2e-38,
            bound: LifetimeBoundConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimeBoundConfig {
    pub s_max: f64,
    pub states: usize,
    pub max_twice_lambda: i32,
    pub mass_range: [f64; 2],
    pub panels: usize,
    pub closed_form_tol: f64,
}

impl Default for LifetimeBoundConfig {
    fn default() -> Self {
        Self { s_max: 10.0, states: 20, max_twice_lambda: 11, mass_range: [0.5, 2.0], panels: 96, closed_form_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    pub scales: Vec<String>,
    pub lambda: f64,
    pub mass: f64,
    pub eps: f64,
    pub tau0: f64,
    /// (re, im) of the positive- and negative-frequency WKB coefficients.
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    pub rel_tol: f64,
    /// Cross-term bound relative to the same-frequency term, checked with c₁ = c₂.
    pub cross_tol: f64,
    pub mass_nodes: usize,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        let c2 = (2.0 * PI).powf(-0.5);
        Self {
            scales: vec!["cycloid:200".into(), "constant:200".into()],
            lambda: 1.5,
            mass: 1.0,
            eps: 0.05,
            tau0: PI,
            c1: [0.0, 0.0],
            c2: [c2, 0.0],
            rel_tol: 0.05,
            cross_tol: 1e-2,
            mass_nodes: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub mass: f64,
    pub s: f64,
    pub t: f64,
    pub r: f64,
    /// Mode cutoff; null uses the window decay cutoff.
    pub lambda_max: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub window: WindowSettings,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { mass: 1.0, s: 40.0, t: 0.0, r: 2.0, lambda_max: None, theta: 0.7, phi: 1.9, window: WindowSettings::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSettings {
    pub eta_over_r: f64,
    pub levels: usize,
    pub decades: f64,
}

impl Default for WindowSettings {
    fn default() -> Self {
        let w = frw_dirac::fermionic_projector::WindowConfig::default();
        Self { eta_over_r: w.eta_over_r, levels: w.levels, decades: w.decades }
    }
}

impl From<WindowSettings> for frw_dirac::fermionic_projector::WindowConfig {
    fn from(w: WindowSettings) -> Self {
        Self { eta_over_r: w.eta_over_r, levels: w.levels, decades: w.decades }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub mass: f64,
    pub t: f64,
    /// Distance in units of 1/m.
    pub r: f64,
    /// S in units of 1/m.
    pub s_list: Vec<f64>,
    pub expected_order: f64,
    pub order_tol: f64,
    pub final_rel_tol: f64,
    pub window: WindowSettings,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            t: 0.0,
            r: 2.0,
            s_list: vec![20.0, 40.0, 80.0, 160.0],
            expected_order: 1.0,
            order_tol: 0.3,
            final_rel_tol: 0.05,
            window: WindowSettings::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_code() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/defaults.json");
        assert_eq!(RunConfig::load(&path).unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 3, "limit": {"r": 1.0}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.limit.r, 1.0);
        assert_eq!(cfg.limit.s_list, LimitConfig::default().s_list);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
    }

    fn schema_keys(schema: &serde_json::Value, value: &serde_json::Value, path: &str) {
        let props = &schema["properties"];
        for (k, v) in value.as_object().unwrap() {
            let sub = &props[k];
            assert!(sub.is_object(), "{path}.{k} missing from schema");
            if v.is_object() {
                schema_keys(sub, v, &format!("{path}.{k}"));
            } else {
                assert_eq!(&sub["default"], v, "{path}.{k} default");
            }
        }
    }

    #[test]
    fn schema_documents_every_field() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config");
        let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("schema.json")).unwrap()).unwrap();
        let defaults = serde_json::to_value(RunConfig::default()).unwrap();
        schema_keys(&schema, &defaults, "");
    }
}
