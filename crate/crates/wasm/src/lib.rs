//! Browser bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust counterpart so it can be tested natively.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use frw_dirac::linalg::{c, Spinor2};
use frw_dirac::s3_dirac::spectrum;
use frw_dirac::spectral_projectors::northpole_coefficients;
use frw_dirac::time_dynamics::{solve_ode, OdeOptions, ScaleFunction, WkbSolution};

/// Rows "λ, degeneracy, (n, j) pairs" for |λ| ≤ Λmax, one per line, positive λ only.
pub fn spectrum_lines(lambda_max: f64) -> String {
    spectrum(lambda_max.min(60.5))
        .iter()
        .filter(|e| e.lambda.twice() > 0)
        .map(|e| {
            let parts: Vec<String> = e.decomposition.iter().map(|(n, j)| format!("({n}, {j})")).collect();
            format!("±{}\t{}\t{}", e.lambda, e.degeneracy, parts.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Interleaved (χ, a_n(χ), b_n(χ)) for E_{±(n+3/2)}(x, pole) = a_n 1 ∓ i b_n σ^χ.
pub fn projector_profile_values(n: usize, samples: usize) -> Vec<f64> {
    let samples = samples.clamp(2, 4000);
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let chi = PI * (i as f64 + 0.5) / samples as f64;
        let (a, b) = northpole_coefficients(n, chi)[n];
        out.extend([chi, a, b]);
    }
    out
}

/// Interleaved (τ, |h₁|² exact, |h₁|² WKB) on the cycloid of radius S_max for m = 1,
/// over the middle half of its lifetime, starting from the negative-frequency WKB state.
pub fn wkb_values(lambda: f64, s_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    let sf = ScaleFunction::cycloid(s_max).map_err(|e| e.to_string())?;
    let samples = samples.clamp(2, 4000);
    let taus: Vec<f64> = (0..samples).map(|i| 0.5 * PI + PI * i as f64 / (samples - 1) as f64).collect();
    let wkb = WkbSolution::new(lambda, 1.0, &sf, c(0.0, 0.0), c((2.0 * PI).powf(-0.5), 0.0), PI);
    let h0: Spinor2 = wkb.eval(PI).map_err(|e| e.to_string())?;
    let exact = solve_ode(lambda, 1.0, &sf, PI, h0, &taus, OdeOptions::default()).map_err(|e| e.to_string())?;
    let approx = wkb.sample(&taus).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * samples);
    for (i, &t) in taus.iter().enumerate() {
        out.extend([t, exact.h[i][0].norm_sqr(), approx.h[i][0].norm_sqr()]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn spectrum_table(lambda_max: f64) -> String {
    spectrum_lines(lambda_max)
}

#[wasm_bindgen]
pub fn projector_profile(n: usize, samples: usize) -> Vec<f64> {
    projector_profile_values(n, samples)
}

#[wasm_bindgen]
pub fn wkb_comparison(lambda: f64, s_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    wkb_values(lambda, s_max, samples).map_err(|e| JsError::new(&e))
}
