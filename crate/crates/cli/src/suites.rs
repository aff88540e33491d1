//! The invariant suites behind `verify` and the study commands.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use frw_dirac::fermionic_projector::{fitted_order, idempotency_check, limit_comparison, minkowski_coefficients, sea_kernel_regularized, WindowConfig};
use frw_dirac::linalg::{c, max_abs2, spinor_norm, C64, Spinor2};
use frw_dirac::quadrature::{composite_gauss_legendre, make_s3_grid, S3Point};
use frw_dirac::s3_dirac::{apply_dirac_s3, eigenbasis, modes_for_eigenvalue, spectrum, SpinorField2};
use frw_dirac::spectral_projectors::{kernel_northpole, ProjectorKernel};
use frw_dirac::special_functions::HalfInt;
use frw_dirac::time_dynamics::{
    compare_wkb_ode, lifetime_bound, smeared_normalization_check, solve_ode, spacetime_inner_product, OdeOptions,
    ScaleFunction, SmearConfig, WkbSolution,
};

use crate::config::{BasisConfig, DynamicsConfig, IdempotencyConfig, KernelConfig, LimitConfig, NormalizeConfig, ProjectorConfig, RunConfig};
use crate::report::Check;
use crate::CliError;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn interior_point(r: &mut ChaCha8Rng, margin: f64) -> S3Point {
    S3Point::new(r.gen_range(margin..PI - margin), r.gen_range(margin..PI - margin), r.gen_range(0.0..2.0 * PI))
}

fn linspace(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|i| a + (b - a) * i as f64 / intervals as f64).collect()
}

fn scale(label: &str) -> Result<ScaleFunction, CliError> {
    ScaleFunction::parse(label).map_err(CliError::from)
}

pub fn spectrum_checks(lambda_max: f64) -> (Vec<Check>, serde_json::Value) {
    let entries = spectrum(lambda_max);
    let rows: Vec<_> = entries
        .iter()
        .map(|e| {
            let parts: Vec<_> = e.decomposition.iter().map(|(n, j)| json!({"n": n, "j": j.to_string()})).collect();
            json!({"lambda": e.lambda.to_string(), "degeneracy": e.degeneracy, "decomposition": parts})
        })
        .collect();
    let sum_rule = entries.iter().all(|e| e.decomposition.iter().map(|(_, j)| (j.twice() + 1) as u64).sum::<u64>() == e.degeneracy);
    let counted = entries
        .iter()
        .all(|e| modes_for_eigenvalue(e.lambda.twice()).map(|m| m.len() as u64 == e.degeneracy).unwrap_or(false));
    let checks = vec![
        Check::holds("(n, j) sum rule: sum of 2j+1 equals degeneracy", sum_rule, "lambda^2 - 1/4 multiplicity"),
        Check::holds("enumerated modes equal degeneracy", counted, "lambda^2 - 1/4 multiplicity"),
    ];
    (checks, json!(rows))
}

/// Spectrum checks at the configured Λmax: eigenvalue list, degeneracies, total count.
pub fn spectrum_suite(cfg: &RunConfig) -> Vec<Check> {
    let lambda_max = cfg.spectrum.lambda_max;
    let (mut checks, _) = spectrum_checks(lambda_max);
    let entries = spectrum(lambda_max);
    let top = (2.0 * lambda_max).floor() as i32;
    let expected: Vec<i32> = (3..=top).step_by(2).flat_map(|t| [t, -t]).collect();
    let got: Vec<i32> = entries.iter().map(|e| e.lambda.twice()).collect();
    checks.push(Check::holds("eigenvalues are +-3/2 .. +-Lambda_max", got == expected, "half-odd integers with |lambda| >= 3/2"));
    let degeneracies: Vec<u64> = entries.iter().step_by(2).map(|e| e.degeneracy).collect();
    let expected_deg: Vec<u64> = (1..=expected.len() as u64 / 2).map(|l| l * (l + 1)).collect();
    checks.push(Check::holds("degeneracies 2, 6, 12, ...", degeneracies == expected_deg, "(l + 1/2)^2 - 1/4 = l(l+1)"));
    let total: u64 = entries.iter().map(|e| e.degeneracy).sum();
    let closed: u64 = 2 * (1..=expected.len() as u64 / 2).map(|l| l * (l + 1)).sum::<u64>();
    checks.push(Check::near("total states", total as f64, closed as f64, 0.0, "2 sum_l ((l + 1/2)^2 - 1/4)"));
    checks
}

pub fn gram_checks(cfg: &BasisConfig) -> Result<Vec<Check>, CliError> {
    let basis = eigenbasis(cfg.lambda_max);
    let [nc, nt, np] = cfg.grid;
    let grid = make_s3_grid(nc, nt, np)?;
    let values: Vec<Vec<Spinor2>> = basis.par_iter().map(|psi| grid.nodes.iter().map(|x| psi.eval(x)).collect()).collect();
    let n = basis.len();
    let deviation = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let g: C64 = values[i].iter().zip(&values[j]).zip(&grid.weights).map(|((a, b), w)| a.dotc(b) * *w).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    (g - id).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    let dim: u64 = spectrum(cfg.lambda_max).iter().map(|e| e.degeneracy).sum();
    Ok(vec![
        Check::near("basis dimension", n as f64, dim as f64, 0.0, "sum of degeneracies"),
        Check::at_most(format!("Gram max |G - I| on grid {nc}x{nt}x{np}"), deviation, cfg.gram_tol, "identity"),
    ])
}

pub fn residual_check(cfg: &BasisConfig, seed: u64) -> Result<Check, CliError> {
    let basis = eigenbasis(cfg.lambda_max);
    let mut r = rng(seed, 1);
    let points: Vec<S3Point> = (0..cfg.residual_points).map(|_| interior_point(&mut r, cfg.interior_margin)).collect();
    let residual = basis
        .par_iter()
        .map(|psi| -> Result<f64, CliError> {
            let (mut res, mut norm) = (0.0, 0.0);
            for x in &points {
                let v = psi.eval(x);
                let d = apply_dirac_s3(psi, x, cfg.fd_step)?;
                res += spinor_norm(&(d - v * c(psi.eigenvalue(), 0.0))).powi(2);
                norm += spinor_norm(&v).powi(2);
            }
            Ok((res / norm).sqrt())
        })
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check::at_most(
        format!("max ||(D - lambda) psi|| / ||psi|| over {} points, h = {}", cfg.residual_points, cfg.fd_step),
        residual,
        cfg.residual_tol,
        "eigenvalue equation",
    ))
}

pub fn projector_checks(cfg: &ProjectorConfig, seed: u64) -> Result<Vec<Check>, CliError> {
    let pole = S3Point::new(cfg.pole_chi, 0.0, 0.0);
    let mut r = rng(seed, 2);
    let (theta, phi) = (r.gen_range(0.2..PI - 0.2), r.gen_range(0.0..2.0 * PI));
    let chis = linspace(cfg.chi_range[0], cfg.chi_range[1], cfg.chi_samples.max(2) - 1);
    let lambdas: Vec<HalfInt> = (0..=cfg.n_max as i32).flat_map(|n| [2 * n + 3, -(2 * n + 3)]).map(HalfInt::from_twice).collect();
    let closed = lambdas
        .par_iter()
        .map(|&l| -> Result<f64, CliError> {
            let kernel = ProjectorKernel::new(l)?;
            let mut worst: f64 = 0.0;
            for &chi in &chis {
                let x = S3Point::new(chi, theta, phi);
                worst = worst.max(max_abs2(&(kernel.eval(&x, &pole) - kernel_northpole(l, &x)?)));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let points: Vec<S3Point> = (0..cfg.trace_points).map(|_| interior_point(&mut r, 0.05)).collect();
    let mut trace_dev: f64 = 0.0;
    for &l in &lambdas {
        let kernel = ProjectorKernel::new(l)?;
        let expect = (l.value().powi(2) - 0.25) / (2.0 * PI * PI);
        for x in &points {
            trace_dev = trace_dev.max((kernel.eval(x, x).trace() - c(expect, 0.0)).norm());
        }
    }
    Ok(vec![
        Check::at_most(
            format!("closed form vs mode sum, n <= {}, chi in [{}, {}]", cfg.n_max, cfg.chi_range[0], cfg.chi_range[1]),
            closed,
            cfg.closed_form_tol,
            "eigenbasis mode sum",
        ),
        Check::at_most("trace E(x, x) - (lambda^2 - 1/4)/(2 pi^2)", trace_dev, cfg.trace_tol, "homogeneity of S3"),
    ])
}

pub fn idempotency(cfg: &IdempotencyConfig) -> Result<Check, CliError> {
    let dev = idempotency_check(cfg.m_bar, cfg.delta, cfg.s, cfg.lambda_max, cfg.mu_nodes)?;
    Ok(Check::at_most("smeared projector ||P^2 - P||", dev, cfg.tol, "composition contract on selectors"))
}

/// Span compared in the WKB sweep: the configured one or the middle half of the admissible span.
fn sweep_span(cfg: &DynamicsConfig, sf: &ScaleFunction) -> Result<(f64, f64), CliError> {
    if let Some([a, b]) = cfg.span {
        return Ok((a, b));
    }
    let (lo, hi) = sf.admissible_span(OdeOptions::default().s_floor);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Usage("scale function has an infinite span; set dynamics.span".into()));
    }
    Ok((lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo)))
}

pub fn wkb_sweep(cfg: &DynamicsConfig) -> Result<(Vec<Check>, serde_json::Value), CliError> {
    let c2 = c((2.0 * PI).powf(-0.5), 0.0);
    let mut cases = Vec::new();
    for label in &cfg.scales {
        let sf = scale(label)?;
        for &lambda in &cfg.lambdas {
            cases.push((label.clone(), sf.clone(), lambda));
        }
    }
    let rows = cases
        .par_iter()
        .map(|(label, sf, lambda)| -> Result<_, CliError> {
            let (a, b) = sweep_span(cfg, sf)?;
            let tau0 = cfg.tau0.unwrap_or(0.5 * (a + b));
            let wkb = WkbSolution::new(*lambda, cfg.mass, sf, c(0.0, 0.0), c2, tau0);
            let cmp = compare_wkb_ode(&wkb, &linspace(a, b, cfg.samples), OdeOptions::with_tol(cfg.ode_tol))?;
            // conservation over everything the solver accepts
            let (lo, hi) = sf.admissible_span(OdeOptions::default().s_floor);
            let full_drift = if lo.is_finite() && hi.is_finite() {
                let h0 = wkb.eval(tau0)?;
                let ode = solve_ode(*lambda, cfg.mass, sf, tau0, h0, &linspace(lo, hi, cfg.samples), OdeOptions::with_tol(cfg.ode_tol))?;
                ode.norm_drift(spinor_norm(&h0).powi(2)) / spinor_norm(&h0).powi(2)
            } else {
                cmp.norm_drift
            };
            Ok((label.clone(), *lambda, a, b, cmp, full_drift))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let table: Vec<_> = rows
        .iter()
        .map(|(label, lambda, a, b, cmp, full)| {
            json!({
                "scale": label, "lambda": lambda, "span": [a, b],
                "sup_error": cmp.sup_error, "integrated_indicator": cmp.integrated_indicator,
                "ratio": cmp.sup_error / cmp.integrated_indicator,
                "norm_drift": cmp.norm_drift, "norm_drift_full_span": full,
            })
        })
        .collect();
    let ratio = rows.iter().map(|r| r.4.sup_error / r.4.integrated_indicator).fold(0.0, f64::max);
    let drift = rows.iter().map(|r| r.4.norm_drift.max(r.5)).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("max ODE norm drift", drift, cfg.drift_tol, "current conservation"),
        Check::at_most("max WKB sup error / integrated indicator", ratio, cfg.wkb_ratio, "adiabatic error estimate"),
    ];
    Ok((checks, json!(table)))
}

pub fn magnitude_check(cfg: &DynamicsConfig) -> Check {
    // Ṡ/(m S²) with Ṡ/S² = H at S = 1
    let (s, s_dot) = (1.0, cfg.hubble_rate);
    let magnitude = s_dot / (cfg.electron_mass * s * s);
    Check::near(
        "S'/(m S^2) at present-day scales",
        magnitude,
        cfg.magnitude_target,
        // half a unit in the leading digit
        0.5 * 10f64.powf(cfg.magnitude_target.abs().log10().floor()),
        "one-significant-digit estimate",
    )
}

pub fn lifetime_checks(cfg: &DynamicsConfig, seed: u64) -> Result<Vec<Check>, CliError> {
    let b = &cfg.bound;
    let sf = ScaleFunction::cycloid(b.s_max)?;
    let bound = lifetime_bound(&sf)?;
    let (lo, hi) = sf.admissible_span(OdeOptions::default().s_floor);
    let grid = composite_gauss_legendre(16, b.panels, lo, hi)?;
    let mut r = rng(seed, 3);
    let states: Vec<(f64, f64, Spinor2)> = (0..b.states)
        .map(|_| {
            let twice = 2 * r.gen_range(1..=(b.max_twice_lambda - 1) / 2) + 1;
            let lambda = if r.gen_bool(0.5) { 0.5 } else { -0.5 } * f64::from(twice);
            let m = r.gen_range(b.mass_range[0]..b.mass_range[1]);
            let h = Spinor2::new(c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)), c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            // |h₁|² + |h₂|² = 1/(2π)
            let h = h * c(1.0 / (spinor_norm(&h) * (2.0 * PI).sqrt()), 0.0);
            (lambda, m, h)
        })
        .collect();
    let worst = states
        .par_iter()
        .map(|&(lambda, m, h0)| -> Result<f64, CliError> {
            let amps = solve_ode(lambda, m, &sf, PI, h0, &grid.nodes, OdeOptions::with_tol(1e-10))?;
            Ok(spacetime_inner_product(&amps, &amps, &sf, &grid)?.norm() / bound)
        })
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![
        Check::near("cycloid lifetime bound (1/2pi) int S", bound, 0.5 * b.s_max, b.closed_form_tol, "S_max / 2"),
        Check::at_most(format!("max |<Psi|Psi>| / bound over {} random states", b.states), worst, 1.0, "finite-lifetime bound"),
    ])
}

pub fn normalize_study(cfg: &NormalizeConfig) -> Result<(Vec<Check>, serde_json::Value), CliError> {
    let smear = SmearConfig { mass_nodes: cfg.mass_nodes, ..SmearConfig::default() };
    let (c1, c2) = (c(cfg.c1[0], cfg.c1[1]), c(cfg.c2[0], cfg.c2[1]));
    let mixed = c(0.5 * PI.powf(-0.5), 0.0);
    let results = cfg
        .scales
        .par_iter()
        .map(|label| -> Result<_, CliError> {
            let sf = scale(label)?;
            let main = smeared_normalization_check(cfg.lambda, &sf, cfg.mass, cfg.eps, cfg.tau0, c1, c2, smear)?;
            let cross = smeared_normalization_check(cfg.lambda, &sf, cfg.mass, cfg.eps, cfg.tau0, mixed, mixed, smear)?;
            Ok((label.clone(), main, cross))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut checks = Vec::new();
    let mut table = Vec::new();
    for (label, main, cross) in &results {
        checks.push(Check::holds(format!("{label}: tau window resolved the envelope"), main.converged && cross.converged, "envelope decay"));
        checks.push(Check::near(format!("{label}: numeric / predicted"), main.numeric / main.predicted, 1.0, cfg.rel_tol, "2 pi (|c1|^2 - |c2|^2) int |eta|^2"));
        let same = cross.same_frequency[0].abs();
        checks.push(Check::at_most(format!("{label}: cross term / same-frequency term"), cross.cross_term.abs() / same, cfg.cross_tol, "stationary-phase suppression"));
        table.push(json!({
            "scale": label, "numeric": main.numeric, "predicted": main.predicted,
            "tau_span": [main.tau_span.0, main.tau_span.1], "tau_nodes": main.tau_nodes,
            "cross_term": cross.cross_term, "same_frequency": cross.same_frequency,
        }));
    }
    if let Some((first, rest)) = results.split_first() {
        for other in rest {
            checks.push(Check::near(
                format!("{} vs {}", first.0, other.0),
                other.1.numeric / first.1.numeric,
                1.0,
                cfg.rel_tol,
                "geometry independence",
            ));
        }
    }
    Ok((checks, json!(table)))
}

pub fn limit_study(cfg: &LimitConfig) -> Result<(Vec<Check>, serde_json::Value), CliError> {
    let m = cfg.mass;
    let s_list: Vec<f64> = cfg.s_list.iter().map(|s| s / m).collect();
    let rows = limit_comparison(m, cfg.t / m, cfg.r / m, &s_list, cfg.window.into())?;
    let monotone = rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error);
    let order = fitted_order(&rows);
    let last = rows.last().map(|r| r.rel_error).unwrap_or(f64::NAN);
    let table: Vec<_> = rows
        .iter()
        .map(|r| json!({"S": r.s, "n_max": r.n_max, "rel_error": r.rel_error, "abs_error": r.abs_error}))
        .collect();
    let checks = vec![
        Check::holds("error decreases along S", monotone, "minkowski kernel"),
        Check::at_most("final relative error", last, cfg.final_rel_tol, "minkowski kernel"),
        Check::near("fitted convergence order", order, cfg.expected_order, cfg.order_tol, "log-log slope of the error"),
    ];
    Ok((checks, json!(table)))
}

/// CSV rows (S, t, r, row, col, re, im, abs_err) of the sea kernel against the Minkowski kernel.
pub fn kernel_rows(cfg: &KernelConfig) -> Result<Vec<[String; 8]>, CliError> {
    let KernelConfig { mass: m, s, t, r, .. } = *cfg;
    if !(m > 0.0 && s > 0.0) {
        return Err(CliError::Usage(format!("mass and scale factor must be positive (m = {m}, S = {s})")));
    }
    if !(r > 0.0 && r < PI * s) {
        return Err(CliError::Usage(format!("r = {r} must lie in (0, pi S) = (0, {})", PI * s)));
    }
    let window: WindowConfig = cfg.window.into();
    let n_max = match cfg.lambda_max {
        Some(l) if l < 1.5 => return Err(CliError::Usage(format!("lambda_max = {l} is below the lowest eigenvalue 3/2"))),
        Some(l) => {
            let n = (l - 1.5).floor() as usize;
            let n_cut = (window.p_cut(r, m) * s).ceil() as usize;
            if n < n_cut {
                eprintln!("warning: cutoff n = {n} is below the window decay cutoff {n_cut}; values are window-truncated");
            }
            Some(n)
        }
        None => None,
    };
    let sea = sea_kernel_regularized(m, s, t, r, n_max, window)?.matrix(cfg.theta, cfg.phi);
    let mink = minkowski_coefficients(m, t, r, window)?.matrix(cfg.theta, cfg.phi);
    let mut out = Vec::with_capacity(16);
    for row in 0..4 {
        for col in 0..4 {
            let v = sea[(row, col)];
            out.push([
                s.to_string(),
                t.to_string(),
                r.to_string(),
                row.to_string(),
                col.to_string(),
                format!("{:e}", v.re),
                format!("{:e}", v.im),
                format!("{:e}", (v - mink[(row, col)]).norm()),
            ]);
        }
    }
    Ok(out)
}
