//! The fermionic projector of the Dirac sea at constant scale S, and its
//! comparison with the vacuum kernel of Minkowski space.
//!
//! Four-spinors are ordered as (time block) ⊗ (spatial two-spinor), so that
//! `kron(σ³, 1) = γ⁰` and `kron([[0,1],[-1,0]], σ^χ) = γ^r`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, identity2, kron, max_abs4, offdiag_antisym, pauli, re, Matrix2, Matrix4, C64, I};
use crate::quadrature::{composite_gauss_legendre, integrate_adaptive, S3Point};
use crate::s3_dirac::{sigma_chi, Sign};
use crate::spectral_projectors::{northpole_coefficients, ProjectorKernel};
use crate::special_functions::HalfInt;
use crate::time_dynamics::diagonalizer_at;

/// γ⁰…γ³ in the Dirac representation.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracMatrices {
    pub gamma: [Matrix4; 4],
}

impl DiracMatrices {
    pub fn dirac() -> Self {
        let j = offdiag_antisym();
        Self { gamma: [kron(&pauli(3), &identity2()), kron(&j, &pauli(1)), kron(&j, &pauli(2)), kron(&j, &pauli(3))] }
    }

    /// γ^r = cosϑ γ³ + sinϑ cosφ γ¹ + sinϑ sinφ γ².
    pub fn gamma_r(&self, theta: f64, phi: f64) -> Matrix4 {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        self.gamma[3] * re(ct) + self.gamma[1] * re(st * cp) + self.gamma[2] * re(st * sp)
    }
}

pub fn gamma0() -> Matrix4 {
    kron(&pauli(3), &identity2())
}

pub fn gamma_r(theta: f64, phi: f64) -> Matrix4 {
    kron(&offdiag_antisym(), &sigma_chi(theta, phi))
}

/// A space-time point (τ, x⃗) in conformal time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub tau: f64,
    pub x: S3Point,
}

impl SpacetimePoint {
    pub fn new(tau: f64, x: S3Point) -> Self {
        Self { tau, x }
    }
}

/// ω = −√(λ²/S² + m²).
pub fn sea_frequency(lambda: f64, m: f64, s: f64) -> f64 {
    -((lambda / s).powi(2) + m * m).sqrt()
}

/// (1/(2|ω|)) [ω σ³ + (λ/S) J + m], which equals −U⁻¹ diag(0,1) U σ³.
pub fn sea_bracket(lambda: f64, m: f64, s: f64) -> Matrix2 {
    let w = sea_frequency(lambda, m, s);
    (pauli(3) * re(w) + offdiag_antisym() * re(lambda / s) + identity2() * re(m)) * re(1.0 / (2.0 * w.abs()))
}

/// U⁻¹ diag(0,1) U, the negative-frequency selector.
pub fn sea_selector(lambda: f64, m: f64, s: f64) -> Result<Matrix2> {
    let u = diagonalizer_at(lambda, m, s)?;
    Ok(u.transpose() * Matrix2::new(re(0.0), re(0.0), re(0.0), re(1.0)) * u)
}

/// U⁻¹ diag(1,0) U, the positive-frequency selector.
pub fn positive_selector(lambda: f64, m: f64, s: f64) -> Result<Matrix2> {
    let u = diagonalizer_at(lambda, m, s)?;
    Ok(u.transpose() * Matrix2::new(re(1.0), re(0.0), re(0.0), re(0.0)) * u)
}

/// A truncated sea-kernel value with an a-priori bound on the next doubling of the cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct SeaKernel {
    pub matrix: Matrix4,
    pub lambda_max: f64,
    /// Entrywise bound on the change when Λmax → 2Λmax.
    pub tail_bound: f64,
}

impl SeaKernel {
    pub fn cutoff_warning(&self, tol: f64) -> Option<String> {
        (self.tail_bound > tol).then(|| {
            format!("cutoff lambda_max = {} too small: tail bound {:.3e} exceeds {tol:.1e}", self.lambda_max, self.tail_bound)
        })
    }
}

/// Σ_{Λ < |λ| ≤ 2Λ} of an entrywise bound on the λ-shell, using
/// |E_λ(x,y)_{ab}| ≤ (λ² − ¼)/(4π²).
pub fn sea_tail_bound(m: f64, s: f64, lambda_max: f64) -> f64 {
    let mut total = 0.0;
    let mut twice = 3;
    while f64::from(twice) / 2.0 <= 2.0 * lambda_max {
        let l = f64::from(twice) / 2.0;
        if l > lambda_max {
            let w = sea_frequency(l, m, s).abs();
            total += 2.0 / (2.0 * PI * s.powi(3)) * (w + m) / (2.0 * w) * (l * l - 0.25) / (4.0 * PI * PI);
        }
        twice += 2;
    }
    total
}

/// P_m(x, y) = (1/(2πS³)) Σ_{|λ|≤Λ} (1/(2|ω|)) [ω σ³ + (λ/S) J + m] e^{iωS(y⁰−x⁰)} ⊗ E_λ(x⃗, y⃗)
/// for arbitrary points, with E_λ from the eigenbasis.
pub fn sea_kernel(m: f64, s: f64, lambda_max: f64, x: &SpacetimePoint, y: &SpacetimePoint) -> Result<SeaKernel> {
    check_sea_args(m, s, lambda_max)?;
    let mut twice_list = Vec::new();
    let mut twice = 3;
    while f64::from(twice) / 2.0 <= lambda_max {
        twice_list.push(twice);
        twice_list.push(-twice);
        twice += 2;
    }
    let shells: Vec<Matrix4> = twice_list
        .par_iter()
        .map(|&t| -> Result<Matrix4> {
            let lambda = f64::from(t) / 2.0;
            let e = ProjectorKernel::new(HalfInt::from_twice(t))?.eval(&x.x, &y.x);
            let w = sea_frequency(lambda, m, s);
            let phase = C64::from_polar(1.0, w * s * (y.tau - x.tau));
            Ok(kron(&(sea_bracket(lambda, m, s) * phase), &e))
        })
        .collect::<Result<_>>()?;
    let matrix = shells.into_iter().fold(Matrix4::zeros(), |a, b| a + b);
    Ok(SeaKernel { matrix: matrix * re(1.0 / (2.0 * PI * s.powi(3))), lambda_max, tail_bound: sea_tail_bound(m, s, lambda_max) })
}

fn check_sea_args(m: f64, s: f64, lambda_max: f64) -> Result<()> {
    if !(m > 0.0 && s > 0.0 && lambda_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("need m > 0, S > 0 and finite cutoff (m = {m}, S = {s})")));
    }
    Ok(())
}

/// Coefficients of a kernel of the form id·1 + g0·γ⁰ + i·gr·γ^r.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelCoefficients {
    pub id: C64,
    pub g0: C64,
    pub gr: C64,
}

impl KernelCoefficients {
    pub fn zero() -> Self {
        Self { id: re(0.0), g0: re(0.0), gr: re(0.0) }
    }

    pub fn matrix(&self, theta: f64, phi: f64) -> Matrix4 {
        Matrix4::identity() * self.id + gamma0() * self.g0 + gamma_r(theta, phi) * (I * self.gr)
    }

    fn scale(self, k: f64) -> Self {
        Self { id: self.id * k, g0: self.g0 * k, gr: self.gr * k }
    }

    fn add(self, o: Self) -> Self {
        Self { id: self.id + o.id, g0: self.g0 + o.g0, gr: self.gr + o.gr }
    }

    pub fn max_abs(&self) -> f64 {
        self.id.norm().max(self.g0.norm()).max(self.gr.norm())
    }
}

/// Which eigenvalue signs enter a mode sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignFilter {
    Both,
    Only(Sign),
}

/// Sea kernel with y at the north pole, y⁰ = 0, summed over both signs of λ with
/// windows e^{−η|λ|/S}, as coefficients of 1, γ⁰ and iγ^r (one set per η).
///
/// With E_{±(n+3/2)} = a_n 1 ∓ i b_n σ^χ the 1 ⊗ σ^χ and J ⊗ 1 cross terms cancel
/// between the signs, and each sign contributes (1/(2|ω|)) [a_n (ωγ⁰ + m) − i b_n (|λ|/S) γ^r].
pub fn sea_kernel_pole_coefficients(m: f64, s: f64, n_max: usize, x: &SpacetimePoint, windows: &[f64]) -> Vec<KernelCoefficients> {
    let coeffs = northpole_coefficients(n_max, x.x.chi);
    let sign_factor = 2.0;
    let mut out = vec![KernelCoefficients::zero(); windows.len()];
    for (n, (a, b)) in coeffs.iter().enumerate() {
        let l = n as f64 + 1.5;
        let w = sea_frequency(l, m, s);
        let phase = C64::from_polar(1.0, -w * s * x.tau);
        let term = KernelCoefficients { id: phase * (a * m), g0: phase * (a * w), gr: phase * (-b * l / s) }
            .scale(sign_factor / (2.0 * w.abs()));
        for (acc, &eta) in out.iter_mut().zip(windows) {
            *acc = acc.add(term.scale((-eta * l / s).exp()));
        }
    }
    let norm = 1.0 / (2.0 * PI * s.powi(3));
    out.into_iter().map(|k| k.scale(norm)).collect()
}

/// The pole form as a full matrix; a single sign keeps the cross terms that
/// cancel in the sum over both.
pub fn sea_kernel_pole(m: f64, s: f64, lambda_max: f64, x: &SpacetimePoint, signs: SignFilter) -> Result<SeaKernel> {
    check_sea_args(m, s, lambda_max)?;
    if lambda_max < 1.5 {
        return Ok(SeaKernel { matrix: Matrix4::zeros(), lambda_max, tail_bound: sea_tail_bound(m, s, lambda_max) });
    }
    let coeffs = northpole_coefficients((lambda_max - 1.5).floor() as usize, x.x.chi);
    let sig = sigma_chi(x.x.theta, x.x.phi);
    let mut total = Matrix4::zeros();
    for (n, (a, b)) in coeffs.iter().enumerate() {
        let l = n as f64 + 1.5;
        if l > lambda_max {
            break;
        }
        for sgn in [Sign::Plus, Sign::Minus] {
            if let SignFilter::Only(only) = signs {
                if only != sgn {
                    continue;
                }
            }
            let lambda = sgn.value() * l;
            let e = identity2() * re(*a) + sig * c(0.0, -sgn.value() * b);
            let w = sea_frequency(lambda, m, s);
            let phase = C64::from_polar(1.0, -w * s * x.tau);
            total += kron(&(sea_bracket(lambda, m, s) * phase), &e);
        }
    }
    Ok(SeaKernel { matrix: total * re(1.0 / (2.0 * PI * s.powi(3))), lambda_max, tail_bound: sea_tail_bound(m, s, lambda_max) })
}

/// Window and extrapolation settings for the regularized p-integral and mode sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    /// Largest window width η₀ in units of r (or of 1/m when r = 0).
    pub eta_over_r: f64,
    /// Number of window widths η₀, η₀/2, …; Richardson eliminates `levels − 1` powers of η.
    pub levels: usize,
    /// The integrand is cut where e^{−η_min p} < e^{−decades}.
    pub decades: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { eta_over_r: 1.0 / 32.0, levels: 4, decades: 30.0 }
    }
}

impl WindowConfig {
    pub fn etas(&self, r: f64, m: f64) -> Vec<f64> {
        let length = if r > 0.0 { r } else { 1.0 / m };
        let eta0 = self.eta_over_r * length;
        (0..self.levels).map(|k| eta0 / f64::from(1u32 << k)).collect()
    }

    pub fn p_cut(&self, r: f64, m: f64) -> f64 {
        let etas = self.etas(r, m);
        self.decades / etas[etas.len() - 1]
    }
}

/// Richardson extrapolation η → 0 for values at η₀, η₀/2, … assuming an
/// expansion in integer powers of η.
pub fn richardson<T: Copy>(values: &[T], combine: impl Fn(T, T, f64) -> T) -> T {
    let mut table = values.to_vec();
    for level in 1..values.len() {
        let f = f64::from(1u32 << level);
        for k in (level..values.len()).rev() {
            // (2^level R_k − R_{k−1}) / (2^level − 1)
            table[k] = combine(table[k], table[k - 1], f);
        }
    }
    table[values.len() - 1]
}

fn richardson_coeffs(values: &[KernelCoefficients]) -> KernelCoefficients {
    richardson(values, |hi, lo, f| hi.scale(f / (f - 1.0)).add(lo.scale(-1.0 / (f - 1.0))))
}

/// sin(pr)/r and ∂_r(sin(pr)/r), with series near pr = 0.
fn radial_factors(p: f64, r: f64) -> (f64, f64) {
    let z = p * r;
    if z < 1e-3 {
        (p * (1.0 - z * z / 6.0), -p * p * p * r / 3.0 * (1.0 - z * z / 10.0))
    } else {
        let (sn, cs) = z.sin_cos();
        (sn / r, (z * cs - sn) / (r * r))
    }
}

/// Windowed p-integrals (1/(2π)³) ∫ dp (p/|ω|){…} e^{−iωt} e^{−ηp} for each η.
pub fn minkowski_windowed(m: f64, t: f64, r: f64, etas: &[f64], p_cut: f64) -> Result<Vec<KernelCoefficients>> {
    let freq = r + t.abs() + m;
    let panels = ((p_cut * freq).ceil() as usize).max(8);
    let grid = composite_gauss_legendre(16, panels, 0.0, p_cut)?;
    let mut out = vec![KernelCoefficients::zero(); etas.len()];
    for (&p, &wt) in grid.nodes.iter().zip(&grid.weights) {
        let w = -(p * p + m * m).sqrt();
        let (f, df) = radial_factors(p, r);
        let phase = C64::from_polar(p / w.abs() * wt, -w * t);
        let term = KernelCoefficients { id: phase * (m * f), g0: phase * (w * f), gr: phase * df };
        for (acc, &eta) in out.iter_mut().zip(etas) {
            *acc = acc.add(term.scale((-eta * p).exp()));
        }
    }
    let norm = 1.0 / (8.0 * PI.powi(3));
    Ok(out.into_iter().map(|k| k.scale(norm)).collect())
}

/// The Minkowski vacuum kernel as coefficients of 1, γ⁰ and iγ^r.
pub fn minkowski_coefficients(m: f64, t: f64, r: f64, cfg: WindowConfig) -> Result<KernelCoefficients> {
    if !(r >= 0.0) || (r == 0.0 && t == 0.0) {
        return Err(Error::Domain(format!("minkowski kernel needs r > 0 or t != 0 (t = {t}, r = {r})")));
    }
    if (r - t.abs()).abs() < 1e-12 * (r + t.abs()) {
        return Err(Error::Domain(format!("minkowski kernel is singular on the light cone (t = {t}, r = {r})")));
    }
    let etas = cfg.etas(r, m);
    let values = minkowski_windowed(m, t, r, &etas, cfg.p_cut(r, m))?;
    let extrapolated = richardson_coeffs(&values);
    if values.len() >= 2 {
        let last_step = richardson_coeffs(&values[..values.len() - 1]);
        let change = (extrapolated.id - last_step.id).norm() + (extrapolated.gr - last_step.gr).norm();
        if !change.is_finite() {
            return Err(Error::Convergence("window extrapolation produced non-finite values".into()));
        }
    }
    Ok(extrapolated)
}

/// P_M(t, r) in the direction (ϑ, φ) of x⃗.
pub fn minkowski_kernel(m: f64, t: f64, r: f64, theta: f64, phi: f64) -> Result<Matrix4> {
    Ok(minkowski_coefficients(m, t, r, WindowConfig::default())?.matrix(theta, phi))
}

/// K_ν(z) = ∫₀^∞ e^{−z cosh u} cosh(νu) du.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("K_nu needs z > 0, got {z}")));
    }
    let upper = (60.0 / z + 1.0).acosh() + 1.0;
    integrate_adaptive(|u| (-z * u.cosh()).exp() * (nu * u).cosh(), 0.0, upper, 1e-15)
}

/// Equal-time Minkowski kernel from modified Bessel functions:
/// id = m² K₁(mr)/(8π³ r), g0 = 0, gr = ∂_r(m K₁(mr)/r)/(8π³).
pub fn minkowski_equal_time_bessel(m: f64, r: f64) -> Result<KernelCoefficients> {
    let z = m * r;
    let (k0, k1) = (bessel_k(0.0, z)?, bessel_k(1.0, z)?);
    let norm = 1.0 / (8.0 * PI.powi(3));
    let dk1 = -k0 - k1 / z;
    let d = m * m * dk1 / r - m * k1 / (r * r);
    Ok(KernelCoefficients { id: re(norm * m * m * k1 / r), g0: re(0.0), gr: re(norm * d) })
}

/// One row of the large-universe comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow {
    pub s: f64,
    pub n_max: usize,
    pub sea: KernelCoefficients,
    pub minkowski: KernelCoefficients,
    /// max entry of |P_sea − P_M| over max entry of |P_M|.
    pub rel_error: f64,
    pub abs_error: f64,
}

/// The pole mode sum at τ = t/S, χ = r/S with n ≤ n_max, windowed and extrapolated
/// to zero window width. `n_max = None` uses the window decay cutoff p_cut·S.
pub fn sea_kernel_regularized(m: f64, s: f64, t: f64, r: f64, n_max: Option<usize>, cfg: WindowConfig) -> Result<KernelCoefficients> {
    check_sea_args(m, s, 0.0)?;
    if !(r > 0.0) {
        return Err(Error::Domain("regularized sea kernel needs r > 0".into()));
    }
    let chi = r / s;
    if chi >= PI {
        return Err(Error::Domain(format!("r = {r} is not below pi S = {}", PI * s)));
    }
    let n_max = n_max.unwrap_or_else(|| (cfg.p_cut(r, m) * s).ceil() as usize);
    let x = SpacetimePoint::new(t / s, S3Point::new(chi, 0.0, 0.0));
    Ok(richardson_coeffs(&sea_kernel_pole_coefficients(m, s, n_max, &x, &cfg.etas(r, m))))
}

/// Evaluates [`sea_kernel_regularized`] for each S and compares it with the
/// Minkowski kernel under the same window.
pub fn limit_comparison(m: f64, t: f64, r: f64, s_list: &[f64], cfg: WindowConfig) -> Result<Vec<LimitRow>> {
    if !(r > 0.0) {
        return Err(Error::Domain("limit comparison needs r > 0".into()));
    }
    let (theta, phi) = (0.7, 1.9);
    let mink = minkowski_coefficients(m, t, r, cfg)?;
    let n_cut = |s: f64| (cfg.p_cut(r, m) * s).ceil() as usize;
    s_list
        .par_iter()
        .map(|&s| {
            let sea = sea_kernel_regularized(m, s, t, r, None, cfg)?;
            let diff = sea.matrix(theta, phi) - mink.matrix(theta, phi);
            let abs_error = max_abs4(&diff);
            Ok(LimitRow { s, n_max: n_cut(s), sea, minkowski: mink, rel_error: abs_error / max_abs4(&mink.matrix(theta, phi)), abs_error })
        })
        .collect()
}

/// Least-squares slope of log(error) against log(S); the convergence order is its negative.
pub fn fitted_order(rows: &[LimitRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.s.ln(), r.rel_error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// The large-n form (1/4π²)[n sin(nχ)/χ ± iσ^χ ∂_χ(sin(nχ)/χ)] of E_{±(n+3/2)}(x, pole).
pub fn northpole_asymptotic(lambda: HalfInt, x: &S3Point) -> Result<Matrix2> {
    let twice = lambda.twice();
    if twice.abs() < 3 || twice % 2 == 0 {
        return Err(Error::InvalidArgument(format!("{lambda} is not an eigenvalue")));
    }
    let n = f64::from((twice.abs() - 3) / 2);
    let chi = x.chi;
    let (sn, cs) = (n * chi).sin_cos();
    let a = n * sn / chi;
    let b = n * cs / chi - sn / (chi * chi);
    let sign = if twice > 0 { 1.0 } else { -1.0 };
    Ok((identity2() * re(a) + sigma_chi(x.theta, x.phi) * c(0.0, sign * b)) * re(1.0 / (4.0 * PI * PI)))
}

/// ‖P² − P‖ for P = ∫_{m̄−δ}^{m̄+δ} P_μ dμ on truncated spectral data, using the
/// composition contract P_μ P_μ′ = δ(μ − μ′) P_μ.
///
/// Each P_μ is stored per eigenvalue slot as its negative-frequency selector
/// Π_{λ,μ} with a scalar weight. Under the contract, distinct mass nodes
/// annihilate, equal nodes compose with the discrete delta 1/w_i times the
/// normalization constant −2π(|c₁|² − |c₂|²) of the sea state.
pub fn idempotency_check(m_bar: f64, delta: f64, s: f64, lambda_max: f64, mu_nodes: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < m_bar) {
        return Err(Error::InvalidArgument(format!("need 0 < delta < m_bar (delta = {delta})")));
    }
    let grid = crate::quadrature::gauss_legendre(mu_nodes, m_bar - delta, m_bar + delta)?;
    let c2_sq = 1.0 / (2.0 * PI);
    let contract = -2.0 * PI * (0.0 - c2_sq);
    let mut worst: f64 = 0.0;
    let mut twice = 3;
    while f64::from(twice) / 2.0 <= lambda_max {
        for sign in [1.0, -1.0] {
            let lambda = sign * f64::from(twice) / 2.0;
            for (&mu, &w) in grid.nodes.iter().zip(&grid.weights) {
                let pi = sea_selector(lambda, mu, s)?;
                // slot (λ, μ_i): P carries weight w_i, P² carries w_i² · contract / w_i
                let p = pi * re(w);
                let p2 = (pi * pi) * re(w * w * contract / w);
                worst = worst.max((p2 - p).iter().map(|z| z.norm()).fold(0.0, f64::max));
                let other = positive_selector(lambda, mu, s)?;
                worst = worst.max((pi * other).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        twice += 2;
    }
    Ok(worst)
}
