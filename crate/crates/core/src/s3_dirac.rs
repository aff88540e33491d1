//! Eigenstructure of the intrinsic Dirac operator on the unit three-sphere.
//!
//! Points are given in the coordinates (χ, ϑ, φ) with line element
//! dχ² + sin²χ (dϑ² + sin²ϑ dφ²). Eigenfunctions are labelled by a sign s,
//! a radial index n ≥ 0, a total angular momentum j ∈ ℕ₀ + ½ and a magnetic
//! index k ∈ {−j, …, j}; the eigenvalue is λ = s (n + j + 1).
//!
//! Everything here is evaluated from closed forms built on Jacobi polynomials
//! and spin-weighted combinations of spherical harmonics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, pauli, re, Matrix2, Spinor2, C64, I};
use crate::quadrature::S3Point;
use crate::special_functions::{jacobi_unchecked, log_gamma, spherical_harmonic_or_zero, HalfInt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Mode label (s, n, j, k) of one eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuantumNumbers {
    pub s: Sign,
    pub n: u32,
    pub j: HalfInt,
    pub k: HalfInt,
}

impl QuantumNumbers {
    pub fn new(s: Sign, n: u32, j: HalfInt, k: HalfInt) -> Result<Self> {
        if !j.is_half_odd() || j.twice() < 1 {
            return Err(Error::Index(format!("j = {j} must be a positive half-integer")));
        }
        if !k.is_half_odd() || k.twice().abs() > j.twice() {
            return Err(Error::Index(format!("k = {k} must be a half-integer in [-{j}, {j}]")));
        }
        Ok(Self { s, n, j, k })
    }

    /// Twice the eigenvalue, 2λ = s (2n + 2j + 2).
    pub fn twice_eigenvalue(&self) -> i32 {
        let mag = 2 * self.n as i32 + self.j.twice() + 2;
        match self.s {
            Sign::Plus => mag,
            Sign::Minus => -mag,
        }
    }

    pub fn eigenvalue(&self) -> f64 {
        f64::from(self.twice_eigenvalue()) / 2.0
    }
}

/// All mode labels whose eigenvalue is `twice_lambda / 2`.
pub fn modes_for_eigenvalue(twice_lambda: i32) -> Result<Vec<QuantumNumbers>> {
    let mag = twice_lambda.abs();
    if mag < 3 || mag % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "{} is not an eigenvalue of the S3 Dirac operator",
            HalfInt::from_twice(twice_lambda)
        )));
    }
    let s = if twice_lambda > 0 { Sign::Plus } else { Sign::Minus };
    let mut out = Vec::new();
    // n + j + 1 = |λ|  ⇒  2j = 2|λ| − 2n − 2 ≥ 1
    let mut n = 0u32;
    loop {
        let twice_j = mag - 2 * n as i32 - 2;
        if twice_j < 1 {
            break;
        }
        for twice_k in (-twice_j..=twice_j).step_by(2) {
            out.push(QuantumNumbers {
                s,
                n,
                j: HalfInt::from_twice(twice_j),
                k: HalfInt::from_twice(twice_k),
            });
        }
        n += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub lambda: HalfInt,
    pub degeneracy: u64,
    /// (n, j) pairs with n + j + 1 = |λ|; each contributes 2j + 1 states.
    pub decomposition: Vec<(u32, HalfInt)>,
}

/// Eigenvalues with |λ| ≤ Λmax and their multiplicities λ² − ¼.
pub fn spectrum(lambda_max: f64) -> Vec<SpectrumEntry> {
    let mut out = Vec::new();
    let mut twice_mag = 3;
    while f64::from(twice_mag) / 2.0 <= lambda_max {
        let mag = f64::from(twice_mag) / 2.0;
        let degeneracy = (mag * mag - 0.25).round() as u64;
        let decomposition: Vec<(u32, HalfInt)> = (0..)
            .map(|n: u32| (n, HalfInt::from_twice(twice_mag - 2 * n as i32 - 2)))
            .take_while(|(_, j)| j.twice() >= 1)
            .collect();
        for sign in [1, -1] {
            out.push(SpectrumEntry {
                lambda: HalfInt::from_twice(sign * twice_mag),
                degeneracy,
                decomposition: decomposition.clone(),
            });
        }
        twice_mag += 2;
    }
    out
}

/// Which K-eigenspace an angular spinor belongs to: built from Y_{j−½} or Y_{j+½}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Lower,
    Upper,
}

/// Global phase of the upper-branch spinors. With Condon–Shortley harmonics
/// σ^χ maps the lower branch onto the upper one with phase +1.
pub const UPPER_BRANCH_PHASE: f64 = 1.0;

/// The angular two-spinor χ^k_{j∓½}(ϑ, φ).
pub fn angular_spinor(j: HalfInt, k: HalfInt, branch: Branch, theta: f64, phi: f64) -> Result<Spinor2> {
    if !j.is_half_odd() || j.twice() < 1 || !k.is_half_odd() || k.twice().abs() > j.twice() {
        return Err(Error::Index(format!("angular spinor needs j in N+1/2 and |k| <= j, got j={j}, k={k}")));
    }
    Ok(angular_spinor_unchecked(j, k, branch, theta, phi))
}

pub(crate) fn angular_spinor_unchecked(j: HalfInt, k: HalfInt, branch: Branch, theta: f64, phi: f64) -> Spinor2 {
    let jf = j.value();
    let kf = k.value();
    // k ∓ ½ as integers
    let k_lo = (k.twice() - 1) / 2;
    let k_hi = (k.twice() + 1) / 2;
    match branch {
        Branch::Lower => {
            let l = (j.twice() - 1) / 2;
            let a = ((jf + kf) / (2.0 * jf)).sqrt();
            let b = ((jf - kf) / (2.0 * jf)).sqrt();
            Spinor2::new(
                spherical_harmonic_or_zero(l, k_lo, theta, phi) * a,
                spherical_harmonic_or_zero(l, k_hi, theta, phi) * b,
            )
        }
        Branch::Upper => {
            let l = (j.twice() + 1) / 2;
            let a = ((jf + 1.0 - kf) / (2.0 * jf + 2.0)).sqrt();
            let b = ((jf + 1.0 + kf) / (2.0 * jf + 2.0)).sqrt();
            Spinor2::new(
                spherical_harmonic_or_zero(l, k_lo, theta, phi) * a,
                -spherical_harmonic_or_zero(l, k_hi, theta, phi) * b,
            ) * re(UPPER_BRANCH_PHASE)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaDirection {
    Chi,
    Theta,
    Phi,
}

/// σ^χ(ϑ, φ): the Pauli matrices contracted with the radial unit vector.
pub fn sigma_chi(theta: f64, phi: f64) -> Matrix2 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    pauli(3) * re(ct) + pauli(1) * re(st * cp) + pauli(2) * re(st * sp)
}

/// σ^χ, σ^ϑ or σ^φ at a point (closed universe, f(χ) = sin χ).
pub fn sigma_matrix(which: SigmaDirection, at: &S3Point) -> Result<Matrix2> {
    let (st, ct) = at.theta.sin_cos();
    let (sp, cp) = at.phi.sin_cos();
    let f = at.chi.sin();
    match which {
        SigmaDirection::Chi => Ok(sigma_chi(at.theta, at.phi)),
        SigmaDirection::Theta => {
            if f == 0.0 {
                return Err(Error::Singular(format!("sigma^theta at chi = {}", at.chi)));
            }
            Ok((pauli(3) * re(-st) + pauli(1) * re(ct * cp) + pauli(2) * re(ct * sp)) * re(1.0 / f))
        }
        SigmaDirection::Phi => {
            if f == 0.0 || st == 0.0 {
                return Err(Error::Singular(format!("sigma^phi at chi = {}, theta = {}", at.chi, at.theta)));
            }
            Ok((pauli(1) * re(-sp) + pauli(2) * re(cp)) * re(1.0 / (f * st)))
        }
    }
}

/// ln of the normalization constant making ∫₀^π (Φ₁² + Φ₂²) dχ = 1.
fn ln_radial_norm(n: u32, j: f64) -> f64 {
    let nf = f64::from(n);
    let lg = |x: f64| log_gamma(x).expect("positive argument");
    0.5 * ((nf + j + 1.0).ln() + lg(nf + 1.0) + lg(nf + 2.0 * j + 2.0)
        - (2.0 * j + 1.0) * std::f64::consts::LN_2
        - lg(nf + j + 1.0)
        - lg(nf + j + 2.0))
}

/// Normalized solution (Φ₁, Φ₂) of the radial equations.
#[derive(Clone, Copy, Debug)]
pub struct RadialPair {
    pub s: Sign,
    pub n: u32,
    pub j: HalfInt,
    ln_norm: f64,
}

impl RadialPair {
    pub fn new(s: Sign, n: u32, j: HalfInt) -> Result<Self> {
        if !j.is_half_odd() || j.twice() < 1 {
            return Err(Error::Index(format!("j = {j} must be a positive half-integer")));
        }
        Ok(Self { s, n, j, ln_norm: ln_radial_norm(n, j.value()) })
    }

    pub fn eigenvalue(&self) -> f64 {
        self.s.value() * (f64::from(self.n) + self.j.value() + 1.0)
    }

    /// (cos(χ/2) P_n^{(j,j+1)}(cosχ), s sin(χ/2) P_n^{(j+1,j)}(cosχ)) times the normalization.
    fn core(&self, chi: f64) -> (f64, f64) {
        let j = self.j.value();
        let u = chi.cos();
        let n = self.n as usize;
        let norm = self.ln_norm.exp();
        let p_a = jacobi_unchecked(n, j, j + 1.0, u);
        let p_b = jacobi_unchecked(n, j + 1.0, j, u);
        (norm * (0.5 * chi).cos() * p_a, self.s.value() * norm * (0.5 * chi).sin() * p_b)
    }

    /// (Φ₁, Φ₂)(χ).
    pub fn eval(&self, chi: f64) -> (f64, f64) {
        let w = chi.sin().powf(self.j.value() + 0.5);
        let (a, b) = self.core(chi);
        (w * a, w * b)
    }

    /// (Φ₁, Φ₂)(χ) / sin χ, with the sine powers combined so the result is
    /// finite at the poles.
    pub fn eval_over_sin(&self, chi: f64) -> (f64, f64) {
        let w = chi.sin().powf(self.j.value() - 0.5);
        let (a, b) = self.core(chi);
        (w * a, w * b)
    }

    /// Analytic derivative (Φ₁', Φ₂') via the Jacobi derivative identity.
    pub fn deriv(&self, chi: f64) -> (f64, f64) {
        let j = self.j.value();
        let n = self.n as usize;
        let u = chi.cos();
        let (sc, cc) = chi.sin_cos();
        let (sh, ch) = (0.5 * chi).sin_cos();
        let norm = self.ln_norm.exp();
        let pj = |a: f64, b: f64| jacobi_unchecked(n, a, b, u);
        let dpj = |a: f64, b: f64| {
            if n == 0 {
                0.0
            } else {
                0.5 * (n as f64 + a + b + 1.0) * jacobi_unchecked(n - 1, a + 1.0, b + 1.0, u)
            }
        };
        let w = sc.powf(j + 0.5);
        let dw = (j + 0.5) * sc.powf(j - 0.5) * cc;
        let (pa, dpa) = (pj(j, j + 1.0), dpj(j, j + 1.0));
        let (pb, dpb) = (pj(j + 1.0, j), dpj(j + 1.0, j));
        // d/dχ P(cos χ) = −sin χ · P'(cos χ)
        let d1 = dw * ch * pa - 0.5 * w * sh * pa - w * ch * sc * dpa;
        let d2 = dw * sh * pb + 0.5 * w * ch * pb - w * sh * sc * dpb;
        (norm * d1, self.s.value() * norm * d2)
    }
}

/// (Φ₁, Φ₂) for the given labels at χ.
pub fn radial_pair(s: Sign, n: u32, j: HalfInt, chi: f64) -> Result<(f64, f64)> {
    if !(chi > 0.0 && chi < PI) {
        return Err(Error::Domain(format!("chi = {chi} outside (0, pi)")));
    }
    Ok(RadialPair::new(s, n, j)?.eval(chi))
}

/// Residual of the first-order radial system
/// [∂χ − (j+½)/sinχ · diag(1,−1) + λ·[[0,1],[−1,0]]] Φ for given Φ, Φ'.
pub fn radial_system_residual(j: HalfInt, lambda: f64, chi: f64, phi: (f64, f64), dphi: (f64, f64)) -> (f64, f64) {
    let kappa = (j.value() + 0.5) / chi.sin();
    (dphi.0 - kappa * phi.0 + lambda * phi.1, dphi.1 + kappa * phi.1 - lambda * phi.0)
}

/// Residual of the radial equations for the closed-form pair.
pub fn radial_residual(s: Sign, n: u32, j: HalfInt, chi: f64) -> Result<(f64, f64)> {
    let pair = RadialPair::new(s, n, j)?;
    Ok(radial_system_residual(j, pair.eigenvalue(), chi, pair.eval(chi), pair.deriv(chi)))
}

/// A two-spinor field on S³.
pub trait SpinorField2 {
    fn eval(&self, at: &S3Point) -> Spinor2;

    fn quantum_numbers(&self) -> Option<QuantumNumbers> {
        None
    }
}

/// Wraps a closure as a spinor field.
pub struct FnField<F>(pub F);

impl<F: Fn(&S3Point) -> Spinor2> SpinorField2 for FnField<F> {
    fn eval(&self, at: &S3Point) -> Spinor2 {
        (self.0)(at)
    }
}

/// ψ(χ,ϑ,φ) = (1/sinχ)(Φ₁ χ^k_{j−½} − i Φ₂ χ^k_{j+½}), unit L²(S³)² norm.
#[derive(Clone, Copy, Debug)]
pub struct Eigenfunction {
    pub q: QuantumNumbers,
    radial: RadialPair,
}

impl Eigenfunction {
    pub fn eigenvalue(&self) -> f64 {
        self.q.eigenvalue()
    }
}

impl SpinorField2 for Eigenfunction {
    fn eval(&self, at: &S3Point) -> Spinor2 {
        let (f1, f2) = self.radial.eval_over_sin(at.chi);
        let lower = angular_spinor_unchecked(self.q.j, self.q.k, Branch::Lower, at.theta, at.phi);
        let upper = angular_spinor_unchecked(self.q.j, self.q.k, Branch::Upper, at.theta, at.phi);
        lower * re(f1) - upper * c(0.0, f2)
    }

    fn quantum_numbers(&self) -> Option<QuantumNumbers> {
        Some(self.q)
    }
}

pub fn eigenfunction(q: QuantumNumbers) -> Eigenfunction {
    let radial = RadialPair::new(q.s, q.n, q.j).expect("validated quantum numbers");
    Eigenfunction { q, radial }
}

/// All eigenfunctions with |λ| ≤ Λmax, ordered by |λ|, then sign, n, k.
pub fn eigenbasis(lambda_max: f64) -> Vec<Eigenfunction> {
    spectrum(lambda_max)
        .iter()
        .flat_map(|e| modes_for_eigenvalue(e.lambda.twice()).expect("spectrum entries are eigenvalues"))
        .map(eigenfunction)
        .collect()
}

fn central_diff4(f: impl Fn(f64) -> Spinor2, x: f64, h: f64) -> Spinor2 {
    (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * re(8.0)) * re(1.0 / (12.0 * h))
}

/// Finite-difference application of the S³ Dirac operator
/// iσ^χ(∂χ + (cosχ − 1)/sinχ) + iσ^ϑ ∂ϑ + iσ^φ ∂φ, 4th-order stencils.
pub fn apply_dirac_s3(f: &dyn SpinorField2, at: &S3Point, h: f64) -> Result<Spinor2> {
    let margin = 2.0 * h;
    if !(at.chi - margin > 0.0 && at.chi + margin < PI && at.theta - margin > 0.0 && at.theta + margin < PI) {
        return Err(Error::Domain(format!(
            "point ({}, {}, {}) closer than 2h = {margin} to a coordinate singularity",
            at.chi, at.theta, at.phi
        )));
    }
    let d_chi = central_diff4(|x| f.eval(&S3Point::new(x, at.theta, at.phi)), at.chi, h);
    let d_theta = central_diff4(|x| f.eval(&S3Point::new(at.chi, x, at.phi)), at.theta, h);
    let d_phi = central_diff4(|x| f.eval(&S3Point::new(at.chi, at.theta, x)), at.phi, h);
    let value = f.eval(at);
    let conn = (at.chi.cos() - 1.0) / at.chi.sin();
    let s_chi = sigma_matrix(SigmaDirection::Chi, at)?;
    let s_theta = sigma_matrix(SigmaDirection::Theta, at)?;
    let s_phi = sigma_matrix(SigmaDirection::Phi, at)?;
    Ok((s_chi * (d_chi + value * re(conn)) + s_theta * d_theta + s_phi * d_phi) * I)
}

/// ⟨f, g⟩ = ∫ f† g dμ over an S³ grid.
pub fn inner_product(f: &dyn SpinorField2, g: &dyn SpinorField2, grid: &crate::quadrature::S3Grid) -> C64 {
    crate::quadrature::integrate_s3(|p| f.eval(p).dotc(&g.eval(p)), grid)
}
