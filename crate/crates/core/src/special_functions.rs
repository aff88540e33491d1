//! Jacobi polynomials, log-gamma / Pochhammer and spherical harmonics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// An exact half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInt(2 * v)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// True for values in ℤ + ½.
    pub const fn is_half_odd(self) -> bool {
        self.0 % 2 != 0
    }

    /// Integer value, when the half-integer is in fact integral.
    pub fn to_int(self) -> Option<i32> {
        (self.0 % 2 == 0).then_some(self.0 / 2)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Degree and upper indices of a Jacobi polynomial P_n^{(a,b)}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl JacobiParams {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        Self { n, a, b }
    }

    pub fn half(n: usize, a: HalfInt, b: HalfInt) -> Self {
        Self { n, a: a.value(), b: b.value() }
    }
}

fn check_unit_interval(u: f64) -> Result<()> {
    if u.abs() > 1.0 || u.is_nan() {
        return Err(Error::Domain(format!("Jacobi argument {u} outside [-1, 1]")));
    }
    Ok(())
}

#[inline]
fn jacobi_step(k: usize, a: f64, b: f64, u: f64, p1: f64, p2: f64) -> f64 {
    let k = k as f64;
    let s = 2.0 * k + a + b;
    let a1 = 2.0 * k * (k + a + b) * (s - 2.0);
    let a2 = (s - 1.0) * (a * a - b * b);
    let a3 = (s - 2.0) * (s - 1.0) * s;
    let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
    ((a2 + a3 * u) * p1 - a4 * p2) / a1
}

#[inline]
fn jacobi_one(a: f64, b: f64, u: f64) -> f64 {
    (a + 1.0) + 0.5 * (a + b + 2.0) * (u - 1.0)
}

/// P_n^{(a,b)}(u) by the three-term recurrence in the degree.
pub fn jacobi_p(p: JacobiParams, u: f64) -> Result<f64> {
    check_unit_interval(u)?;
    Ok(jacobi_unchecked(p.n, p.a, p.b, u))
}

pub(crate) fn jacobi_unchecked(n: usize, a: f64, b: f64, u: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p2 = 1.0;
    let mut p1 = jacobi_one(a, b, u);
    for k in 2..=n {
        let p = jacobi_step(k, a, b, u, p1, p2);
        p2 = p1;
        p1 = p;
    }
    p1
}

/// All values P_0, …, P_{n_max} at `u` from one pass of the recurrence.
pub fn jacobi_sequence(n_max: usize, a: f64, b: f64, u: f64) -> Result<Vec<f64>> {
    check_unit_interval(u)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(jacobi_one(a, b, u));
    for k in 2..=n_max {
        let p = jacobi_step(k, a, b, u, out[k - 1], out[k - 2]);
        out.push(p);
    }
    Ok(out)
}

/// d/du P_n^{(a,b)}(u) = (n+a+b+1)/2 · P_{n-1}^{(a+1,b+1)}(u).
pub fn jacobi_p_deriv(p: JacobiParams, u: f64) -> Result<f64> {
    check_unit_interval(u)?;
    if p.n == 0 {
        return Ok(0.0);
    }
    let n = p.n as f64;
    Ok(0.5 * (n + p.a + p.b + 1.0) * jacobi_unchecked(p.n - 1, p.a + 1.0, p.b + 1.0, u))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma_lanczos(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &coef) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += coef / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln Γ(x) for x > 0.
///
/// Integers and half-integers up to 64 are summed exactly from Γ(1) = 1 and
/// Γ(½) = √π; everything else goes through a Lanczos approximation.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let twice = 2.0 * x;
    if twice == twice.round() && x <= 64.0 {
        let (mut acc, mut y) = if twice as i64 % 2 == 0 { (0.0, 1.0) } else { (0.5 * PI.ln(), 0.5) };
        while y < x {
            acc += y.ln();
            y += 1.0;
        }
        return Ok(acc);
    }
    Ok(ln_gamma_lanczos(x))
}

/// Rising factorial (x)_n = x (x+1) … (x+n-1).
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// Spherical harmonic index (l, k) with |k| ≤ l.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphericalHarmonicIndex {
    pub l: i32,
    pub k: i32,
}

impl SphericalHarmonicIndex {
    pub fn new(l: i32, k: i32) -> Result<Self> {
        if l < 0 || k.abs() > l {
            return Err(Error::Index(format!("spherical harmonic (l={l}, k={k}) requires |k| <= l")));
        }
        Ok(Self { l, k })
    }
}

/// Phase convention of the spherical harmonics: Condon–Shortley, i.e. the
/// factor (−1)^k for k > 0 is included in Y^k_l. With this choice the angular
/// spinors are swapped by σ^χ without any extra phase.
pub const CONDON_SHORTLEY: bool = true;

/// Orthonormalized associated Legendre function P̄_l^m(x) for 0 ≤ m ≤ l,
/// including the Condon–Shortley phase when enabled.
fn normalized_legendre(l: i32, m: i32, x: f64) -> f64 {
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        let i = f64::from(i);
        pmm *= ((2.0 * i + 1.0) / (2.0 * i)).sqrt() * sin_t;
        if CONDON_SHORTLEY {
            pmm = -pmm;
        }
    }
    if l == m {
        return pmm;
    }
    let mf = f64::from(m);
    let mut p_prev = pmm;
    let mut p_cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in (m + 2)..=l {
        let lf = f64::from(ll);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let p_next = a * (x * p_cur - p_prev / a_prev);
        p_prev = p_cur;
        p_cur = p_next;
    }
    p_cur
}

/// Y^k_l(ϑ, φ), normalized on S².
pub fn spherical_harmonic(idx: SphericalHarmonicIndex, theta: f64, phi: f64) -> C64 {
    let m = idx.k.abs();
    let p = normalized_legendre(idx.l, m, theta.cos());
    let y = C64::from_polar(p, f64::from(m) * phi);
    if idx.k >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Y^k_l with the convention Y^k_l = 0 for |k| > l (or l < 0).
pub fn spherical_harmonic_or_zero(l: i32, k: i32, theta: f64, phi: f64) -> C64 {
    match SphericalHarmonicIndex::new(l, k) {
        Ok(idx) => spherical_harmonic(idx, theta, phi),
        Err(_) => C64::new(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(x: f64, k: usize) -> f64 {
        // generalized binomial coefficient binom(x, k)
        (0..k).map(|i| (x - i as f64) / (i as f64 + 1.0)).product()
    }

    /// Explicit finite-sum oracle for P_n^{(a,b)}.
    fn jacobi_series(n: usize, a: f64, b: f64, u: f64) -> f64 {
        let nf = n as f64;
        (0..=n)
            .map(|s| {
                binom(nf + a, n - s)
                    * binom(nf + b, s)
                    * ((u - 1.0) / 2.0).powi(s as i32)
                    * ((u + 1.0) / 2.0).powi((n - s) as i32)
            })
            .sum()
    }

    #[test]
    fn jacobi_examples() {
        let p0 = JacobiParams::new(0, 0.5, 1.5);
        assert_eq!(jacobi_p(p0, 0.3).unwrap(), 1.0);

        let p1 = JacobiParams::new(1, 0.5, 1.5);
        let oracle = jacobi_series(1, 0.5, 1.5, 0.0);
        assert!((oracle + 0.5).abs() < 1e-15);
        assert!((jacobi_p(p1, 0.0).unwrap() + 0.5).abs() < 1e-15);

        let p4 = JacobiParams::new(4, 1.5, 0.5);
        let expected = (log_gamma(6.5).unwrap() - log_gamma(2.5).unwrap() - log_gamma(5.0).unwrap()).exp();
        assert!((jacobi_series(4, 1.5, 0.5, 1.0) - expected).abs() < 1e-12);
        assert!((jacobi_p(p4, 1.0).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn jacobi_recurrence_matches_series() {
        for n in 0..=10 {
            for &a in &[0.5, 1.5, 2.5] {
                for &b in &[0.5, 1.5, 2.5] {
                    for &u in &[-0.9, -0.3, 0.0, 0.4, 0.9] {
                        let r = jacobi_p(JacobiParams::new(n, a, b), u).unwrap();
                        let s = jacobi_series(n, a, b, u);
                        let scale = s.abs().max(1e-300);
                        // absolute floor for values that cancel to ~0
                        assert!(
                            (r - s).abs() <= 1e-12 * scale.max(1.0),
                            "n={n} a={a} b={b} u={u}: {r} vs {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_sequence_matches_single() {
        let seq = jacobi_sequence(30, 0.5, 1.5, 0.37).unwrap();
        for (n, v) in seq.iter().enumerate() {
            let single = jacobi_p(JacobiParams::new(n, 0.5, 1.5), 0.37).unwrap();
            assert_eq!(*v, single);
        }
    }

    #[test]
    fn jacobi_domain_error() {
        assert!(matches!(jacobi_p(JacobiParams::new(2, 0.5, 0.5), 1.2), Err(Error::Domain(_))));
        assert!(jacobi_p_deriv(JacobiParams::new(2, 0.5, 0.5), -1.01).is_err());
    }

    #[test]
    fn jacobi_derivative_examples() {
        assert_eq!(jacobi_p_deriv(JacobiParams::new(0, 0.5, 1.5), 0.7).unwrap(), 0.0);
        for &u in &[-0.8, 0.0, 0.33] {
            let d = jacobi_p_deriv(JacobiParams::new(1, 0.5, 1.5), u).unwrap();
            assert!((d - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jacobi_derivative_matches_finite_difference() {
        let h = 1e-4;
        for n in 0..=8 {
            for &(a, b) in &[(2.0, 1.0), (0.5, 1.5), (1.5, 0.5)] {
                for &u in &[-0.7, -0.1, 0.2, 0.6] {
                    let p = |x: f64| jacobi_p(JacobiParams::new(n, a, b), x).unwrap();
                    let fd = (-p(u + 2.0 * h) + 8.0 * p(u + h) - 8.0 * p(u - h) + p(u - 2.0 * h)) / (12.0 * h);
                    let d = jacobi_p_deriv(JacobiParams::new(n, a, b), u).unwrap();
                    assert!((d - fd).abs() < 1e-8, "n={n} a={a} b={b} u={u}: {d} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(1.5).unwrap() - (PI.sqrt() / 2.0).ln()).abs() < 1e-15);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert!((pochhammer(2.5, 3) - 2.5 * 3.5 * 4.5).abs() < 1e-13);
    }

    #[test]
    fn lanczos_agrees_with_exact_table() {
        for twice in 1..120 {
            let x = f64::from(twice) / 2.0;
            let exact = log_gamma(x).unwrap();
            let approx = ln_gamma_lanczos(x);
            assert!((exact - approx).abs() < 1e-12 * exact.abs().max(1.0), "x={x}");
        }
        // non half-integer via the recursion Γ(x+1) = xΓ(x)
        let x = 3.3;
        assert!((log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap() - x.ln()).abs() < 1e-13);
    }

    /// Unnormalized associated Legendre oracle by the classical recurrence
    /// (Condon–Shortley phase included), normalized by the factorial formula.
    fn ylm_oracle(l: i32, m: i32, theta: f64, phi: f64) -> C64 {
        let x = theta.cos();
        let s = (1.0 - x * x).sqrt();
        let mut pmm = 1.0;
        for i in 1..=m {
            pmm *= -(2.0 * f64::from(i) - 1.0) * s;
        }
        let plm = if l == m {
            pmm
        } else {
            let mut p0 = pmm;
            let mut p1 = x * (2.0 * f64::from(m) + 1.0) * pmm;
            for ll in (m + 2)..=l {
                let p2 = ((2.0 * f64::from(ll) - 1.0) * x * p1 - f64::from(ll + m - 1) * p0) / f64::from(ll - m);
                p0 = p1;
                p1 = p2;
            }
            p1
        };
        let fact = |k: i32| (1..=k).map(f64::from).product::<f64>();
        let norm = ((2.0 * f64::from(l) + 1.0) / (4.0 * PI) * fact(l - m) / fact(l + m)).sqrt();
        C64::from_polar(norm * plm, f64::from(m) * phi)
    }

    #[test]
    fn spherical_harmonic_examples() {
        let y00 = spherical_harmonic(SphericalHarmonicIndex::new(0, 0).unwrap(), 0.4, 2.0);
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let (t, p) = (1.1, 0.3);
        let y10 = spherical_harmonic(SphericalHarmonicIndex::new(1, 0).unwrap(), t, p);
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
        let y11 = spherical_harmonic(SphericalHarmonicIndex::new(1, 1).unwrap(), t, p);
        let expect = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - expect).norm() < 1e-15);
        for l in 0..=6 {
            for m in 0..=l {
                let a = spherical_harmonic(SphericalHarmonicIndex::new(l, m).unwrap(), t, p);
                assert!((a - ylm_oracle(l, m, t, p)).norm() < 1e-13, "l={l} m={m}");
            }
        }
        assert!(SphericalHarmonicIndex::new(1, 2).is_err());
        assert_eq!(spherical_harmonic_or_zero(1, -2, t, p), C64::new(0.0, 0.0));
    }

    #[test]
    fn spherical_harmonics_orthonormal() {
        use crate::quadrature::gauss_legendre;
        let gu = gauss_legendre(24, -1.0, 1.0).unwrap();
        let nphi = 32;
        let mut worst: f64 = 0.0;
        let idx: Vec<(i32, i32)> = (0..=6).flat_map(|l| (-l..=l).map(move |k| (l, k))).collect();
        for &(l1, k1) in &idx {
            for &(l2, k2) in &idx {
                let mut acc = C64::new(0.0, 0.0);
                for (u, wu) in gu.nodes.iter().zip(&gu.weights) {
                    let theta = u.acos();
                    for ip in 0..nphi {
                        let phi = 2.0 * PI * ip as f64 / nphi as f64;
                        let a = spherical_harmonic_or_zero(l1, k1, theta, phi);
                        let b = spherical_harmonic_or_zero(l2, k2, theta, phi);
                        acc += a.conj() * b * (wu * 2.0 * PI / nphi as f64);
                    }
                }
                let target = if (l1, k1) == (l2, k2) { 1.0 } else { 0.0 };
                worst = worst.max((acc - C64::new(target, 0.0)).norm());
            }
        }
        assert!(worst <= 1e-10, "worst deviation {worst}");
    }
}
