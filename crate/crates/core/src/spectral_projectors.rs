//! Spectral projector kernels E_λ(x, y) of the S³ Dirac operator.
//!
//! `kernel_sum` builds the kernel from the eigenbasis for arbitrary x, y;
//! `kernel_northpole` is the closed form for y at the north pole χ = 0.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, re, Matrix2, Spinor2};
use crate::quadrature::{integrate_s3, S3Grid, S3Point};
use crate::s3_dirac::{eigenfunction, modes_for_eigenvalue, sigma_chi, Eigenfunction, QuantumNumbers, SpinorField2};
use crate::special_functions::{jacobi_sequence, jacobi_unchecked, log_gamma, HalfInt};

/// E_λ as a sum over the eigenfunctions of one eigenspace.
#[derive(Clone, Debug)]
pub struct ProjectorKernel {
    pub lambda: HalfInt,
    modes: Vec<Eigenfunction>,
}

impl ProjectorKernel {
    pub fn new(lambda: HalfInt) -> Result<Self> {
        let modes = modes_for_eigenvalue(lambda.twice())?.into_iter().map(eigenfunction).collect();
        Ok(Self { lambda, modes })
    }

    pub fn dimension(&self) -> usize {
        self.modes.len()
    }

    pub fn eval(&self, x: &S3Point, y: &S3Point) -> Matrix2 {
        self.modes.iter().fold(Matrix2::zeros(), |acc, psi| acc + psi.eval(x) * psi.eval(y).adjoint())
    }

    /// (E_λ f)(x) = ∫ E_λ(x, y) f(y) dμ_y, computed as Σ ψ(x)⟨ψ, f⟩.
    pub fn apply(&self, f: &dyn SpinorField2, x: &S3Point, grid: &S3Grid) -> Spinor2 {
        self.modes.iter().fold(Spinor2::zeros(), |acc, psi| {
            let overlap = integrate_s3(|y| psi.eval(y).dotc(&f.eval(y)), grid);
            acc + psi.eval(x) * overlap
        })
    }
}

/// Σ_{n+j+1=|λ|, k} ψ(x) ψ(y)†.
pub fn kernel_sum(lambda: HalfInt, x: &S3Point, y: &S3Point) -> Result<Matrix2> {
    Ok(ProjectorKernel::new(lambda)?.eval(x, y))
}

fn northpole_prefactor(n: u32) -> f64 {
    let nf = f64::from(n);
    let lg = |x: f64| log_gamma(x).expect("positive argument");
    (lg(nf + 3.0) - lg(nf + 1.5)).exp() / (8.0 * PI.powf(1.5))
}

/// E_λ(x, north pole) for λ = ±(n + 3/2), in closed form.
pub fn kernel_northpole(lambda: HalfInt, x: &S3Point) -> Result<Matrix2> {
    let twice = lambda.twice();
    if twice.abs() < 3 || twice % 2 == 0 {
        return Err(Error::InvalidArgument(format!("{lambda} is not an eigenvalue")));
    }
    let n = ((twice.abs() - 3) / 2) as u32;
    let u = x.chi.cos();
    let (sh, ch) = (0.5 * x.chi).sin_cos();
    let a = ch * jacobi_unchecked(n as usize, 0.5, 1.5, u);
    let b = sh * jacobi_unchecked(n as usize, 1.5, 0.5, u);
    let sign = if twice > 0 { -1.0 } else { 1.0 };
    let pref = northpole_prefactor(n);
    Ok((Matrix2::identity() * re(a) + sigma_chi(x.theta, x.phi) * c(0.0, sign * b)) * re(pref))
}

/// The scalar coefficients (a_n, b_n) with E_{±(n+3/2)}(x, pole) = a_n·Id ∓ i b_n·σ^χ,
/// for all n ≤ n_max at once.
pub fn northpole_coefficients(n_max: usize, chi: f64) -> Vec<(f64, f64)> {
    let u = chi.cos();
    let (sh, ch) = (0.5 * chi).sin_cos();
    let pa = jacobi_sequence(n_max, 0.5, 1.5, u).expect("cos chi in [-1, 1]");
    let pb = jacobi_sequence(n_max, 1.5, 0.5, u).expect("cos chi in [-1, 1]");
    let mut pref = northpole_prefactor(0);
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            let nf = n as f64;
            // (n+2)!/Γ(n+3/2) over (n+1)!/Γ(n+1/2)
            pref *= (nf + 2.0) / (nf + 0.5);
        }
        out.push((pref * ch * pa[n], pref * sh * pb[n]));
    }
    out
}

/// ∫ E_λ(x, y) ψ_q(y) dμ_y; errors unless q lies in the λ-eigenspace.
pub fn reproduce_check(lambda: HalfInt, q: QuantumNumbers, x: &S3Point, grid: &S3Grid) -> Result<Spinor2> {
    if q.twice_eigenvalue() != lambda.twice() {
        return Err(Error::EigenvalueMismatch { expected: lambda.value(), got: q.eigenvalue() });
    }
    apply_projector(lambda, &eigenfunction(q), x, grid)
}

/// ∫ E_λ(x, y) f(y) dμ_y by quadrature over y.
pub fn apply_projector(lambda: HalfInt, f: &dyn SpinorField2, x: &S3Point, grid: &S3Grid) -> Result<Spinor2> {
    let kernel = ProjectorKernel::new(lambda)?;
    Ok(integrate_s3(|y| kernel.eval(x, y) * f.eval(y), grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs2;
    use crate::quadrature::make_s3_grid;
    use crate::s3_dirac::Sign;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<S3Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| S3Point::new(rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..2.0 * PI)))
            .collect()
    }

    fn pole() -> S3Point {
        S3Point::new(1e-10, 0.0, 0.0)
    }

    #[test]
    fn near_pole_is_multiple_of_identity() {
        let x = S3Point::new(1e-3, 0.7, 0.2);
        let e = kernel_sum(HalfInt::from_twice(3), &x, &x).unwrap();
        let target = Matrix2::identity() * re(1.0 / (2.0 * PI * PI));
        assert!(max_abs2(&(e - target)) < 1e-6);
        let e = kernel_northpole(HalfInt::from_twice(3), &S3Point::new(0.0, 0.0, 0.0)).unwrap();
        assert!(max_abs2(&(e - target)) < 1e-15);
    }

    #[test]
    fn trace_identity_and_homogeneity() {
        for twice in [3, -5, 7] {
            let kernel = ProjectorKernel::new(HalfInt::from_twice(twice)).unwrap();
            let l = f64::from(twice) / 2.0;
            let expect = (l * l - 0.25) / (2.0 * PI * PI);
            let traces: Vec<f64> = random_points(20, 7).iter().map(|x| kernel.eval(x, x).trace().re).collect();
            for t in &traces {
                assert!((t - expect).abs() < 1e-8, "{twice}: {t} vs {expect}");
            }
            let spread = traces.iter().cloned().fold(f64::MIN, f64::max) - traces.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 1e-8);
        }
    }

    #[test]
    fn swap_is_adjoint() {
        let pts = random_points(6, 3);
        let kernel = ProjectorKernel::new(HalfInt::from_twice(-7)).unwrap();
        for w in pts.windows(2) {
            let d = kernel.eval(&w[0], &w[1]).adjoint() - kernel.eval(&w[1], &w[0]);
            assert!(max_abs2(&d) < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_mode_sum() {
        for n in 0..=4 {
            for sign in [1, -1] {
                let lambda = HalfInt::from_twice(sign * (2 * n + 3));
                let kernel = ProjectorKernel::new(lambda).unwrap();
                for i in 0..=28 {
                    let chi = 0.2 + 0.1 * f64::from(i);
                    let x = S3Point::new(chi, 1.1, 4.0);
                    let d = kernel.eval(&x, &pole()) - kernel_northpole(lambda, &x).unwrap();
                    assert!(max_abs2(&d) <= 1e-8, "n={n} sign={sign} chi={chi}: {}", max_abs2(&d));
                }
            }
        }
    }

    #[test]
    fn sigma_chi_term_flips_with_sign() {
        let x = S3Point::new(1.3, 0.4, 2.0);
        let p = kernel_northpole(HalfInt::from_twice(7), &x).unwrap();
        let m = kernel_northpole(HalfInt::from_twice(-7), &x).unwrap();
        let id_part = (p + m) * re(0.5);
        let sig_part = (p - m) * re(0.5);
        assert!(max_abs2(&(id_part - Matrix2::identity() * id_part[(0, 0)])) < 1e-14);
        assert!(max_abs2(&(sig_part - sigma_chi(0.4, 2.0) * sig_part[(0, 0)] * re(1.0 / x.theta.cos()))) < 1e-13);
    }

    #[test]
    fn coefficient_table_matches_direct() {
        let chi = 0.9;
        let table = northpole_coefficients(12, chi);
        let x = S3Point::new(chi, 0.0, 0.0);
        for (n, (a, b)) in table.iter().enumerate() {
            let lambda = HalfInt::from_twice(2 * n as i32 + 3);
            let e = kernel_northpole(lambda, &x).unwrap();
            // σ^χ = σ³ at ϑ = 0
            assert!((e[(0, 0)] - c(*a, -b)).norm() < 1e-12 * a.abs().max(1.0));
            assert!((e[(1, 1)] - c(*a, *b)).norm() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn reproduction() {
        let grid = make_s3_grid(16, 12, 16).unwrap();
        let half = HalfInt::from_twice(1);
        let q = QuantumNumbers::new(Sign::Plus, 0, half, half).unwrap();
        let q_minus = QuantumNumbers::new(Sign::Minus, 0, half, half).unwrap();
        let q2 = QuantumNumbers::new(Sign::Plus, 1, half, -half).unwrap();
        for x in random_points(5, 11) {
            let r = reproduce_check(HalfInt::from_twice(3), q, &x, &grid).unwrap();
            assert!((r - eigenfunction(q).eval(&x)).norm() < 1e-6);
            let r = apply_projector(HalfInt::from_twice(3), &eigenfunction(q_minus), &x, &grid).unwrap();
            assert!(r.norm() < 1e-6);
            let r = reproduce_check(HalfInt::from_twice(5), q2, &x, &grid).unwrap();
            assert!((r - eigenfunction(q2).eval(&x)).norm() < 1e-6);
        }
        assert!(matches!(
            reproduce_check(HalfInt::from_twice(3), q_minus, &pole(), &grid),
            Err(Error::EigenvalueMismatch { .. })
        ));
    }

    #[test]
    fn projectors_compose_orthogonally() {
        let grid = make_s3_grid(24, 20, 40).unwrap();
        let pts = random_points(2, 5);
        let (x, y) = (&pts[0], &pts[1]);
        let lambdas = [3, -3, 5].map(HalfInt::from_twice);
        let kernels: Vec<ProjectorKernel> = lambdas.iter().map(|l| ProjectorKernel::new(*l).unwrap()).collect();
        for (i, a) in kernels.iter().enumerate() {
            for (j, b) in kernels.iter().enumerate() {
                let comp = integrate_s3(|z| a.eval(x, z) * b.eval(z, y), &grid);
                let expect = if i == j { a.eval(x, y) } else { Matrix2::zeros() };
                assert!(max_abs2(&(comp - expect)) < 1e-5, "{i} {j}");
            }
        }
    }
}
