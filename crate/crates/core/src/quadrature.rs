//! Gauss–Legendre rules, the S³ product grid and an adaptive Gauss–Kronrod
//! integrator for one-dimensional phase integrals.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Matrix2, Matrix4, Spinor2, C64};

/// Nodes and weights of a quadrature rule on an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Number of Gauss points; the rule is exact for polynomials of degree 2·order − 1.
    pub order: usize,
}

impl IntervalGrid {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre P_N and its derivative at x.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// N-point Gauss–Legendre rule on (a, b).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<IntervalGrid> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss–Legendre order must be >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval ({a}, {b})")));
    }
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    if n == 1 {
        ref_weights[0] = 2.0;
    } else {
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            ref_nodes[i] = -x;
            ref_nodes[n - 1 - i] = x;
            ref_weights[i] = w;
            ref_weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            ref_nodes[n / 2] = 0.0;
        }
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(IntervalGrid {
        nodes: ref_nodes.iter().map(|x| mid + half * x).collect(),
        weights: ref_weights.iter().map(|w| half * w).collect(),
        order: n,
    })
}

/// Composite Gauss–Legendre: `panels` equal panels of `order` points each.
pub fn composite_gauss_legendre(order: usize, panels: usize, a: f64, b: f64) -> Result<IntervalGrid> {
    if panels == 0 {
        return Err(Error::InvalidArgument("need at least one panel".into()));
    }
    let reference = gauss_legendre(order, 0.0, 1.0)?;
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let left = a + h * p as f64;
        for (x, w) in reference.nodes.iter().zip(&reference.weights) {
            nodes.push(left + h * x);
            weights.push(h * w);
        }
    }
    Ok(IntervalGrid { nodes, weights, order })
}

/// A point of S³ in the coordinates (χ, ϑ, φ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S3Point {
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl S3Point {
    pub fn new(chi: f64, theta: f64, phi: f64) -> Self {
        Self { chi, theta, phi }
    }

    /// Strictly inside the coordinate chart: χ, ϑ ∈ (0, π).
    pub fn is_interior(&self) -> bool {
        self.chi > 0.0 && self.chi < PI && self.theta > 0.0 && self.theta < PI
    }
}

/// Product quadrature grid on S³; weights include sin²χ · sinϑ.
#[derive(Clone, Debug)]
pub struct S3Grid {
    pub nodes: Vec<S3Point>,
    pub weights: Vec<f64>,
    pub dims: (usize, usize, usize),
}

impl S3Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss–Legendre in χ and in u = cosϑ, periodic trapezoid in φ.
pub fn make_s3_grid(n_chi: usize, n_theta: usize, n_phi: usize) -> Result<S3Grid> {
    if n_chi == 0 || n_theta == 0 || n_phi == 0 {
        return Err(Error::InvalidArgument(format!(
            "S3 grid sizes must be positive, got ({n_chi}, {n_theta}, {n_phi})"
        )));
    }
    let g_chi = gauss_legendre(n_chi, 0.0, PI)?;
    let g_u = gauss_legendre(n_theta, -1.0, 1.0)?;
    let w_phi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_chi * n_theta * n_phi);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (&chi, &wc) in g_chi.nodes.iter().zip(&g_chi.weights) {
        let wc = wc * chi.sin().powi(2);
        for (&u, &wu) in g_u.nodes.iter().zip(&g_u.weights) {
            let theta = u.acos();
            for ip in 0..n_phi {
                nodes.push(S3Point::new(chi, theta, w_phi * ip as f64));
                weights.push(wc * wu * w_phi);
            }
        }
    }
    Ok(S3Grid { nodes, weights, dims: (n_chi, n_theta, n_phi) })
}

/// Values that can be accumulated by a quadrature sum.
pub trait Integrand: Send {
    fn zero() -> Self;
    fn add_scaled(&mut self, w: f64, v: &Self);
    fn combine(self, other: Self) -> Self;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, w: f64, v: &Self) {
        *self += w * v;
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

impl Integrand for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, w: f64, v: &Self) {
        *self += v * w;
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

macro_rules! matrix_integrand {
    ($t:ty) => {
        impl Integrand for $t {
            fn zero() -> Self {
                <$t>::zeros()
            }
            fn add_scaled(&mut self, w: f64, v: &Self) {
                for (a, b) in self.iter_mut().zip(v.iter()) {
                    *a += b * w;
                }
            }
            fn combine(self, other: Self) -> Self {
                self + other
            }
        }
    };
}

matrix_integrand!(Spinor2);
matrix_integrand!(Matrix2);
matrix_integrand!(Matrix4);

/// Σ wᵢ f(xᵢ) over the grid.
pub fn integrate_s3<T: Integrand, F: Fn(&S3Point) -> T>(f: F, grid: &S3Grid) -> T {
    let mut acc = T::zero();
    for (x, &w) in grid.nodes.iter().zip(&grid.weights) {
        acc.add_scaled(w, &f(x));
    }
    acc
}

/// Parallel variant of [`integrate_s3`]. Partial sums over fixed chunks are
/// combined in grid order, so the result does not depend on the thread count.
pub fn integrate_s3_par<T, F>(f: F, grid: &S3Grid) -> T
where
    T: Integrand,
    F: Fn(&S3Point) -> T + Sync,
{
    const CHUNK: usize = 512;
    let partial: Vec<T> = grid
        .nodes
        .par_chunks(CHUNK)
        .zip(grid.weights.par_chunks(CHUNK))
        .map(|(xs, ws)| {
            let mut acc = T::zero();
            for (x, &w) in xs.iter().zip(ws) {
                acc.add_scaled(w, &f(x));
            }
            acc
        })
        .collect();
    partial.into_iter().fold(T::zero(), T::combine)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WK[7] * fc;
    let mut gauss = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WK[i] * s;
        if i % 2 == 1 {
            gauss += GK_WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration to absolute tolerance `tol`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut stack = vec![(lo, hi, tol)];
    let mut total = 0.0;
    let mut splits = 0usize;
    while let Some((x0, x1, t)) = stack.pop() {
        let (v, err) = gk15(&f, x0, x1);
        if err <= t.max(1e-15 * v.abs()) || (x1 - x0) < 1e-12 * (hi - lo) {
            total += v;
            continue;
        }
        splits += 1;
        if splits > 200_000 {
            return Err(Error::Convergence(format!("adaptive quadrature on ({a}, {b}) did not converge")));
        }
        let mid = 0.5 * (x0 + x1);
        stack.push((x0, mid, 0.5 * t));
        stack.push((mid, x1, 0.5 * t));
    }
    Ok(sign * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_examples() {
        let g1 = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(g1.nodes, vec![0.0]);
        assert_eq!(g1.weights, vec![2.0]);

        let g3 = gauss_legendre(3, -1.0, 1.0).unwrap();
        assert!((g3.integrate(|u| u.powi(4)) - 0.4).abs() <= 1e-14);

        let g20 = gauss_legendre(20, 0.0, PI).unwrap();
        assert!((g20.integrate(|x| x.sin().powi(2)) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_errors_and_interiority() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
        for n in 1..60 {
            let g = gauss_legendre(n, 0.0, PI).unwrap();
            assert!(g.nodes.iter().all(|&x| x > 0.0 && x < PI));
            assert!((g.weights.iter().sum::<f64>() - PI).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_exactness_degree() {
        for n in 1..=12 {
            let g = gauss_legendre(n, -1.0, 1.0).unwrap();
            for d in 0..(2 * n) {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((g.integrate(|u| u.powi(d as i32)) - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn s3_grid_volume_and_constants() {
        let grid = make_s3_grid(20, 16, 32).unwrap();
        let vol = 2.0 * PI * PI;
        assert!((grid.total_weight() - vol).abs() <= 1e-10 * vol);
        assert!(grid.weights.iter().all(|&w| w > 0.0));
        assert!(grid.nodes.iter().all(S3Point::is_interior));
        let c = 3.25;
        assert!((integrate_s3(|_| c, &grid) - c * vol).abs() < 1e-10 * c * vol);
        assert_eq!(integrate_s3(|_| C64::new(0.0, 0.0), &grid), C64::new(0.0, 0.0));
        assert!(make_s3_grid(0, 4, 4).is_err());
    }

    #[test]
    fn s3_integration_of_angular_density() {
        use crate::special_functions::{spherical_harmonic, SphericalHarmonicIndex};
        // ∫ |Y_1^0|² sin²χ-compensated: the χ integral gives π/2, the S² part gives 1
        let grid = make_s3_grid(12, 8, 8).unwrap();
        let y = SphericalHarmonicIndex::new(1, 0).unwrap();
        let v = integrate_s3(|p| spherical_harmonic(y, p.theta, p.phi).norm_sqr(), &grid);
        assert!((v - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_integrand_gives_hermitian_result() {
        let grid = make_s3_grid(6, 6, 8).unwrap();
        let m = integrate_s3(
            |p| {
                let z = C64::new(p.chi.cos(), p.theta.sin() * p.phi.sin());
                Matrix2::new(C64::new(p.chi, 0.0), z, z.conj(), C64::new(p.theta, 0.0))
            },
            &grid,
        );
        assert!((m - m.adjoint()).iter().all(|z| z.norm() < 1e-13));
        let mp: Matrix2 = integrate_s3_par(
            |p| {
                let z = C64::new(p.chi.cos(), p.theta.sin() * p.phi.sin());
                Matrix2::new(C64::new(p.chi, 0.0), z, z.conj(), C64::new(p.theta, 0.0))
            },
            &grid,
        );
        assert!((m - mp).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gauss_direction_convergence_order() {
        // smooth non-polynomial integrand in χ: e^{cos χ} sin²χ
        let exact = {
            let g = gauss_legendre(60, 0.0, PI).unwrap();
            g.integrate(|x| x.cos().exp() * x.sin().powi(2))
        };
        let err = |n: usize| {
            let g = gauss_legendre(n, 0.0, PI).unwrap();
            (g.integrate(|x| x.cos().exp() * x.sin().powi(2)) - exact).abs()
        };
        let (e2, e4) = (err(2), err(4));
        assert!(e4 < e2 / 4.0, "e2={e2} e4={e4}");
    }

    #[test]
    fn adaptive_gauss_kronrod() {
        let v = integrate_adaptive(|x| x.sin(), 0.0, PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_adaptive(|x| (x * x + 2.25).sqrt(), 3.0, 0.0, 1e-13).unwrap();
        let exact = 0.5 * (3.0 * (9.0f64 + 2.25).sqrt() + 2.25 * ((3.0 + (11.25f64).sqrt()) / 1.5).ln());
        assert!((v + exact).abs() < 1e-12);
    }
}
