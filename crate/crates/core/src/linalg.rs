//! Small complex vectors and matrices used for spinor values and kernels.

use nalgebra as na;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Spinor2 = na::Vector2<C64>;
pub type Matrix2 = na::Matrix2<C64>;
pub type Matrix4 = na::Matrix4<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity2() -> Matrix2 {
    Matrix2::identity()
}

/// Pauli matrices σ¹, σ², σ³.
pub fn pauli(which: usize) -> Matrix2 {
    match which {
        1 => Matrix2::new(re(0.0), re(1.0), re(1.0), re(0.0)),
        2 => Matrix2::new(re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)),
        3 => Matrix2::new(re(1.0), re(0.0), re(0.0), re(-1.0)),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

/// The real antisymmetric matrix [[0, 1], [-1, 0]].
pub fn offdiag_antisym() -> Matrix2 {
    Matrix2::new(re(0.0), re(1.0), re(-1.0), re(0.0))
}

/// Block tensor product: block (a, b) of the result is `outer[(a, b)] * inner`.
///
/// With `outer` acting on the upper/lower block index this gives
/// `kron(σ³, 1) = γ⁰` and `kron([[0,1],[-1,0]], σ^r) = γ^r`.
pub fn kron(outer: &Matrix2, inner: &Matrix2) -> Matrix4 {
    let mut out = Matrix4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * a + i, 2 * b + j)] = outer[(a, b)] * inner[(i, j)];
                }
            }
        }
    }
    out
}

pub fn max_abs2(m: &Matrix2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs4(m: &Matrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn spinor_norm(s: &Spinor2) -> f64 {
    (s[0].norm_sqr() + s[1].norm_sqr()).sqrt()
}
