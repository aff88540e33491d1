//! The separated time equation i ∂τ h = A(τ) h with
//! A = [[S m, −λ], [−λ, −S m]], its WKB approximation and the associated
//! probability and space-time inner products.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, re, spinor_norm, Matrix2, Spinor2, C64, I};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre, integrate_adaptive, IntervalGrid};

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant through (τ_i, S_i).
#[derive(Clone, Debug, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidArgument("need at least two (tau, S) samples of equal length".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("tau column must be strictly increasing".into()));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and derivative; clamps to the end intervals outside the domain.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -dh00;
        let dh11 = s * (3.0 * s - 2.0);
        let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (value, deriv)
    }
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// The scale function S(τ) of the metric S² (dτ² − dσ²_{S³}).
#[derive(Clone, Debug, PartialEq)]
pub enum ScaleFunction {
    Constant { s: f64 },
    /// Dust cycloid S_max (1 − cos τ)/2 on (0, 2π).
    Cycloid { s_max: f64 },
    Tabulated(Pchip),
}

impl ScaleFunction {
    pub fn constant(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("constant scale must be positive, got {s}")));
        }
        Ok(ScaleFunction::Constant { s })
    }

    pub fn cycloid(s_max: f64) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("cycloid S_max must be positive, got {s_max}")));
        }
        Ok(ScaleFunction::Cycloid { s_max })
    }

    pub fn tabulated(tau: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if s.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("tabulated scale values must be positive".into()));
        }
        Ok(ScaleFunction::Tabulated(Pchip::new(tau, s)?))
    }

    /// Reads a headerless or headed two-column CSV of (tau, S).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let io = |msg: String| Error::Io { path: path.display().to_string(), msg };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| io(e.to_string()))?;
        let (mut tau, mut s) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| io(e.to_string()))?;
            if record.len() != 2 {
                return Err(io(format!("row {}: expected 2 columns, found {}", line + 1, record.len())));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(t), Ok(v)) => {
                    tau.push(t);
                    s.push(v);
                }
                _ if line == 0 => continue,
                _ => return Err(io(format!("row {}: non-numeric entry", line + 1))),
            }
        }
        Self::tabulated(tau, s).map_err(|e| io(e.to_string()))
    }

    /// Parses `constant:<S>`, `cycloid:<S_max>` or `file:<path>`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("scale '{text}' must look like kind:value")))?;
        let number = || {
            arg.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("'{arg}' is not a number in scale '{text}'")))
        };
        match kind {
            "constant" => Self::constant(number()?),
            "cycloid" => Self::cycloid(number()?),
            "file" => Self::from_csv(Path::new(arg)),
            _ => Err(Error::InvalidArgument(format!("unknown scale kind '{kind}'"))),
        }
    }

    /// (S, Ṡ) at τ.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        match self {
            ScaleFunction::Constant { s } => (*s, 0.0),
            ScaleFunction::Cycloid { s_max } => {
                let (st, ct) = tau.sin_cos();
                (0.5 * s_max * (1.0 - ct), 0.5 * s_max * st)
            }
            ScaleFunction::Tabulated(p) => p.eval(tau),
        }
    }

    pub fn s(&self, tau: f64) -> f64 {
        self.eval(tau).0
    }

    /// (τ_min, τ_max); infinite for the constant kind.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ScaleFunction::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ScaleFunction::Cycloid { .. } => (0.0, 2.0 * PI),
            ScaleFunction::Tabulated(p) => p.domain(),
        }
    }

    pub fn s_max(&self) -> f64 {
        match self {
            ScaleFunction::Constant { s } => *s,
            ScaleFunction::Cycloid { s_max } => *s_max,
            ScaleFunction::Tabulated(p) => p.y.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Largest sub-span of the domain on which S ≥ floor·S_max.
    pub fn admissible_span(&self, floor: f64) -> (f64, f64) {
        match self {
            ScaleFunction::Constant { .. } => self.domain(),
            ScaleFunction::Cycloid { .. } => {
                // (1 − cos τ)/2 = sin²(τ/2) ≥ floor
                let t = 2.0 * floor.sqrt().min(1.0).asin();
                (t, 2.0 * PI - t)
            }
            ScaleFunction::Tabulated(p) => {
                let limit = floor * self.s_max();
                let ok: Vec<usize> = (0..p.x.len()).filter(|&i| p.y[i] >= limit).collect();
                match (ok.first(), ok.last()) {
                    (Some(&a), Some(&b)) => (p.x[a], p.x[b]),
                    _ => (0.0, 0.0),
                }
            }
        }
    }
}

/// The coefficient matrix A(τ) = S m σ³ − λ σ¹.
pub fn coefficient_matrix(lambda: f64, m: f64, s: f64) -> Matrix2 {
    Matrix2::new(re(s * m), re(-lambda), re(-lambda), re(-s * m))
}

/// exp(−i A τ) for constant A, using A² = E² Id.
pub fn constant_propagator(lambda: f64, m: f64, s: f64, dtau: f64) -> Matrix2 {
    let a = coefficient_matrix(lambda, m, s);
    let e = (m * m * s * s + lambda * lambda).sqrt();
    if e == 0.0 {
        return Matrix2::identity();
    }
    let (sn, cs) = (e * dtau).sin_cos();
    Matrix2::identity() * re(cs) - a * c(0.0, sn / e)
}

/// U = cos(θ_U/2) Id + sin(θ_U/2) [[0, −1], [1, 0]] with θ_U = arctan(λ/(mS)),
/// so that U A U⁻¹ = √(m²S² + λ²) σ³.
pub fn diagonalizer(tau: f64, lambda: f64, m: f64, scale: &ScaleFunction) -> Result<Matrix2> {
    diagonalizer_at(lambda, m, scale.s(tau))
}

pub fn diagonalizer_at(lambda: f64, m: f64, s: f64) -> Result<Matrix2> {
    if m * s == 0.0 && lambda == 0.0 {
        return Err(Error::Singular("diagonalizer undefined for m S = 0 and lambda = 0".into()));
    }
    let theta_u = lambda.atan2(m * s);
    let (sn, cs) = (0.5 * theta_u).sin_cos();
    Ok(Matrix2::new(re(cs), re(-sn), re(sn), re(cs)))
}

/// (h₁, h₂) sampled along τ.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeAmplitudes {
    pub lambda: f64,
    pub m: f64,
    pub taus: Vec<f64>,
    pub h: Vec<Spinor2>,
}

impl TimeAmplitudes {
    pub fn norms(&self) -> Vec<f64> {
        self.h.iter().map(|h| probability_norm(h[0], h[1])).collect()
    }

    /// max |norm(τ) − norm(τ₀)| over the samples, relative to norm(τ₀).
    pub fn norm_drift(&self, reference: f64) -> f64 {
        self.norms().iter().map(|n| (n - reference).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Relative local error tolerance of the embedded 5(4) pair.
    pub rtol: f64,
    /// Absolute tolerance as a fraction of |h(τ₀)|.
    pub atol_rel: f64,
    /// Refuse to integrate where S < floor·S_max.
    pub s_floor: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol_rel: 1e-12, s_floor: 1e-8, max_steps: 10_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol_rel: tol * 1e-2, ..Self::default() }
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dopri<'a> {
    lambda: f64,
    m: f64,
    scale: &'a ScaleFunction,
    rtol: f64,
    atol: f64,
    max_steps: usize,
    steps: usize,
}

impl Dopri<'_> {
    fn rhs(&self, tau: f64, h: &Spinor2) -> Spinor2 {
        coefficient_matrix(self.lambda, self.m, self.scale.s(tau)) * h * (-I)
    }

    /// Advances y from t to t_end (either direction); `step` carries the last accepted size.
    fn advance(&mut self, mut t: f64, mut y: Spinor2, t_end: f64, step: &mut f64) -> Result<Spinor2> {
        let dir = if t_end >= t { 1.0 } else { -1.0 };
        let mut k1 = self.rhs(t, &y);
        if (t_end - t).abs() < 1e-14 * t.abs().max(1.0) {
            // a gap of a few ulps: one Euler step is exact to rounding
            return Ok(y + k1 * re(t_end - t));
        }
        while (t_end - t) * dir > 0.0 {
            let mut h = step.abs().min((t_end - t).abs()) * dir;
            loop {
                if h.abs() < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { tau: t, h: h.abs() });
                }
                self.steps += 1;
                if self.steps > self.max_steps {
                    return Err(Error::Convergence(format!("ODE exceeded {} steps at tau = {t}", self.max_steps)));
                }
                let mut k = [Spinor2::zeros(); 7];
                k[0] = k1;
                for s in 1..7 {
                    let mut acc = y;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        if DP_A[s][j] != 0.0 {
                            acc += kj * re(h * DP_A[s][j]);
                        }
                    }
                    k[s] = self.rhs(t + DP_C[s] * h, &acc);
                }
                let mut y_new = y;
                let mut err = Spinor2::zeros();
                for s in 0..7 {
                    y_new += k[s] * re(h * DP_B[s]);
                    err += k[s] * re(h * (DP_B[s] - DP_B4[s]));
                }
                let mut e_norm: f64 = 0.0;
                for i in 0..2 {
                    let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                    e_norm = e_norm.max(err[i].norm() / sc);
                }
                let factor = if e_norm == 0.0 { 5.0 } else { (0.9 * e_norm.powf(-0.2)).clamp(0.2, 5.0) };
                if e_norm <= 1.0 {
                    // remainders below the underflow guard count as arrival
                    let reached = (t_end - (t + h)) * dir < 1e-14 * t.abs().max(1.0);
                    t = if reached { t_end } else { t + h };
                    y = y_new;
                    // FSAL: the last stage is the derivative at the new point
                    k1 = k[6];
                    if !reached || h.abs() >= step.abs() {
                        *step = h.abs() * factor;
                    }
                    break;
                }
                h *= factor.min(1.0);
            }
        }
        Ok(y)
    }
}

/// Adaptive Dormand–Prince 5(4) solution of i ∂τ h = A h from h(τ₀) = h0,
/// sampled at `taus` (any order, on either side of τ₀).
pub fn solve_ode(
    lambda: f64,
    m: f64,
    scale: &ScaleFunction,
    tau0: f64,
    h0: Spinor2,
    taus: &[f64],
    opts: OdeOptions,
) -> Result<TimeAmplitudes> {
    if !(opts.rtol > 0.0) {
        return Err(Error::InvalidArgument("ODE tolerance must be positive".into()));
    }
    let (lo, hi) = scale.admissible_span(opts.s_floor);
    for &t in taus.iter().chain(std::iter::once(&tau0)) {
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!(
                "tau = {t} outside the span ({lo}, {hi}) where S >= {:e} S_max",
                opts.s_floor
            )));
        }
    }
    let mut solver = Dopri {
        lambda,
        m,
        scale,
        rtol: opts.rtol,
        atol: opts.atol_rel * spinor_norm(&h0).max(f64::MIN_POSITIVE),
        max_steps: opts.max_steps,
        steps: 0,
    };
    let mut out = vec![Spinor2::zeros(); taus.len()];
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let split = order.partition_point(|&i| taus[i] < tau0);
    let e0 = (m * m * scale.s(tau0).powi(2) + lambda * lambda).sqrt().max(1e-3);
    let initial_step = 0.01 / e0;
    // forward branch
    let (mut t, mut y, mut step) = (tau0, h0, initial_step);
    for &i in &order[split..] {
        y = solver.advance(t, y, taus[i], &mut step)?;
        t = taus[i];
        out[i] = y;
    }
    // backward branch
    let (mut t, mut y, mut step) = (tau0, h0, initial_step);
    for &i in order[..split].iter().rev() {
        y = solver.advance(t, y, taus[i], &mut step)?;
        t = taus[i];
        out[i] = y;
    }
    Ok(TimeAmplitudes { lambda, m, taus: taus.to_vec(), h: out })
}

/// Θ(τ) = ∫_{τ₀}^τ f for every τ in `taus`, accumulated between neighbouring samples.
pub fn cumulative_integral(f: impl Fn(f64) -> f64, tau0: f64, taus: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; taus.len()];
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let split = order.partition_point(|&i| taus[i] < tau0);
    let (mut t, mut acc) = (tau0, 0.0);
    for &i in &order[split..] {
        acc += integrate_adaptive(&f, t, taus[i], tol)?;
        t = taus[i];
        out[i] = acc;
    }
    let (mut t, mut acc) = (tau0, 0.0);
    for &i in order[..split].iter().rev() {
        acc += integrate_adaptive(&f, t, taus[i], tol)?;
        t = taus[i];
        out[i] = acc;
    }
    Ok(out)
}

/// h(τ) = U(τ)⁻¹ (c₁ e^{−iΘ(τ)}, c₂ e^{+iΘ(τ)}), Θ(τ) = ∫_{τ₀}^τ √(m²S² + λ²).
#[derive(Clone, Debug)]
pub struct WkbSolution {
    pub lambda: f64,
    pub m: f64,
    pub scale: ScaleFunction,
    pub c1: C64,
    pub c2: C64,
    pub tau0: f64,
    pub phase_tol: f64,
}

impl WkbSolution {
    pub fn new(lambda: f64, m: f64, scale: &ScaleFunction, c1: C64, c2: C64, tau0: f64) -> Self {
        Self { lambda, m, scale: scale.clone(), c1, c2, tau0, phase_tol: 1e-12 }
    }

    pub fn frequency(&self, tau: f64) -> f64 {
        let s = self.scale.s(tau);
        (self.m * self.m * s * s + self.lambda * self.lambda).sqrt()
    }

    pub fn phase(&self, tau: f64) -> Result<f64> {
        integrate_adaptive(|t| self.frequency(t), self.tau0, tau, self.phase_tol)
    }

    fn assemble(&self, tau: f64, theta: f64) -> Result<Spinor2> {
        let u = diagonalizer(tau, self.lambda, self.m, &self.scale)?;
        let v = Spinor2::new(self.c1 * C64::from_polar(1.0, -theta), self.c2 * C64::from_polar(1.0, theta));
        // U is real orthogonal
        Ok(u.transpose() * v)
    }

    pub fn eval(&self, tau: f64) -> Result<Spinor2> {
        self.assemble(tau, self.phase(tau)?)
    }

    pub fn sample(&self, taus: &[f64]) -> Result<TimeAmplitudes> {
        let phases = cumulative_integral(|t| self.frequency(t), self.tau0, taus, self.phase_tol)?;
        let h = taus.iter().zip(&phases).map(|(&t, &th)| self.assemble(t, th)).collect::<Result<Vec<_>>>()?;
        Ok(TimeAmplitudes { lambda: self.lambda, m: self.m, taus: taus.to_vec(), h })
    }
}

/// h(τ) of the WKB form for the given coefficients.
pub fn wkb_solution(
    lambda: f64,
    m: f64,
    scale: &ScaleFunction,
    c1: C64,
    c2: C64,
    tau0: f64,
    tau: f64,
) -> Result<Spinor2> {
    WkbSolution::new(lambda, m, scale, c1, c2, tau0).eval(tau)
}

/// |λ| m |Ṡ| / (m²S² + λ²)^{3/2}.
pub fn wkb_error_indicator(lambda: f64, m: f64, scale: &ScaleFunction, tau: f64) -> f64 {
    let (s, sd) = scale.eval(tau);
    indicator_from(lambda, m, s, sd)
}

pub fn indicator_from(lambda: f64, m: f64, s: f64, s_dot: f64) -> f64 {
    let e2 = m * m * s * s + lambda * lambda;
    if e2 == 0.0 {
        return 0.0;
    }
    lambda.abs() * m * s_dot.abs() / e2.powf(1.5)
}

/// sup_λ of the indicator, attained at λ = mS/√2.
pub fn max_indicator_over_lambda(m: f64, s: f64, s_dot: f64) -> f64 {
    2.0 * s_dot.abs() / (3.0 * 3f64.sqrt() * m * s * s)
}

/// |h₁|² + |h₂|².
pub fn probability_norm(h1: C64, h2: C64) -> f64 {
    h1.norm_sqr() + h2.norm_sqr()
}

/// ∫ (h̄₁ᴬ h₁ᴮ − h̄₂ᴬ h₂ᴮ) S dτ over a quadrature grid on which both are sampled.
pub fn spacetime_inner_product(
    a: &TimeAmplitudes,
    b: &TimeAmplitudes,
    scale: &ScaleFunction,
    grid: &IntervalGrid,
) -> Result<C64> {
    if a.taus != grid.nodes || b.taus != grid.nodes {
        return Err(Error::SpanMismatch("amplitudes must be sampled on the quadrature nodes".into()));
    }
    if a.lambda != b.lambda {
        // distinct spatial eigenfunctions are orthogonal
        return Ok(C64::new(0.0, 0.0));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, (&t, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let (ha, hb) = (a.h[i], b.h[i]);
        acc += (ha[0].conj() * hb[0] - ha[1].conj() * hb[1]) * (w * scale.s(t));
    }
    Ok(acc)
}

/// (1/2π) ∫ S dτ over the lifetime of the universe.
pub fn lifetime_bound(scale: &ScaleFunction) -> Result<f64> {
    let (lo, hi) = scale.domain();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain("lifetime bound diverges for an infinite tau span".into()));
    }
    Ok(integrate_adaptive(|t| scale.s(t), lo, hi, 1e-12 * scale.s_max().max(1.0))? / (2.0 * PI))
}

/// Result of comparing the WKB form against the adaptive ODE solution.
#[derive(Clone, Debug, PartialEq)]
pub struct WkbComparison {
    /// sup_τ |h_WKB − h_ODE| / |h(τ₀)|.
    pub sup_error: f64,
    /// ∫ indicator dτ over the sampled span.
    pub integrated_indicator: f64,
    pub norm_drift: f64,
}

/// Starts the ODE from the WKB state at τ₀ and compares both on `taus`.
pub fn compare_wkb_ode(wkb: &WkbSolution, taus: &[f64], opts: OdeOptions) -> Result<WkbComparison> {
    let h0 = wkb.eval(wkb.tau0)?;
    let ode = solve_ode(wkb.lambda, wkb.m, &wkb.scale, wkb.tau0, h0, taus, opts)?;
    let approx = wkb.sample(taus)?;
    let n0 = spinor_norm(&h0);
    let sup_error = ode.h.iter().zip(&approx.h).map(|(a, b)| spinor_norm(&(a - b)) / n0).fold(0.0, f64::max);
    let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min).min(wkb.tau0);
    let hi = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(wkb.tau0);
    let integrated_indicator = integrate_adaptive(|t| wkb_error_indicator(wkb.lambda, wkb.m, &wkb.scale, t), lo, hi, 1e-12)?;
    Ok(WkbComparison { sup_error, integrated_indicator, norm_drift: ode.norm_drift(n0 * n0) })
}

/// Discretization parameters of the smeared normalization integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmearConfig {
    /// Gauss–Legendre nodes in the mass variable.
    pub mass_nodes: usize,
    /// Mass window half-width in units of ε.
    pub mass_halfwidth: f64,
    /// The τ window extends until ε |∂_m Θ| reaches this value on each side.
    pub envelope_cutoff: f64,
    /// Max phase advance 2E Δτ per τ panel.
    pub panel_phase: f64,
    pub panel_order: usize,
}

impl Default for SmearConfig {
    fn default() -> Self {
        Self { mass_nodes: 200, mass_halfwidth: 6.0, envelope_cutoff: 8.0, panel_phase: 2.0, panel_order: 16 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmearedNormalization {
    pub numeric: f64,
    pub predicted: f64,
    /// Contributions of the c₁-only and c₂-only parts.
    pub same_frequency: [f64; 2],
    /// 2 Re ∫ H₁† σ³ H₂ S dτ, the mixed-frequency part of `numeric`.
    pub cross_term: f64,
    pub tau_span: (f64, f64),
    pub tau_nodes: usize,
    /// False when the τ window hit the domain before the envelope decayed.
    pub converged: bool,
}

/// Unit-L² Gaussian (π ε²)^{−1/4} exp(−(m − m̄)²/(2ε²)).
pub fn gaussian_profile(m: f64, center: f64, width: f64) -> f64 {
    (PI * width * width).powf(-0.25) * (-(m - center).powi(2) / (2.0 * width * width)).exp()
}

/// Finds τ with ε |Q(τ)| ≥ cutoff, Q = ∫_{τ₀}^τ m̄ S²/E, marching from τ₀ in `dir`.
#[allow(clippy::too_many_arguments)]
fn envelope_edge(lambda: f64, m: f64, scale: &ScaleFunction, tau0: f64, eps: f64, cutoff: f64, dir: f64, limit: f64) -> (f64, bool) {
    let dq = |t: f64| {
        let s = scale.s(t);
        m * s * s / (m * m * s * s + lambda * lambda).sqrt()
    };
    let gl = gauss_legendre(8, 0.0, 1.0).expect("fixed order");
    let (mut t, mut q) = (tau0, 0.0);
    loop {
        let step = (0.05 / (eps * dq(t).max(1e-12))).min(0.05);
        let next = t + dir * step;
        if (limit - next) * dir <= 0.0 {
            return (limit, false);
        }
        q += gl.integrate(|u| dq(t + dir * step * u)) * step;
        t = next;
        if eps * q >= cutoff {
            return (t, true);
        }
    }
}

/// Brute-force check of ⟨Ψ_η|Ψ_η⟩ = 2π(|c₁|² − |c₂|²)∫|η|² for the mass-smeared WKB state
/// Ψ_η = ∫ η(m) Ψ^m dm, η a Gaussian of width ε about m̄.
#[allow(clippy::too_many_arguments)]
pub fn smeared_normalization_check(
    lambda: f64,
    scale: &ScaleFunction,
    m_bar: f64,
    eps: f64,
    tau0: f64,
    c1: C64,
    c2: C64,
    config: SmearConfig,
) -> Result<SmearedNormalization> {
    if !(eps > 0.0 && m_bar > 0.0 && eps * config.mass_halfwidth < m_bar) {
        return Err(Error::InvalidArgument(format!("need 0 < {}·eps < m_bar (eps = {eps}, m_bar = {m_bar})", config.mass_halfwidth)));
    }
    let (dlo, dhi) = scale.admissible_span(1e-8);
    let (lo, ok_lo) = envelope_edge(lambda, m_bar, scale, tau0, eps, config.envelope_cutoff, -1.0, dlo);
    let (hi, ok_hi) = envelope_edge(lambda, m_bar, scale, tau0, eps, config.envelope_cutoff, 1.0, dhi);

    let mgrid = gauss_legendre(config.mass_nodes, m_bar - config.mass_halfwidth * eps, m_bar + config.mass_halfwidth * eps)?;
    let eta: Vec<f64> = mgrid.nodes.iter().map(|&m| gaussian_profile(m, m_bar, eps)).collect();
    let eta_sq: f64 = mgrid.weights.iter().zip(&eta).map(|(w, e)| w * e * e).sum();

    let m_max = m_bar + config.mass_halfwidth * eps;
    let e_max = {
        let s = scale.s_max();
        (m_max * m_max * s * s + lambda * lambda).sqrt()
    };
    let panels = ((hi - lo) * 2.0 * e_max / config.panel_phase).ceil().max(1.0) as usize;
    let tgrid = composite_gauss_legendre(config.panel_order, panels, lo, hi)?;

    // H_s(τ) = ∫ η(m) U_m⁻¹ e_s c_s e^{∓iΘ_m(τ)} dm for s = 1, 2
    let n_t = tgrid.nodes.len();
    let mut smeared = [vec![Spinor2::zeros(); n_t], vec![Spinor2::zeros(); n_t]];
    let sub = gauss_legendre(8, 0.0, 1.0)?;
    for ((&m, &wm), &em) in mgrid.nodes.iter().zip(&mgrid.weights).zip(&eta) {
        let freq = |t: f64| {
            let s = scale.s(t);
            (m * m * s * s + lambda * lambda).sqrt()
        };
        let seg = |a: f64, b: f64| sub.integrate(|u| freq(a + (b - a) * u)) * (b - a);
        let mut phase = vec![0.0; n_t];
        let split = tgrid.nodes.partition_point(|&t| t < tau0);
        let (mut t, mut acc) = (tau0, 0.0);
        for (ph, &tn) in phase[split..].iter_mut().zip(&tgrid.nodes[split..]) {
            acc += seg(t, tn);
            t = tn;
            *ph = acc;
        }
        let (mut t, mut acc) = (tau0, 0.0);
        for (ph, &tn) in phase[..split].iter_mut().zip(&tgrid.nodes[..split]).rev() {
            acc += seg(t, tn);
            t = tn;
            *ph = acc;
        }
        let weight = wm * em;
        for (i, (&tn, &ph)) in tgrid.nodes.iter().zip(&phase).enumerate() {
            let ut = diagonalizer_at(lambda, m, scale.s(tn))?.transpose();
            let p = C64::from_polar(weight, -ph);
            smeared[0][i] += ut.column(0) * (c1 * p);
            smeared[1][i] += ut.column(1) * (c2 * p.conj());
        }
    }
    let quad = |f: &dyn Fn(usize) -> Spinor2| -> f64 {
        (0..n_t)
            .map(|i| {
                let h = f(i);
                tgrid.weights[i] * (h[0].norm_sqr() - h[1].norm_sqr()) * scale.s(tgrid.nodes[i])
            })
            .sum()
    };
    let same = [quad(&|i| smeared[0][i]), quad(&|i| smeared[1][i])];
    let cross: f64 = (0..n_t)
        .map(|i| {
            let (a, b) = (smeared[0][i], smeared[1][i]);
            2.0 * tgrid.weights[i] * (a[0].conj() * b[0] - a[1].conj() * b[1]).re * scale.s(tgrid.nodes[i])
        })
        .sum();
    let numeric = quad(&|i| smeared[0][i] + smeared[1][i]);
    let predicted = 2.0 * PI * (c1.norm_sqr() - c2.norm_sqr()) * eta_sq;
    Ok(SmearedNormalization {
        numeric,
        predicted,
        same_frequency: same,
        cross_term: cross,
        tau_span: (lo, hi),
        tau_nodes: n_t,
        converged: ok_lo && ok_hi,
    })
}
