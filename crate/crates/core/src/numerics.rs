//! Special functions, quadrature and ODE stepping.
//!
//! Everything here is pure and reentrant. The quadrature routines are built
//! around a 15-point Gauss–Legendre rule applied adaptively; integrands with
//! an algebraic endpoint singularity `(c - v)^{β-1}` are handled by the
//! substitution `u = |c - v|^β`, which turns the weight into a constant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};

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

/// Γ(x) for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!("gamma requires a positive finite argument, got {x}"));
    }
    Ok(lanczos_gamma(x))
}

pub(crate) fn lanczos_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Complementary error function.
///
/// Uses the all-positive series `erf(x) = 2/√π e^{-x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!`
/// below `x = 2.5` and a Lentz continued fraction above it.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

pub fn erf(x: f64) -> f64 {
    if x.abs() < 2.5 {
        x.signum() * erf_series(x.abs())
    } else {
        1.0 - erfc(x)
    }
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let an = n as f64 / 2.0;
        d = x + an * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + an / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("normal_cdf requires a finite argument, got {x}"));
    }
    Ok(phi(x))
}

pub(crate) fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Controls for the adaptive quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Exponent `α` of the weight `(b - v)^{α-1}` in [`integrate_singular`].
    pub singular_exponent: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 1 << 16,
            singular_exponent: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_exponent(alpha: f64) -> Self {
        Self {
            singular_exponent: alpha,
            ..Self::default()
        }
    }

    pub fn with_tolerance(self, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if !(self.singular_exponent > 0.0 && self.singular_exponent <= 1.0) {
            return domain(format!(
                "singular exponent {} outside (0, 1]",
                self.singular_exponent
            ));
        }
        if self.max_subdivisions == 0 {
            return domain("max_subdivisions must be positive");
        }
        Ok(())
    }
}

const GL_ORDER: usize = 15;

fn gauss_legendre_rule() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for (i, node) in rule.iter_mut().enumerate() {
            // Newton iteration from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            *node = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
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

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for &(x, w) in gauss_legendre_rule() {
        let fx = f(mid + half * x);
        sum += w * fx;
        abs_sum += w * fx.abs();
    }
    (sum * half, abs_sum * half.abs())
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    abs: f64,
    err: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64) -> Self {
        let m = 0.5 * (a + b);
        let (left, la) = gl_panel(f, a, m);
        let (right, ra) = gl_panel(f, m, b);
        let err = (whole - left - right).abs();
        Panel {
            a,
            b,
            left,
            right,
            abs: la + ra,
            err: if err.is_nan() { f64::INFINITY } else { err },
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive composite Gauss–Legendre quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(spec.rel_tol > 0.0 && spec.abs_tol > 0.0) {
        return domain("quadrature tolerances must be positive");
    }
    if !a.is_finite() || !b.is_finite() {
        return domain("integration limits must be finite");
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_adaptive(f, b, a, spec).map(|v| -v);
    }

    let (whole, _) = gl_panel(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel::new(&f, a, b, whole));
    // panels that can no longer be split in floating point
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut frozen_abs = 0.0;
    let mut subdivisions = 0usize;

    loop {
        let (value, err, abs) = heap.iter().fold(
            (frozen_value, frozen_err, frozen_abs),
            |(v, e, s), p| (v + p.value(), e + p.err, s + p.abs),
        );
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        let roundoff = 50.0 * f64::EPSILON * abs;
        if err <= target || err <= roundoff {
            return Ok(value);
        }
        if subdivisions >= spec.max_subdivisions || !value.is_finite() {
            return Err(Error::Convergence {
                estimate: value,
                error: err,
                subdivisions,
            });
        }

        // bisect a batch of the worst panels before re-summing
        let batch = (heap.len() / 4).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b || (worst.b - worst.a) < 4.0 * f64::EPSILON * m.abs() {
                frozen_value += worst.value();
                frozen_err += worst.err;
                frozen_abs += worst.abs;
                continue;
            }
            heap.push(Panel::new(&f, worst.a, m, worst.left));
            heap.push(Panel::new(&f, m, worst.b, worst.right));
            subdivisions += 1;
            if heap.is_empty() {
                break;
            }
        }
        if heap.is_empty() {
            return Ok(frozen_value);
        }
    }
}

/// `∫_a^b g(v) |c - v|^{β-1} dv` for an anchor `c` outside the open interval
/// `(a, b)`, computed as `(1/β) ∫ g(c ∓ u^{1/β}) du` over the image of
/// `[a, b]` under `u = |c - v|^β`.
pub fn integrate_power_weight<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    anchor: f64,
    beta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return domain(format!("weight exponent {beta} must be positive"));
    }
    if !(a < b) {
        return domain(format!("integration requires a < b, got [{a}, {b}]"));
    }
    let inv = 1.0 / beta;
    if anchor >= b {
        let lo = (anchor - b).powf(beta);
        let hi = (anchor - a).powf(beta);
        integrate_adaptive(|u| g(anchor - u.powf(inv)), lo, hi, spec).map(|v| v * inv)
    } else if anchor <= a {
        let lo = (a - anchor).powf(beta);
        let hi = (b - anchor).powf(beta);
        integrate_adaptive(|u| g(anchor + u.powf(inv)), lo, hi, spec).map(|v| v * inv)
    } else {
        domain(format!("singular point {anchor} lies inside ({a}, {b})"))
    }
}

/// `∫_a^b g(v) (b - v)^{α-1} dv` with `α = spec.singular_exponent`.
///
/// `g` must be smooth on `[a, b]`; the endpoint singularity is removed by the
/// substitution `u = (b - v)^α` before adaptive Gauss–Legendre is applied.
pub fn integrate_singular<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    integrate_power_weight(g, a, b, b, spec.singular_exponent, spec)
}

/// Classical fourth-order Runge–Kutta for `y' = rhs(t, y)` on a strictly
/// increasing grid. Returns the solution at every grid node.
pub fn rk4_solve<F: Fn(f64, f64) -> f64>(rhs: F, y0: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("rk4 grid is empty");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("rk4 grid must be strictly increasing");
    }
    let eval = |t: f64, y: f64| -> Result<f64> {
        let v = rhs(t, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { t })
        }
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0;
    out.push(y);
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let k1 = eval(t, y)?;
        let k2 = eval(t + 0.5 * h, y + 0.5 * h * k1)?;
        let k3 = eval(t + 0.5 * h, y + 0.5 * h * k2)?;
        let k4 = eval(t + h, y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    Ok(out)
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[0]` and `upper[n-1]` are ignored.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Internal("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::Internal("singular tridiagonal system".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}
