//! Reference values computed without the library's special functions or
//! quadrature.

use std::f64::consts::PI;

/// `ln Γ(x)` for `x > 0`: shift past 10 by recurrence, then Stirling's series.
pub fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Standard normal CDF by its Maclaurin series; accurate for `|x| ≤ 3`.
pub fn normal_cdf(x: f64) -> f64 {
    assert!(x.abs() <= 3.0, "series oracle only used near the origin");
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        n += 1.0;
        term *= -x * x / (2.0 * n);
        sum += term / (2.0 * n + 1.0);
    }
    0.5 + sum / (2.0 * PI).sqrt()
}

pub fn black_scholes_call(spot: f64, strike: f64, rate: f64, vol: f64, tau: f64) -> f64 {
    let sd = vol * tau.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * vol * vol) * tau) / sd;
    spot * normal_cdf(d1) - strike * (-rate * tau).exp() * normal_cdf(d1 - sd)
}

/// `f₁` at `H = 1/2` in closed form: with `w = T − v` both integrals are sums
/// of `∫ₜᵀ w^{α−1+j} dw`.
pub fn f1_half(t: f64, maturity: f64, alpha: f64, mu_r: f64, sigma_r: f64) -> f64 {
    let m = |p: f64| (maturity.powf(p) - t.powf(p)) / p;
    let tt = maturity;
    let g = gamma(alpha);
    let diffusion = 0.5 * sigma_r * sigma_r / g * (tt * tt * m(alpha) - 2.0 * tt * m(alpha + 1.0) + m(alpha + 2.0));
    let drift = mu_r / g * (tt * m(alpha) - m(alpha + 1.0));
    diffusion - drift
}

/// Right side of the `f₁` ODE in `w = T^α − (T−τ)^α`, which is bounded at
/// `τ = T`. Returns the grid end `w(T − t)` with the rhs.
pub fn f1_ode(
    t: f64,
    maturity: f64,
    alpha: f64,
    hurst: f64,
    mu_r: f64,
    sigma_r: f64,
) -> (f64, impl Fn(f64, f64) -> f64) {
    let g = gamma(alpha);
    let diffusion = hurst * sigma_r * sigma_r / g.powf(2.0 * hurst);
    let drift = mu_r / g;
    let top = maturity.powf(alpha);
    let rhs = move |w: f64, _: f64| {
        let rest = (top - w).max(0.0);
        let tau = maturity - rest.powf(1.0 / alpha);
        (diffusion * tau * tau * rest.powf(2.0 * hurst - 1.0) - drift * tau) / alpha
    };
    (top - t.powf(alpha), rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_points() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
    }
}
