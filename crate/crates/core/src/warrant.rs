//! Closed-form equity-warrant valuation with dilution.
//!
//! ```text
//! W = (kV Φ(d₁) − NX P(r,t,T) Φ(d₂)) / (N + Mk)
//! d₁ = (ln(kV/NX) − ln P + Σ/2) / √Σ,   d₂ = d₁ − √Σ
//! Σ  = 2H/Γ(α)^{2H} ∫_t^T σ̂²(v) v^{2αH−1} dv
//! σ̂²(v) = σ_v² + 2ρσ_rσ_v(T−v) + σ_r²(T−v)²
//! ```
//!
//! This is `W = P·Θ(V/P, t)` where `Θ` is the Black–Scholes-type solution of
//! the transformed PDE. A variant with an extra `e^{−r(T−t)}` on the strike
//! leg is available as [`WarrantVariant::PaperLiteral`].

use std::fmt;
use std::str::FromStr;

use crate::bond::bond_price;
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_power_weight, lanczos_gamma, phi, QuadratureSpec};
use crate::params::{ModelParams, WarrantTerms};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarrantVariant {
    /// Strike leg discounted by the bond price only.
    #[default]
    DerivationConsistent,
    /// Strike leg discounted by both `e^{−r(T−t)}` and the bond price.
    PaperLiteral,
}

impl fmt::Display for WarrantVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarrantVariant::DerivationConsistent => "derivation-consistent",
            WarrantVariant::PaperLiteral => "paper-literal",
        })
    }
}

impl FromStr for WarrantVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "derivation-consistent" | "default" => Ok(WarrantVariant::DerivationConsistent),
            "paper-literal" | "literal" => Ok(WarrantVariant::PaperLiteral),
            other => domain(format!("unknown warrant variant '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceResult {
    pub price: f64,
    pub d1: f64,
    pub d2: f64,
    pub variance_integral: f64,
    pub variant: WarrantVariant,
}

/// `σ̂²(v) = σ_v² + 2ρσ_rσ_v(T−v) + σ_r²(T−v)²`.
pub fn sigma_hat_sq(v: f64, maturity: f64, params: &ModelParams) -> Result<f64> {
    if !(v <= maturity) {
        return domain(format!("time {v} lies after maturity {maturity}"));
    }
    Ok(sigma_hat_sq_unchecked(v, maturity, params))
}

fn sigma_hat_sq_unchecked(v: f64, maturity: f64, p: &ModelParams) -> f64 {
    let s = maturity - v;
    p.sigma_v * p.sigma_v + 2.0 * p.rho * p.sigma_r * p.sigma_v * s + p.sigma_r * p.sigma_r * s * s
}

/// Total variance `Σ(t) = 2H/Γ(α)^{2H} ∫_t^T σ̂²(v) v^{2αH−1} dv`.
///
/// The `v^{2αH−1}` weight is singular at the origin when `2αH < 1`; it is
/// removed by substituting `u = v^{2αH}`.
pub fn variance_integral(t: f64, maturity: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0) || !maturity.is_finite() {
        return domain(format!("valuation time {t} must be nonnegative"));
    }
    if maturity < t {
        return domain(format!("maturity {maturity} precedes valuation time {t}"));
    }
    if maturity == t || (params.sigma_v == 0.0 && params.sigma_r == 0.0) {
        return Ok(0.0);
    }
    let h = params.hurst;
    let coef = 2.0 * h / lanczos_gamma(params.alpha).powf(2.0 * h);
    let integral = integrate_power_weight(
        |v| sigma_hat_sq_unchecked(v, maturity, params),
        t,
        maturity,
        0.0,
        params.clock_exponent(),
        spec,
    )?;
    Ok((coef * integral).max(0.0))
}

fn check_inputs(v: f64, r: f64, t: f64, terms: &WarrantTerms) -> Result<()> {
    terms.validate()?;
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("firm value {v} must be positive"));
    }
    if !r.is_finite() {
        return domain("short rate must be finite");
    }
    if !(t >= 0.0) || t > terms.maturity {
        return domain(format!("valuation time {t} outside [0, {}]", terms.maturity));
    }
    Ok(())
}

/// `(d₁, d₂)` for firm value `v` and short rate `r` at time `t`.
///
/// Fails with a domain error when the total variance is zero; the pricer
/// handles that case separately.
pub fn d_values(
    v: f64,
    r: f64,
    t: f64,
    terms: &WarrantTerms,
    params: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_inputs(v, r, t, terms)?;
    let var = variance_integral(t, terms.maturity, params, spec)?;
    if !(var > 0.0) {
        return domain("total variance is zero; d-values are undefined");
    }
    let ln_p = ln_bond(r, t, terms.maturity, params, spec)?;
    Ok(d_from(v, ln_p, var, terms))
}

fn ln_bond(r: f64, t: f64, maturity: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let q = bond_price(r, t, maturity, params, spec)?;
    Ok(-r * q.f2 + q.f1)
}

fn d_from(v: f64, ln_p: f64, var: f64, terms: &WarrantTerms) -> (f64, f64) {
    let sd = var.sqrt();
    let d1 = ((terms.ratio * v / (terms.shares * terms.strike)).ln() - ln_p + 0.5 * var) / sd;
    (d1, d1 - sd)
}

/// `(kV_T − NX)⁺ / (N + Mk)`.
pub fn dilution_payoff(v_t: f64, terms: &WarrantTerms) -> Result<f64> {
    terms.validate()?;
    if !(v_t >= 0.0) {
        return domain(format!("terminal firm value {v_t} must be nonnegative"));
    }
    Ok(payoff(v_t, terms))
}

pub(crate) fn payoff(v_t: f64, terms: &WarrantTerms) -> f64 {
    (terms.ratio * v_t - terms.shares * terms.strike).max(0.0) * terms.dilution_factor()
}

/// Warrant value at firm value `v`, short rate `r`, time `t ≤ T`.
///
/// At `t = T` this is the dilution payoff; with zero total variance it is the
/// discounted intrinsic value `(kV − NX·P)⁺/(N+Mk)`.
pub fn warrant_price(
    v: f64,
    r: f64,
    t: f64,
    terms: &WarrantTerms,
    params: &ModelParams,
    spec: &QuadratureSpec,
    variant: WarrantVariant,
) -> Result<PriceResult> {
    check_inputs(v, r, t, terms)?;
    params.validate()?;
    let k_v = terms.ratio * v;
    let n_x = terms.shares * terms.strike;

    if t == terms.maturity {
        let edge = match k_v.partial_cmp(&n_x) {
            Some(std::cmp::Ordering::Greater) => f64::INFINITY,
            Some(std::cmp::Ordering::Less) => f64::NEG_INFINITY,
            _ => 0.0,
        };
        return Ok(PriceResult {
            price: payoff(v, terms),
            d1: edge,
            d2: edge,
            variance_integral: 0.0,
            variant,
        });
    }

    let var = variance_integral(t, terms.maturity, params, spec)?;
    let ln_p = ln_bond(r, t, terms.maturity, params, spec)?;
    let strike_discount = match variant {
        WarrantVariant::DerivationConsistent => ln_p.exp(),
        WarrantVariant::PaperLiteral => (ln_p - r * (terms.maturity - t)).exp(),
    };

    if !(var > 0.0) {
        let forward = (k_v / n_x).ln() - ln_p;
        let edge = if forward > 0.0 {
            f64::INFINITY
        } else if forward < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return Ok(PriceResult {
            price: (k_v - n_x * strike_discount).max(0.0) * terms.dilution_factor(),
            d1: edge,
            d2: edge,
            variance_integral: 0.0,
            variant,
        });
    }

    let (d1, d2) = d_from(v, ln_p, var, terms);
    let raw = k_v * phi(d1) - n_x * strike_discount * phi(d2);
    Ok(PriceResult {
        price: raw.max(0.0) * terms.dilution_factor(),
        d1,
        d2,
        variance_integral: var,
        variant,
    })
}
