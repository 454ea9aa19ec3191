//! Zero-coupon bond prices `P(r, t, T) = exp(−r f₂(τ) + f₁(τ))`, `τ = T − t`.
//!
//! `f₂(τ) = τ` and
//!
//! ```text
//! f₁(τ) = Hσ_r²/Γ(α)^{2H} ∫₀^τ (T−v)^{2αH−1} v² dv − μ_r/Γ(α) ∫₀^τ (T−v)^{α−1} v dv
//! ```
//!
//! Both integrals carry a power weight anchored at `v = T`, which is reached
//! when `t = 0`; they are evaluated with [`integrate_power_weight`].

use crate::error::{domain, Result};
use crate::numerics::{integrate_power_weight, lanczos_gamma, QuadratureSpec};
use crate::params::ModelParams;

/// Which coefficient multiplies the drift integral of `f₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum F1Variant {
    /// `μ_r / Γ(α)`, obtained by integrating the `f₁` ODE. Reduces to
    /// `−μ_r τ²/2` as `α → 1`.
    #[default]
    Derivation,
    /// `2H μ_r / Γ(α)^{2H}`. Kept for diagnostics; it does not satisfy the
    /// bond PDE.
    TheoremStatement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondQuote {
    pub price: f64,
    pub f1: f64,
    pub f2: f64,
    pub t: f64,
    pub maturity: f64,
}

fn check_times(t: f64, maturity: f64) -> Result<()> {
    if !t.is_finite() || !maturity.is_finite() {
        return domain("times must be finite");
    }
    if t < 0.0 {
        return domain(format!("valuation time {t} must be nonnegative"));
    }
    Ok(())
}

/// `f₁(T − t)` for valuation time `t` and maturity `maturity > t`.
///
/// Only the tolerances of `spec` are used; the weight exponents `α` and `2αH`
/// come from `params`.
pub fn f1_general(t: f64, maturity: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    f1_with_variant(t, maturity, params, spec, F1Variant::Derivation)
}

pub fn f1_with_variant(
    t: f64,
    maturity: f64,
    params: &ModelParams,
    spec: &QuadratureSpec,
    variant: F1Variant,
) -> Result<f64> {
    params.validate()?;
    check_times(t, maturity)?;
    let tau = maturity - t;
    if !(tau > 0.0) {
        return domain(format!("time to maturity {tau} must be positive"));
    }
    let (diffusion, drift) = f1_terms(tau, maturity, params, spec, variant)?;
    let f1 = diffusion - drift;
    // the terms can cancel; restore the relative tolerance on their difference
    let cancellation = diffusion.abs().max(drift.abs()) / f1.abs();
    if cancellation > 2.0 && f1 != 0.0 {
        let rel_tol = (spec.rel_tol / cancellation).max(MIN_REL_TOL);
        let tight = spec.with_tolerance(rel_tol, spec.abs_tol / cancellation);
        let (diffusion, drift) = f1_terms(tau, maturity, params, &tight, variant)?;
        return Ok(diffusion - drift);
    }
    Ok(f1)
}

const MIN_REL_TOL: f64 = 1e-14;

/// Diffusion and drift integrals of `f₁`, each with its coefficient.
fn f1_terms(
    tau: f64,
    maturity: f64,
    params: &ModelParams,
    spec: &QuadratureSpec,
    variant: F1Variant,
) -> Result<(f64, f64)> {
    let h = params.hurst;
    let gamma_a = lanczos_gamma(params.alpha);

    let diffusion = if params.sigma_r == 0.0 {
        0.0
    } else {
        let coef = h * params.sigma_r * params.sigma_r / gamma_a.powf(2.0 * h);
        coef * integrate_power_weight(|v| v * v, 0.0, tau, maturity, params.clock_exponent(), spec)?
    };
    let drift = if params.mu_r == 0.0 {
        0.0
    } else {
        let coef = match variant {
            F1Variant::Derivation => params.mu_r / gamma_a,
            F1Variant::TheoremStatement => 2.0 * h * params.mu_r / gamma_a.powf(2.0 * h),
        };
        coef * integrate_power_weight(|v| v, 0.0, tau, maturity, params.alpha, spec)?
    };
    Ok((diffusion, drift))
}

/// Price of the unit zero-coupon bond at short rate `r`, valuation time `t`.
pub fn bond_price(r: f64, t: f64, maturity: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<BondQuote> {
    bond_price_with(r, t, maturity, params, spec, F1Variant::Derivation)
}

pub fn bond_price_with(
    r: f64,
    t: f64,
    maturity: f64,
    params: &ModelParams,
    spec: &QuadratureSpec,
    variant: F1Variant,
) -> Result<BondQuote> {
    check_times(t, maturity)?;
    if !r.is_finite() {
        return domain("short rate must be finite");
    }
    if maturity < t {
        return domain(format!("maturity {maturity} precedes valuation time {t}"));
    }
    if maturity == t {
        params.validate()?;
        return Ok(BondQuote {
            price: 1.0,
            f1: 0.0,
            f2: 0.0,
            t,
            maturity,
        });
    }
    let f1 = f1_with_variant(t, maturity, params, spec, variant)?;
    let f2 = maturity - t;
    Ok(BondQuote {
        price: (-r * f2 + f1).exp(),
        f1,
        f2,
        t,
        maturity,
    })
}

/// `α → 1` limit at `t = 0`:
/// `exp(−rT + σ_r² T^{2H+2}/((2H+1)(2H+2)) − μ_r T²/2)`.
pub fn bond_price_fbs_limit(r: f64, maturity: f64, hurst: f64, mu_r: f64, sigma_r: f64) -> Result<f64> {
    if !(maturity >= 0.0) || !maturity.is_finite() {
        return domain(format!("maturity {maturity} must be nonnegative"));
    }
    if !(0.5..1.0).contains(&hurst) {
        return domain(format!("Hurst exponent {hurst} outside [1/2, 1)"));
    }
    let h2 = 2.0 * hurst;
    let f1 = sigma_r * sigma_r * maturity.powf(h2 + 2.0) / ((h2 + 1.0) * (h2 + 2.0)) - mu_r * maturity * maturity / 2.0;
    Ok((-r * maturity + f1).exp())
}

/// `α → 1`, `H = 1/2` limit: `exp(−rτ + σ_r² τ³/6 − μ_r τ²/2)`.
pub fn bond_price_classical(r: f64, tau: f64, mu_r: f64, sigma_r: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return domain(format!("time to maturity {tau} must be nonnegative"));
    }
    Ok((-r * tau + sigma_r * sigma_r * tau.powi(3) / 6.0 - mu_r * tau * tau / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near_one(alpha: f64, hurst: f64) -> ModelParams {
        ModelParams { alpha, hurst, ..ModelParams::default() }
    }

    #[test]
    fn f1_vanishes_without_rate_dynamics() {
        let p = ModelParams { mu_r: 0.0, sigma_r: 0.0, ..ModelParams::default() };
        assert_eq!(f1_general(0.0, 1.0, &p, &QuadratureSpec::default()).unwrap(), 0.0);
    }

    #[test]
    fn f1_fbs_limit_value() {
        let p = near_one(1.0 - 1e-8, 0.7);
        let f1 = f1_general(0.0, 1.0, &p, &QuadratureSpec::default()).unwrap();
        let expected = 1.0 / (2.4 * 3.4) - 0.5;
        assert!((f1 - expected).abs() < 1e-4, "{f1} vs {expected}");
        assert!((expected + 0.377_451_0).abs() < 1e-7);
    }

    #[test]
    fn f1_rejects_bad_times() {
        let p = ModelParams::default();
        let spec = QuadratureSpec::default();
        assert!(f1_general(1.0, 1.0, &p, &spec).is_err());
        assert!(f1_general(1.0, 0.5, &p, &spec).is_err());
        assert!(f1_general(-0.1, 0.5, &p, &spec).is_err());
    }

    #[test]
    fn boundary_price_is_one() {
        let spec = QuadratureSpec::default();
        for p in [ModelParams::default(), near_one(0.7, 0.9)] {
            for &t in &[0.0, 0.3, 2.0] {
                let q = bond_price(0.7, t, t, &p, &spec).unwrap();
                assert_eq!(q.price, 1.0);
                assert_eq!(q.f2, 0.0);
            }
        }
        assert!(bond_price(0.1, 1.0, 0.5, &ModelParams::default(), &spec).is_err());
    }

    #[test]
    fn quote_fields_are_consistent() {
        let spec = QuadratureSpec::default();
        let q = bond_price(0.4, 0.25, 1.5, &ModelParams::default(), &spec).unwrap();
        assert_eq!(q.f2, 1.5 - 0.25);
        assert_eq!(q.price, (-0.4 * q.f2 + q.f1).exp());
        assert!(q.price > 0.0);
    }

    #[test]
    fn near_unit_alpha_bond_price() {
        let p = ModelParams { r0: 1.0, ..near_one(1.0 - 1e-8, 0.7) };
        let q = bond_price(1.0, 0.0, 1.0, &p, &QuadratureSpec::default()).unwrap();
        let target = (-1.0 - 0.377_451_0_f64).exp();
        assert!((q.price - target).abs() < 1e-4);
        assert!((target - 0.252_22).abs() < 1e-5);
    }

    #[test]
    fn fbs_limit_closed_form() {
        let v = bond_price_fbs_limit(1.0, 1.0, 0.7, 1.0, 1.0).unwrap();
        assert!((v - (-1.377_451_0_f64).exp()).abs() < 1e-7);
        assert_eq!(bond_price_fbs_limit(0.05, 2.0, 0.6, 0.0, 0.0).unwrap(), (-0.1_f64).exp());
        for &tau in &[0.3, 1.0, 2.5] {
            let a = bond_price_fbs_limit(0.2, tau, 0.5, 0.3, 0.4).unwrap();
            let b = bond_price_classical(0.2, tau, 0.3, 0.4).unwrap();
            assert!((a - b).abs() <= 1e-15 * a);
        }
        assert!(bond_price_fbs_limit(0.1, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(bond_price_fbs_limit(0.1, -1.0, 0.7, 0.0, 0.0).is_err());
    }

    #[test]
    fn classical_closed_form() {
        let v = bond_price_classical(1.0, 1.0, 1.0, 1.0).unwrap();
        // −1 + 1/6 − 1/2
        assert!((v - (-4.0_f64 / 3.0).exp()).abs() < 1e-15);
        assert!((v - 0.263_597).abs() < 1e-6);
        assert_eq!(bond_price_classical(0.3, 0.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(bond_price_classical(0.3, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn price_decreases_in_rate() {
        let spec = QuadratureSpec::default();
        let p = ModelParams::default();
        let prices: Vec<f64> = [-0.5, 0.0, 0.5, 1.0, 1.5]
            .iter()
            .map(|&r| bond_price(r, 0.2, 1.2, &p, &spec).unwrap().price)
            .collect();
        assert!(prices.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn theorem_statement_variant_differs_away_from_the_classical_point() {
        let spec = QuadratureSpec::default();
        let p = ModelParams::default();
        let a = f1_with_variant(0.0, 1.0, &p, &spec, F1Variant::Derivation).unwrap();
        let b = f1_with_variant(0.0, 1.0, &p, &spec, F1Variant::TheoremStatement).unwrap();
        assert!((a - b).abs() > 1e-3);
        // at α = 1, H = 1/2 the two coefficients coincide
        let c = ModelParams { alpha: 1.0, hurst: 0.5, ..p };
        let a = f1_with_variant(0.0, 1.0, &c, &spec, F1Variant::Derivation).unwrap();
        let b = f1_with_variant(0.0, 1.0, &c, &spec, F1Variant::TheoremStatement).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
