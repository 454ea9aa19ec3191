//! Model and contract parameters shared by every pricing module.

use crate::error::{domain, Result};

/// Market-dynamics constants of the subdiffusive model.
///
/// Firm value follows `dV = μ_v V dT_α + σ_v V dB₁ᴴ(T_α)` and the short rate
/// `dr = μ_r dT_α + σ_r dB₂ᴴ(T_α)`, with `B₁ᴴ`, `B₂ᴴ` correlated by `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu_v: f64,
    pub sigma_v: f64,
    pub mu_r: f64,
    pub sigma_r: f64,
    pub rho: f64,
    /// Hurst exponent, `[1/2, 1)`.
    pub hurst: f64,
    /// Subdiffusion exponent, `(1/2, 1]`; `1` is calendar time.
    pub alpha: f64,
    pub r0: f64,
    pub v0: f64,
}

impl Default for ModelParams {
    /// Unit drifts and volatilities, `H = 0.7`, `α = 0.9`, `ρ = 0.5`.
    fn default() -> Self {
        Self {
            mu_v: 1.0,
            sigma_v: 1.0,
            mu_r: 1.0,
            sigma_r: 1.0,
            rho: 0.5,
            hurst: 0.7,
            alpha: 0.9,
            r0: 1.0,
            v0: 1.0,
        }
    }
}

impl ModelParams {
    /// Classical limit: `α = 1`, `H = 1/2`, constant short rate `r0`.
    pub fn black_scholes(sigma_v: f64, r0: f64) -> Self {
        Self {
            mu_v: r0,
            sigma_v,
            mu_r: 0.0,
            sigma_r: 0.0,
            rho: 0.0,
            hurst: 0.5,
            alpha: 1.0,
            r0,
            v0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu_v,
            self.sigma_v,
            self.mu_r,
            self.sigma_r,
            self.rho,
            self.hurst,
            self.alpha,
            self.r0,
            self.v0,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return domain("model parameters must be finite");
        }
        if !(0.5..1.0).contains(&self.hurst) {
            return domain(format!("Hurst exponent {} outside [1/2, 1)", self.hurst));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return domain(format!("alpha {} outside (1/2, 1]", self.alpha));
        }
        if self.alpha < 1.0 && self.alpha + self.alpha * self.hurst <= 1.0 {
            return domain(format!(
                "alpha + alpha*H = {} must exceed 1",
                self.alpha + self.alpha * self.hurst
            ));
        }
        if self.sigma_v < 0.0 || self.sigma_r < 0.0 {
            return domain("volatilities must be nonnegative");
        }
        if self.rho.abs() > 1.0 {
            return domain(format!("correlation {} outside [-1, 1]", self.rho));
        }
        if self.v0 <= 0.0 {
            return domain("initial firm value must be positive");
        }
        Ok(())
    }

    /// `2αH`, the exponent of the effective clock variance `t^{2αH-1}`.
    pub fn clock_exponent(&self) -> f64 {
        2.0 * self.alpha * self.hurst
    }
}

/// Warrant contract data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarrantTerms {
    /// Shares of common stock outstanding (`N`).
    pub shares: f64,
    /// Warrants outstanding (`M`).
    pub warrants: f64,
    /// Shares received per warrant (`k`).
    pub ratio: f64,
    /// Exercise payment per warrant (`X`).
    pub strike: f64,
    /// Expiry (`T`).
    pub maturity: f64,
}

impl Default for WarrantTerms {
    fn default() -> Self {
        Self {
            shares: 1.0,
            warrants: 1.0,
            ratio: 1.0,
            strike: 1.0,
            maturity: 1.0,
        }
    }
}

impl WarrantTerms {
    pub fn validate(&self) -> Result<()> {
        let all = [self.shares, self.warrants, self.ratio, self.strike, self.maturity];
        if all.iter().any(|x| !x.is_finite()) {
            return domain("warrant terms must be finite");
        }
        if self.shares <= 0.0 {
            return domain("share count N must be positive");
        }
        if self.warrants < 0.0 {
            return domain("warrant count M must be nonnegative");
        }
        if self.ratio <= 0.0 {
            return domain("conversion ratio k must be positive");
        }
        if self.strike <= 0.0 {
            return domain("exercise payment X must be positive");
        }
        if self.maturity < 0.0 {
            return domain("maturity must be nonnegative");
        }
        Ok(())
    }

    /// `1 / (N + M k)`.
    pub fn dilution_factor(&self) -> f64 {
        1.0 / (self.shares + self.warrants * self.ratio)
    }

    /// `N X / k`, the firm value at which exercise breaks even.
    pub fn moneyness_point(&self) -> f64 {
        self.shares * self.strike / self.ratio
    }
}
