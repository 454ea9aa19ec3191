//! Finite-difference check of the transformed warrant PDE and residual
//! checks for the bond and warrant pricing PDEs.
//!
//! With `z = V/P` and `Θ = W/P` the warrant PDE reduces to
//! `∂Θ/∂t + σ̄²(t) z² ∂²Θ/∂z² = 0`, where
//!
//! ```text
//! σ̃_v²(t) = H t^{2H−1} σ_v² (t^{α−1}/Γ(α))^{2H}
//! σ̃_r²(t) = H t^{2H−1} σ_r² (t^{α−1}/Γ(α))^{2H}
//! σ̄²(t)   = σ̃_v² + 2ρ σ̃_r σ̃_v (T−t) + σ̃_r² (T−t)²
//! ```

use std::io::{self, Write};

use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_power_weight, lanczos_gamma, phi, solve_tridiagonal, QuadratureSpec};
use crate::params::{ModelParams, WarrantTerms};
use crate::warrant::{payoff, variance_integral};

/// Time-dependent effective variances of the subdiffusive clock.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveVols {
    params: ModelParams,
    maturity: f64,
    gamma_alpha: f64,
}

impl EffectiveVols {
    pub fn new(params: &ModelParams, maturity: f64) -> Self {
        Self {
            params: *params,
            maturity,
            gamma_alpha: lanczos_gamma(params.alpha),
        }
    }

    /// `H t^{2H−1} (t^{α−1}/Γ(α))^{2H}`; at `t = 0` the limit of `t^{2αH−1}`.
    fn clock(&self, t: f64) -> f64 {
        let h = self.params.hurst;
        if t == 0.0 {
            let e = self.params.clock_exponent() - 1.0;
            let base = h / self.gamma_alpha.powf(2.0 * h);
            return if e > 0.0 {
                0.0
            } else if e == 0.0 {
                base
            } else {
                f64::INFINITY
            };
        }
        h * t.powf(2.0 * h - 1.0) * (t.powf(self.params.alpha - 1.0) / self.gamma_alpha).powf(2.0 * h)
    }

    /// `t^{α−1} / Γ(α)`, the drift rate of the subdiffusive clock.
    pub fn clock_rate(&self, t: f64) -> f64 {
        t.powf(self.params.alpha - 1.0) / self.gamma_alpha
    }

    pub fn sigma_v_tilde_sq(&self, t: f64) -> f64 {
        self.clock(t) * self.params.sigma_v * self.params.sigma_v
    }

    pub fn sigma_r_tilde_sq(&self, t: f64) -> f64 {
        self.clock(t) * self.params.sigma_r * self.params.sigma_r
    }

    pub fn sigma_bar_sq(&self, t: f64) -> f64 {
        let sv = self.sigma_v_tilde_sq(t);
        let sr = self.sigma_r_tilde_sq(t);
        let s = self.maturity - t;
        sv + 2.0 * self.params.rho * sr.sqrt() * sv.sqrt() * s + sr * s * s
    }

    /// `∫_t^T σ̄²(s) ds`, with the `s^{2αH−1}` behaviour at the origin removed
    /// by the substitution `u = s^{2αH}`.
    pub fn integrated_sigma_bar_sq(&self, t: f64, spec: &QuadratureSpec) -> Result<f64> {
        if t >= self.maturity {
            return Ok(0.0);
        }
        let beta = self.params.clock_exponent();
        integrate_power_weight(
            |s| self.sigma_bar_sq(s) * s.powf(1.0 - beta),
            t,
            self.maturity,
            0.0,
            beta,
            spec,
        )
    }
}

/// `Θ(z, t) = (kz Φ(d̂₁) − NX Φ(d̂₂)) / (N + Mk)` with total variance
/// `Σ̄ = 2 ∫_t^T σ̄²(s) ds`.
pub fn theta_closed_form(
    z: f64,
    t: f64,
    terms: &WarrantTerms,
    params: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let var = 2.0 * EffectiveVols::new(params, terms.maturity).integrated_sigma_bar_sq(t, spec)?;
    Ok(theta_with_variance(z, var, terms))
}

fn theta_with_variance(z: f64, var: f64, terms: &WarrantTerms) -> f64 {
    if !(var > 0.0) || z <= 0.0 {
        return payoff(z.max(0.0), terms);
    }
    let sd = var.sqrt();
    let d1 = ((terms.ratio * z / (terms.shares * terms.strike)).ln() + 0.5 * var) / sd;
    let d2 = d1 - sd;
    (terms.ratio * z * phi(d1) - terms.shares * terms.strike * phi(d2)) * terms.dilution_factor()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
    pub n_t: usize,
    pub t_start: f64,
    pub maturity: f64,
}

impl GridSpec {
    /// Default bounds around the break-even point `K = NX/k`: `z_max = 5K·e^{3√Σ}`
    /// and `z_min = K / (5 e^{3√Σ})`, where `Σ` is the total variance over `[t_start, T]`.
    pub fn around_strike(
        terms: &WarrantTerms,
        params: &ModelParams,
        t_start: f64,
        n_z: usize,
        n_t: usize,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let var = variance_integral(t_start, terms.maturity, params, spec)?;
        let spread = (3.0 * var.sqrt()).exp();
        let k = terms.moneyness_point();
        Ok(Self {
            z_min: k / (5.0 * spread),
            z_max: 5.0 * k * spread,
            n_z,
            n_t,
            t_start,
            maturity: terms.maturity,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_min > 0.0) || !(self.z_max > self.z_min) || !self.z_max.is_finite() {
            return domain(format!("need 0 < z_min < z_max, got [{}, {}]", self.z_min, self.z_max));
        }
        if self.n_z < 16 || self.n_t < 16 {
            return domain("grid needs at least 16 nodes in z and 16 steps in t");
        }
        if !(self.t_start >= 0.0) || !(self.t_start < self.maturity) {
            return domain(format!("need 0 <= t_start < T, got {} and {}", self.t_start, self.maturity));
        }
        Ok(())
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_z - 1) as f64
    }

    pub fn z_nodes(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.n_z).map(|j| self.z_min + j as f64 * dz).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Implicit,
    /// Crank–Nicolson after two fully implicit start-up steps.
    #[default]
    CrankNicolson,
}

/// `Θ` on the grid; `levels[0]` is the terminal payoff at `T`, the last level
/// is at `t_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSurface {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
}

impl ThetaSurface {
    pub fn at_start(&self) -> &[f64] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `t,z,theta` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, delimiter: char) -> io::Result<()> {
        let d = delimiter;
        writeln!(out, "t{d}z{d}theta")?;
        for (t, level) in self.t.iter().zip(&self.levels) {
            for (z, v) in self.z.iter().zip(level) {
                writeln!(out, "{t}{d}{z}{d}{v}")?;
            }
        }
        Ok(())
    }
}

const RANNACHER_STEPS: usize = 2;

/// Marches `∂Θ/∂t + σ̄²(t) z² ∂²Θ/∂z² = 0` backward from the dilution
/// payoff at `T` to `t_start`.
///
/// Dirichlet data: `Θ(z_min) = 0`, `Θ(z_max) = (k z_max − NX)/(N+Mk)`.
/// `σ̄²` is evaluated at step midpoints, so `t = 0` is never touched.
pub fn solve_theta_pde(
    grid: &GridSpec,
    terms: &WarrantTerms,
    params: &ModelParams,
    scheme: Scheme,
) -> Result<ThetaSurface> {
    grid.validate()?;
    terms.validate()?;
    params.validate()?;
    let terms = WarrantTerms { maturity: grid.maturity, ..*terms };
    let vols = EffectiveVols::new(params, grid.maturity);
    let z = grid.z_nodes();
    let n = grid.n_z;
    let dz = grid.dz();
    let dt = (grid.maturity - grid.t_start) / grid.n_t as f64;
    let upper_bc = (terms.ratio * grid.z_max - terms.shares * terms.strike) * terms.dilution_factor();

    let mut theta: Vec<f64> = z.iter().map(|&x| payoff(x, &terms)).collect();
    theta[0] = 0.0;
    theta[n - 1] = upper_bc;
    let mut levels = vec![theta.clone()];
    let mut times = vec![grid.maturity];

    // interior unknowns j = 1..n-2
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];

    for step in 0..grid.n_t {
        let t_hi = grid.maturity - step as f64 * dt;
        let t_lo = if step + 1 == grid.n_t { grid.t_start } else { t_hi - dt };
        let a = vols.sigma_bar_sq(0.5 * (t_hi + t_lo));
        // weight on the new (earlier) level
        let theta_w = match scheme {
            Scheme::Implicit => 1.0,
            Scheme::CrankNicolson if step < RANNACHER_STEPS => 1.0,
            Scheme::CrankNicolson => 0.5,
        };
        for i in 0..m {
            let j = i + 1;
            let c = a * z[j] * z[j] * (t_hi - t_lo) / (dz * dz);
            lower[i] = -theta_w * c;
            diag[i] = 1.0 + 2.0 * theta_w * c;
            upper[i] = -theta_w * c;
            let explicit = (1.0 - theta_w) * c;
            rhs[i] = theta[j] + explicit * (theta[j + 1] - 2.0 * theta[j] + theta[j - 1]);
        }
        // boundary values are time independent
        let c_last = a * z[n - 2] * z[n - 2] * (t_hi - t_lo) / (dz * dz);
        rhs[m - 1] += theta_w * c_last * upper_bc;
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { step, t: t_lo });
        }
        theta[1..n - 1].copy_from_slice(&rhs);
        levels.push(theta.clone());
        times.push(t_lo);
    }

    Ok(ThetaSurface { z, t: times, levels })
}

/// Finite-difference steps for the residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub h_v: f64,
    pub h_r: f64,
    pub h_t: f64,
}

impl Steps {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            h_v: self.h_v * factor,
            h_r: self.h_r * factor,
            h_t: self.h_t * factor,
        }
    }
}

/// Left side of the warrant pricing PDE
///
/// ```text
/// W_t + σ̃_v² V² W_VV + σ̃_r² W_rr + 2ρ σ̃_r σ̃_v V W_Vr + μ_r (t^{α−1}/Γ(α)) W_r + r V W_V − r W
/// ```
///
/// assembled from central differences of `price(V, r, t)` at `point`.
pub fn residual_warrant_pde<F: Fn(f64, f64, f64) -> f64>(
    price: F,
    point: (f64, f64, f64),
    steps: Steps,
    params: &ModelParams,
) -> f64 {
    let (v, r, t) = point;
    let Steps { h_v, h_r, h_t } = steps;
    let w = price(v, r, t);
    let w_t = (price(v, r, t + h_t) - price(v, r, t - h_t)) / (2.0 * h_t);
    let w_vp = price(v + h_v, r, t);
    let w_vm = price(v - h_v, r, t);
    let w_rp = price(v, r + h_r, t);
    let w_rm = price(v, r - h_r, t);
    let w_v = (w_vp - w_vm) / (2.0 * h_v);
    let w_vv = (w_vp - 2.0 * w + w_vm) / (h_v * h_v);
    let w_r = (w_rp - w_rm) / (2.0 * h_r);
    let w_rr = (w_rp - 2.0 * w + w_rm) / (h_r * h_r);
    let w_vr = (price(v + h_v, r + h_r, t) - price(v + h_v, r - h_r, t) - price(v - h_v, r + h_r, t)
        + price(v - h_v, r - h_r, t))
        / (4.0 * h_v * h_r);

    // the cross coefficient does not depend on maturity
    let vols = EffectiveVols::new(params, t);
    let sv = vols.sigma_v_tilde_sq(t);
    let sr = vols.sigma_r_tilde_sq(t);
    w_t + sv * v * v * w_vv
        + sr * w_rr
        + 2.0 * params.rho * sr.sqrt() * sv.sqrt() * v * w_vr
        + params.mu_r * vols.clock_rate(t) * w_r
        + r * v * w_v
        - r * w
}

/// Left side of the bond pricing PDE
/// `P_t + μ_r (t^{α−1}/Γ(α)) P_r + H t^{2H−1} σ_r² (t^{α−1}/Γ(α))^{2H} P_rr − r P`.
pub fn residual_bond_pde<F: Fn(f64, f64) -> f64>(price: F, point: (f64, f64), steps: Steps, params: &ModelParams) -> f64 {
    let (r, t) = point;
    let Steps { h_r, h_t, .. } = steps;
    let p = price(r, t);
    let p_t = (price(r, t + h_t) - price(r, t - h_t)) / (2.0 * h_t);
    let p_rp = price(r + h_r, t);
    let p_rm = price(r - h_r, t);
    let p_r = (p_rp - p_rm) / (2.0 * h_r);
    let p_rr = (p_rp - 2.0 * p + p_rm) / (h_r * h_r);
    let vols = EffectiveVols::new(params, t);
    p_t + params.mu_r * vols.clock_rate(t) * p_r + vols.sigma_r_tilde_sq(t) * p_rr - r * p
}
