//! Cross-oracle check suite behind `subwarrant validate`.
//!
//! Every check pairs a library routine with an independently computed target
//! and a tolerance. [`run_suite`] never fails on a numerical mismatch; it
//! records it in the [`Report`].

use std::fmt;

use crate::bond::{bond_price_classical, bond_price_fbs_limit, bond_price_with, f1_general, F1Variant};
use crate::error::{domain, Result};
use crate::mc::{mc_bond_classical, mc_warrant_classical, McConfig};
use crate::numerics::{lanczos_gamma, normal_cdf, rk4_solve, QuadratureSpec};
use crate::params::{ModelParams, WarrantTerms};
use crate::pde::{residual_bond_pde, residual_warrant_pde, solve_theta_pde, theta_closed_form, GridSpec, Scheme, Steps};
use crate::processes::{correlated_fbm_pair, fbm_path, simulate_paths, RngSeed};
use crate::warrant::{d_values, variance_integral, warrant_price, WarrantVariant};

/// Reference values built without the pricing quadrature.
pub mod oracles {
    use super::*;

    /// `∫ₜᵀ w^{β−1} (T−w)^k dw` by binomial expansion of `(T−w)^k`.
    fn weighted_moment(t: f64, maturity: f64, beta: f64, k: i32) -> f64 {
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let p = beta + j as f64;
            sum += sign * binom * maturity.powi(k - j) * (maturity.powf(p) - t.powf(p)) / p;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        sum
    }

    /// `f₁(T − t)` in closed form: both integrals are finite power sums.
    pub fn f1_power_expansion(t: f64, maturity: f64, params: &ModelParams) -> f64 {
        let h = params.hurst;
        let g = lanczos_gamma(params.alpha);
        let diffusion = h * params.sigma_r.powi(2) / g.powf(2.0 * h) * weighted_moment(t, maturity, params.clock_exponent(), 2);
        let drift = params.mu_r / g * weighted_moment(t, maturity, params.alpha, 1);
        diffusion - drift
    }

    /// `f₁(T − t)` by RK4 on the `f₁` ODE, rewritten in `w = T^α − (T−τ)^α`
    /// so the right side stays bounded at `t = 0`. The grid is graded towards
    /// the far end with exponent 4.
    pub fn f1_by_ode(t: f64, maturity: f64, params: &ModelParams, n_steps: usize) -> Result<f64> {
        if !(t >= 0.0 && t < maturity) {
            return domain(format!("need 0 ≤ t < T, got t = {t}, T = {maturity}"));
        }
        let a = params.alpha;
        let h = params.hurst;
        let g = lanczos_gamma(a);
        let diffusion = h * params.sigma_r.powi(2) / g.powf(2.0 * h);
        let drift = params.mu_r / g;
        let top = maturity.powf(a);
        let end = top - t.powf(a);
        let grid: Vec<f64> = (0..=n_steps)
            .map(|i| end * (1.0 - (1.0 - i as f64 / n_steps as f64).powi(4)))
            .collect();
        let rhs = |w: f64, _: f64| {
            let rest = (top - w).max(0.0);
            let tau = maturity - rest.powf(1.0 / a);
            (diffusion * tau * tau * rest.powf(2.0 * h - 1.0) - drift * tau) / a
        };
        let ys = rk4_solve(rhs, 0.0, &grid)?;
        Ok(ys[n_steps])
    }

    /// Black–Scholes call on a non-dividend asset.
    pub fn black_scholes_call(spot: f64, strike: f64, rate: f64, vol: f64, tau: f64) -> Result<f64> {
        let sd = vol * tau.sqrt();
        let d1 = ((spot / strike).ln() + (rate + 0.5 * vol * vol) * tau) / sd;
        Ok(spot * normal_cdf(d1)? - strike * (-rate * tau).exp() * normal_cdf(d1 - sd)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed,
            passed: observed <= tolerance,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<44} tol {:>10.3e}  observed {:>10.3e}", self.name, self.tolerance, self.observed)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{} checks, {} failed", self.checks.len(), self.failures())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Smaller grids and sample sizes.
    pub quick: bool,
    /// Warrant surface used by the residual refinement check.
    pub residual_variant: WarrantVariant,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            quick: false,
            residual_variant: WarrantVariant::DerivationConsistent,
            seed: 42,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `|residual_k| / |residual_{k+1}|` for successive halvings.
pub fn refinement_ratios(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| w[0].abs() / w[1].abs()).collect()
}

/// Largest `|ratio − 4|`, or infinity when a ratio leaves `[3, 5]`.
fn ratio_gap(residuals: &[f64]) -> f64 {
    refinement_ratios(residuals)
        .into_iter()
        .map(|r| if (3.0..=5.0).contains(&r) { (r - 4.0).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

pub fn check_corollary_two(spec: &QuadratureSpec) -> Result<Vec<CheckOutcome>> {
    let mut near = 0.0_f64;
    let mut exact = 0.0_f64;
    for &tau in &[0.25_f64, 0.5, 1.0, 2.0] {
        for &mu_r in &[0.1, 1.0] {
            for &sigma_r in &[0.1, 1.0] {
                let p = ModelParams { alpha: 1.0 - 1e-8, hurst: 0.5, mu_r, sigma_r, ..ModelParams::default() };
                let target = sigma_r * sigma_r * tau.powi(3) / 6.0 - mu_r * tau * tau / 2.0;
                near = near.max(rel(f1_general(0.0, tau, &p, spec)?, target));
                for &alpha in &[0.7, 0.8, 0.9, 1.0] {
                    let q = ModelParams { alpha, ..p };
                    for &t in &[0.0, 0.5 * tau] {
                        let got = f1_general(t, tau + t, &q, spec)?;
                        exact = exact.max(rel(got, oracles::f1_power_expansion(t, tau + t, &q)));
                    }
                }
            }
        }
    }
    Ok(vec![
        CheckOutcome::at_most("f1 near alpha=1, H=1/2 vs cubic closed form", near, 1e-4),
        CheckOutcome::at_most("f1 at H=1/2 vs power expansion", exact, 1e-10),
    ])
}

pub fn check_corollary_one(spec: &QuadratureSpec) -> Result<CheckOutcome> {
    let mut worst = 0.0_f64;
    for &hurst in &[0.5, 0.6, 0.7, 0.8, 0.9] {
        for &maturity in &[0.5, 1.0, 2.0] {
            let p = ModelParams { alpha: 1.0 - 1e-8, hurst, ..ModelParams::default() };
            let got = f1_general(0.0, maturity, &p, spec)?;
            let target = bond_price_fbs_limit(0.0, maturity, hurst, p.mu_r, p.sigma_r)?.ln();
            worst = worst.max(rel(got, target));
        }
    }
    Ok(CheckOutcome::at_most("f1 near alpha=1 vs fractional BS limit", worst, 1e-4))
}

pub fn check_ode_cross_oracle(spec: &QuadratureSpec, n_steps: usize) -> Result<CheckOutcome> {
    let mut worst = 0.0_f64;
    for &alpha in &[0.9, 0.7] {
        for &hurst in &[0.5, 0.7, 0.9] {
            let p = ModelParams { alpha, hurst, ..ModelParams::default() };
            for &t in &[0.0, 0.25, 0.5, 0.75] {
                let ode = oracles::f1_by_ode(t, 1.0, &p, n_steps)?;
                worst = worst.max((ode - f1_general(t, 1.0, &p, spec)?).abs());
            }
        }
    }
    Ok(CheckOutcome::at_most("f1 quadrature vs RK4 on the f1 ODE", worst, 1e-6))
}

pub fn check_black_scholes(spec: &QuadratureSpec) -> Result<Vec<CheckOutcome>> {
    let p = ModelParams { v0: 100.0, ..ModelParams::black_scholes(0.2, 0.05) };
    let terms = WarrantTerms { shares: 1.0, warrants: 0.0, ratio: 1.0, strike: 100.0, maturity: 1.0 };
    let target = oracles::black_scholes_call(100.0, 100.0, 0.05, 0.2, 1.0)?;
    let consistent = warrant_price(100.0, 0.05, 0.0, &terms, &p, spec, WarrantVariant::DerivationConsistent)?;
    let literal = warrant_price(100.0, 0.05, 0.0, &terms, &p, spec, WarrantVariant::PaperLiteral)?;
    // literal discounts the strike leg once more
    let strike_leg = 100.0 * (-0.05_f64).exp() * normal_cdf(consistent.d2)?;
    let literal_target = consistent.price + strike_leg - strike_leg * (-0.05_f64).exp();
    Ok(vec![
        CheckOutcome::at_most("Black-Scholes limit of the warrant price", (consistent.price - target).abs(), 1e-10),
        CheckOutcome::at_most("literal variant differs by e^{-r tau} on strike", (literal.price - literal_target).abs(), 1e-10),
    ])
}

/// Maximum relative error of the Crank–Nicolson surface against the closed
/// form over `z ∈ [K e^{−√Σ}, K e^{√Σ}]`, `K = NX/k`.
pub fn pde_interior_error(terms: &WarrantTerms, params: &ModelParams, n: usize, spec: &QuadratureSpec) -> Result<f64> {
    let grid = GridSpec::around_strike(terms, params, 0.0, n, n, spec)?;
    let surface = solve_theta_pde(&grid, terms, params, Scheme::CrankNicolson)?;
    let sd = variance_integral(0.0, terms.maturity, params, spec)?.sqrt();
    let k = terms.moneyness_point();
    let (lo, hi) = (k * (-sd).exp(), k * sd.exp());
    let mut worst = 0.0_f64;
    for (&z, &theta) in surface.z.iter().zip(surface.at_start()) {
        if z >= lo && z <= hi {
            worst = worst.max(rel(theta, theta_closed_form(z, 0.0, terms, params, spec)?));
        }
    }
    Ok(worst)
}

/// Moderate-volatility fractional parameters used by the PDE comparison.
pub fn fractional_pde_params() -> ModelParams {
    ModelParams { alpha: 0.9, hurst: 0.7, sigma_v: 0.3, sigma_r: 0.1, mu_r: 0.02, rho: 0.5, r0: 0.05, v0: 100.0, ..ModelParams::default() }
}

pub fn check_pde(spec: &QuadratureSpec, n: usize) -> Result<Vec<CheckOutcome>> {
    let terms = WarrantTerms { shares: 1.0, warrants: 0.0, ratio: 1.0, strike: 100.0, maturity: 1.0 };
    let classical = pde_interior_error(&terms, &ModelParams::black_scholes(0.2, 0.05), n, spec)?;
    let fractional = pde_interior_error(&terms, &fractional_pde_params(), n, spec)?;
    let scale = (400.0 / n as f64).powi(2);
    Ok(vec![
        CheckOutcome::at_most(format!("theta PDE {n}x{n}, classical"), classical, 1e-3 * scale),
        CheckOutcome::at_most(format!("theta PDE {n}x{n}, alpha=0.9 H=0.7"), fractional, 5e-3 * scale),
    ])
}

/// Bond PDE residuals at `(r, t) = (1, 0.5)`, `T = 1`, default parameters,
/// for steps `0.05 / 2^k`, `k = 0..=3`.
pub fn bond_residuals(variant: F1Variant) -> Result<Vec<f64>> {
    let p = ModelParams::default();
    let spec = QuadratureSpec::default().with_tolerance(1e-14, 1e-16);
    let price = |r: f64, t: f64| bond_price_with(r, t, 1.0, &p, &spec, variant).map(|q| q.price).unwrap_or(f64::NAN);
    Ok((0..4)
        .map(|k| {
            let h = 0.05 / 2f64.powi(k);
            residual_bond_pde(price, (1.0, 0.5), Steps { h_v: h, h_r: h, h_t: h }, &p)
        })
        .collect())
}

/// Warrant PDE residuals at `(V, r, t)` for relative steps `0.1 / 2^k`,
/// `k = 0..=3`.
pub fn warrant_residuals(
    params: &ModelParams,
    terms: &WarrantTerms,
    point: (f64, f64, f64),
    variant: WarrantVariant,
) -> Result<Vec<f64>> {
    let spec = QuadratureSpec::default().with_tolerance(1e-14, 1e-16);
    let price = |v: f64, r: f64, t: f64| {
        warrant_price(v, r, t, terms, params, &spec, variant).map(|w| w.price).unwrap_or(f64::NAN)
    };
    Ok((0..4)
        .map(|k| {
            let h = 0.1 / 2f64.powi(k);
            residual_warrant_pde(price, point, Steps { h_v: 0.5 * h * point.0, h_r: h, h_t: h }, params)
        })
        .collect())
}

pub fn check_residuals(variant: WarrantVariant) -> Result<Vec<CheckOutcome>> {
    let bs = ModelParams::black_scholes(0.2, 0.05);
    let bs_terms = WarrantTerms { shares: 1.0, warrants: 0.0, ratio: 1.0, strike: 100.0, maturity: 1.0 };
    let fig = ModelParams::default();
    let fig_terms = WarrantTerms::default();
    Ok(vec![
        CheckOutcome::at_most("bond PDE residual refinement |ratio-4|", ratio_gap(&bond_residuals(F1Variant::Derivation)?), 1.0),
        CheckOutcome::at_most(
            format!("warrant PDE residual, classical, {variant}"),
            ratio_gap(&warrant_residuals(&bs, &bs_terms, (100.0, 0.05, 0.5), variant)?),
            1.0,
        ),
        CheckOutcome::at_most(
            format!("warrant PDE residual, default params, {variant}"),
            ratio_gap(&warrant_residuals(&fig, &fig_terms, (1.5, 1.0, 0.5), variant)?),
            1.0,
        ),
    ])
}

pub fn check_monte_carlo(seed: u64, quick: bool) -> Result<Vec<CheckOutcome>> {
    let scale = if quick { 10 } else { 1 };
    let bond_cfg = McConfig { n_paths: 100_000 / scale, n_steps: 100, seed: RngSeed::new(seed, 0), antithetic: false };
    let bond = mc_bond_classical(1.0, 1.0, 1.0, 1.0, &bond_cfg)?;
    let warrant_cfg = McConfig { n_paths: 1_000_000 / scale, n_steps: 10, seed: RngSeed::new(seed, 1000), antithetic: true };
    let terms = WarrantTerms { shares: 1.0, warrants: 0.0, ratio: 1.0, strike: 100.0, maturity: 1.0 };
    let warrant = mc_warrant_classical(100.0, 0.05, &terms, 0.2, &warrant_cfg)?;
    let call = oracles::black_scholes_call(100.0, 100.0, 0.05, 0.2, 1.0)?;
    Ok(vec![
        CheckOutcome::at_most(
            format!("MC bond ({} paths), std errors", bond.n_paths),
            bond.z_score(bond_price_classical(1.0, 1.0, 1.0, 1.0)?),
            3.0,
        ),
        CheckOutcome::at_most(format!("MC warrant ({} paths), std errors", warrant.n_paths), warrant.z_score(call), 3.0),
    ])
}

pub fn check_processes(seed: u64, quick: bool) -> Result<Vec<CheckOutcome>> {
    let (n_clock, n_fbm) = if quick { (100, 2000) } else { (1000, 10_000) };
    let p = ModelParams::default();
    let mut decreasing = 0usize;
    for s in 0..n_clock as u64 {
        let path = simulate_paths(&p, 1.0, 100, RngSeed::new(seed, s))?;
        decreasing += path.t_alpha.windows(2).filter(|w| w[1] < w[0]).count();
    }
    let near = ModelParams { alpha: 1.0 - 1e-6, ..p };
    let path = simulate_paths(&near, 2.0, 200, RngSeed::new(seed, 0))?;
    let degenerate = [50usize, 100, 200]
        .iter()
        .map(|&i| (path.t_alpha[i] / path.t[i] - 1.0).abs())
        .fold(0.0, f64::max);

    let mut worst_var = 0.0_f64;
    for (j, &h) in [0.5, 0.7, 0.9].iter().enumerate() {
        let sq: Vec<f64> = (0..n_fbm as u64)
            .map(|s| fbm_path(h, 16, 1.0 / 16.0, RngSeed::new(seed, 10_000 * (j as u64 + 1) + s)).map(|b| b[16] * b[16]))
            .collect::<Result<_>>()?;
        let (mean, se) = mean_and_error(&sq);
        worst_var = worst_var.max((mean - 1.0).abs() / se);
    }

    let mut worst_corr = 0.0_f64;
    for (j, &rho) in [-0.5, 0.0, 0.5].iter().enumerate() {
        let ends: Vec<(f64, f64)> = (0..n_fbm as u64)
            .map(|s| correlated_fbm_pair(0.7, rho, 16, 1.0 / 16.0, RngSeed::new(seed, 100_000 * (j as u64 + 1) + s)).map(|(a, b)| (a[16], b[16])))
            .collect::<Result<_>>()?;
        let n = ends.len() as f64;
        let (sa, sb) = ends.iter().fold((0.0, 0.0), |acc, e| (acc.0 + e.0, acc.1 + e.1));
        let (ma, mb) = (sa / n, sb / n);
        let (mut cab, mut caa, mut cbb) = (0.0, 0.0, 0.0);
        for (a, b) in &ends {
            cab += (a - ma) * (b - mb);
            caa += (a - ma) * (a - ma);
            cbb += (b - mb) * (b - mb);
        }
        let corr = cab / (caa * cbb).sqrt();
        let se = (1.0 - rho * rho) / n.sqrt();
        worst_corr = worst_corr.max((corr - rho).abs() / se);
    }

    Ok(vec![
        CheckOutcome::at_most(format!("T_alpha decreasing steps over {n_clock} paths"), decreasing as f64, 0.0),
        CheckOutcome::at_most("|T_alpha(t)/t - 1| at alpha = 1 - 1e-6", degenerate, 0.01),
        CheckOutcome::at_most(format!("Var B^H(1) over {n_fbm} paths, std errors"), worst_var, 3.0),
        CheckOutcome::at_most(format!("fBm pair correlation over {n_fbm} paths, std errors"), worst_corr, 3.0),
    ])
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Warrant bounds `0 ≤ W ≤ kV/(N+Mk)`, monotonicity in `V` and
/// `d₁ − d₂ = √Σ` over deterministic pseudo-random draws.
pub fn check_invariants(seed: u64, draws: usize, spec: &QuadratureSpec) -> Result<Vec<CheckOutcome>> {
    use rand::Rng;
    let mut rng = RngSeed::new(seed, 7).rng();
    let mut bound_violations = 0usize;
    let mut monotone_violations = 0usize;
    let mut worst_gap = 0.0_f64;
    for _ in 0..draws {
        let hurst = rng.random_range(0.5..0.95);
        let alpha = rng.random_range(0.55..=1.0);
        if alpha < 1.0 && alpha * (1.0 + hurst) <= 1.0 {
            continue;
        }
        let p = ModelParams {
            alpha,
            hurst,
            sigma_v: rng.random_range(0.05..1.0),
            sigma_r: rng.random_range(0.0..0.5),
            mu_r: rng.random_range(-0.5..0.5),
            rho: rng.random_range(-1.0..=1.0),
            ..ModelParams::default()
        };
        let terms = WarrantTerms {
            shares: rng.random_range(0.5..5.0),
            warrants: rng.random_range(0.0..3.0),
            ratio: rng.random_range(0.2..2.0),
            strike: rng.random_range(0.2..3.0),
            maturity: rng.random_range(0.2..2.0),
        };
        let t = terms.maturity * rng.random_range(0.0..0.9);
        let r = rng.random_range(-0.2..1.0);
        let mut last = -1.0;
        for i in 0..8 {
            let v = 0.25 * 1.6f64.powi(i);
            let w = warrant_price(v, r, t, &terms, &p, spec, WarrantVariant::DerivationConsistent)?;
            let cap = terms.ratio * v * terms.dilution_factor();
            if !(w.price >= 0.0 && w.price <= cap * (1.0 + 1e-12)) {
                bound_violations += 1;
            }
            if w.price < last - 1e-12 * cap {
                monotone_violations += 1;
            }
            last = w.price;
            let (d1, d2) = d_values(v, r, t, &terms, &p, spec)?;
            worst_gap = worst_gap.max((d1 - d2 - w.variance_integral.sqrt()).abs());
        }
    }
    Ok(vec![
        CheckOutcome::at_most("warrant bound violations", bound_violations as f64, 0.0),
        CheckOutcome::at_most("warrant monotonicity violations in V", monotone_violations as f64, 0.0),
        CheckOutcome::at_most("|d1 - d2 - sqrt(variance)|", worst_gap, 1e-12),
    ])
}

pub fn run_suite(options: &SuiteOptions) -> Result<Report> {
    let spec = QuadratureSpec::default();
    let mut checks = check_corollary_two(&spec)?;
    checks.push(check_corollary_one(&spec)?);
    checks.push(check_ode_cross_oracle(&spec, if options.quick { 400 } else { 2000 })?);
    checks.extend(check_black_scholes(&spec)?);
    checks.extend(check_pde(&spec, if options.quick { 200 } else { 400 })?);
    checks.extend(check_residuals(options.residual_variant)?);
    checks.extend(check_monte_carlo(options.seed, options.quick)?);
    checks.extend(check_processes(options.seed, options.quick)?);
    checks.extend(check_invariants(options.seed, if options.quick { 200 } else { 1000 }, &spec)?);
    Ok(Report { checks })
}
