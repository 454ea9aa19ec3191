//! Monte-Carlo oracles for the classical limit (`α = 1`, `H = 1/2`), where the
//! closed forms coincide with Gaussian short-rate and Black–Scholes models.
//!
//! Paths are split into a fixed number of chunks, chunk `c` draws from stream
//! `seed.stream_id + c`, and chunk statistics are merged in chunk order, so the
//! estimate does not depend on the thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::params::{ModelParams, WarrantTerms};
use crate::processes::RngSeed;
use crate::warrant::payoff;

const CHUNKS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: RngSeed,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 100,
            seed: RngSeed::new(42, 0),
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return domain(format!("n_paths = {} must be at least 100", self.n_paths));
        }
        if self.n_steps < 10 {
            return domain(format!("n_steps = {} must be at least 10", self.n_steps));
        }
        Ok(())
    }
}

/// Sample mean with its standard error. With antithetic pairing the error is
/// computed from pair averages and `n_paths` counts both members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// Distance from `target` in units of the standard error; a zero error
    /// gives 0 for an exact hit and infinity otherwise.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

/// Rejects anything outside `α = 1`, `H = 1/2`.
pub fn check_classical(params: &ModelParams) -> Result<()> {
    if params.alpha != 1.0 || params.hurst != 0.5 {
        return Err(Error::Regime(format!(
            "Monte Carlo pricing needs alpha = 1 and H = 1/2 (got alpha = {}, H = {}); \
             the subdiffusive model prices through its hedging PDE, which has no sampled \
             risk-neutral expectation",
            params.alpha, params.hurst
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Runs `sample` on standard normal vectors of length `n_draws`; with
/// antithetics each draw is also evaluated on its negation.
fn estimate<F>(cfg: &McConfig, n_draws: usize, sample: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let units = if cfg.antithetic { cfg.n_paths / 2 } else { cfg.n_paths };
    let chunk_moments = |c: u64| -> Moments {
        let lo = units * c as usize / CHUNKS as usize;
        let hi = units * (c as usize + 1) / CHUNKS as usize;
        let mut rng: ChaCha8Rng = cfg.seed.with_stream(cfg.seed.stream_id.wrapping_add(c)).rng();
        let mut z = vec![0.0; n_draws];
        let mut neg = vec![0.0; n_draws];
        let mut m = Moments::default();
        for _ in lo..hi {
            for x in z.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let y = if cfg.antithetic {
                for (n, x) in neg.iter_mut().zip(&z) {
                    *n = -x;
                }
                0.5 * (sample(&z) + sample(&neg))
            } else {
                sample(&z)
            };
            m.push(y);
        }
        m
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<Moments> = {
        use rayon::prelude::*;
        (0..CHUNKS).into_par_iter().map(chunk_moments).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Moments> = (0..CHUNKS).map(chunk_moments).collect();

    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    if !total.mean.is_finite() || !total.m2.is_finite() {
        return Err(Error::Internal("Monte Carlo accumulation overflowed".into()));
    }
    let variance = if total.count > 1.0 { total.m2 / (total.count - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / total.count).sqrt(),
        n_paths: if cfg.antithetic { 2 * units } else { units },
    })
}

/// `E[exp(−∫₀^τ r(s) ds)]` for `r(s) = r0 + μ_r s + σ_r W(s)`, with the
/// integral taken by the trapezoidal rule on `cfg.n_steps` steps.
pub fn mc_bond_classical(r0: f64, tau: f64, mu_r: f64, sigma_r: f64, cfg: &McConfig) -> Result<McEstimate> {
    if ![r0, tau, mu_r, sigma_r].iter().all(|x| x.is_finite()) {
        return domain("bond inputs must be finite");
    }
    if tau < 0.0 || sigma_r < 0.0 {
        return domain("tau and sigma_r must be nonnegative");
    }
    let n = cfg.n_steps;
    let dt = tau / n as f64;
    let sd = sigma_r * dt.sqrt();
    estimate(cfg, n, |z| {
        let mut w = 0.0;
        let mut r_prev = r0;
        let mut integral = 0.0;
        for (i, dz) in z.iter().enumerate() {
            w += sd * dz;
            let r_next = r0 + mu_r * dt * (i + 1) as f64 + w;
            integral += 0.5 * (r_prev + r_next) * dt;
            r_prev = r_next;
        }
        (-integral).exp()
    })
}

/// Discounted dilution payoff under geometric Brownian firm value with
/// constant rate `r`, simulated with exact log steps up to `terms.maturity`.
pub fn mc_warrant_classical(v0: f64, r: f64, terms: &WarrantTerms, sigma_v: f64, cfg: &McConfig) -> Result<McEstimate> {
    terms.validate()?;
    if !(v0 > 0.0) || !v0.is_finite() {
        return domain(format!("initial firm value {v0} must be positive"));
    }
    if !r.is_finite() || !(sigma_v >= 0.0) || !sigma_v.is_finite() {
        return domain("rate and volatility must be finite, volatility nonnegative");
    }
    let tau = terms.maturity;
    let n = cfg.n_steps;
    let dt = tau / n as f64;
    let drift = (r - 0.5 * sigma_v * sigma_v) * dt;
    let sd = sigma_v * dt.sqrt();
    let discount = (-r * tau).exp();
    estimate(cfg, n, |z| {
        let log_v: f64 = z.iter().map(|dz| drift + sd * dz).sum();
        discount * payoff(v0 * log_v.exp(), terms)
    })
}

/// [`mc_bond_classical`] after checking that `params` lie in the classical regime.
pub fn mc_bond(params: &ModelParams, tau: f64, cfg: &McConfig) -> Result<McEstimate> {
    params.validate()?;
    check_classical(params)?;
    mc_bond_classical(params.r0, tau, params.mu_r, params.sigma_r, cfg)
}

/// [`mc_warrant_classical`] after checking the classical regime with a
/// deterministic, driftless rate.
pub fn mc_warrant(params: &ModelParams, terms: &WarrantTerms, cfg: &McConfig) -> Result<McEstimate> {
    params.validate()?;
    check_classical(params)?;
    if params.sigma_r != 0.0 || params.mu_r != 0.0 {
        return Err(Error::Regime("warrant Monte Carlo needs a constant rate (sigma_r = mu_r = 0)".into()));
    }
    mc_warrant_classical(params.v0, params.r0, terms, params.sigma_v, cfg)
}
