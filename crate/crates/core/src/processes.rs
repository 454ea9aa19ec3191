//! Seeded simulation of the subordinator, its inverse, fractional Brownian
//! motion and the composed subdiffusive asset and short-rate trajectories.
//!
//! Inner processes run on operational time `τ`:
//!
//! ```text
//! X(τ) = V0 · exp(μ_v τ + σ_v B₁ᴴ(τ) − ½ σ_v² τ^{2H})
//! R(τ) = r0 + μ_r τ + σ_r B₂ᴴ(τ)
//! ```
//!
//! and are observed through the inverse subordinator: `V(t) = X(T_α(t))`,
//! `r(t) = R(T_α(t))`. Both share one `T_α` path, so trapping periods are
//! synchronized.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::numerics::lanczos_gamma;
use crate::params::ModelParams;

/// Seed plus stream id for the ChaCha8 generator; distinct streams are
/// independent and identical pairs reproduce identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One draw `S` with `E[e^{-uS}] = e^{-u^α}`, by the Chambers–Mallows–Stuck
/// (Kanter) transformation of a uniform angle and a unit exponential.
pub fn one_sided_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v: f64 = PI * rng.random::<f64>();
    // v = 0 would give 0/0
    let v = if v == 0.0 { f64::MIN_POSITIVE } else { v };
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// A discretized subordinator path `U_α(τ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    pub tau: Vec<f64>,
    pub value: Vec<f64>,
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("stable exponent {alpha} outside (0, 1)"));
    }
    Ok(())
}

/// Samples `U_α` on `tau_grid` (which must start at 0).
pub fn stable_subordinator_path(alpha: f64, tau_grid: &[f64], seed: RngSeed) -> Result<SubordinatorPath> {
    check_alpha_open(alpha)?;
    if tau_grid.first() != Some(&0.0) {
        return domain("operational grid must start at 0");
    }
    if tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("operational grid must be strictly increasing");
    }
    let mut rng = seed.rng();
    let mut value = Vec::with_capacity(tau_grid.len());
    let mut u = 0.0;
    value.push(u);
    for w in tau_grid.windows(2) {
        u += (w[1] - w[0]).powf(1.0 / alpha) * one_sided_stable(alpha, &mut rng);
        value.push(u);
    }
    Ok(SubordinatorPath {
        tau: tau_grid.to_vec(),
        value,
    })
}

/// First-passage times `T_α(t) = inf{τ : U_α(τ) > t}` read off a discretized
/// subordinator path: the grid time immediately preceding the first node
/// whose value exceeds `t`. Jumps of `U` therefore map to flat stretches of
/// `T_α`.
pub fn inverse_subordinator(path: &SubordinatorPath, t_grid: &[f64]) -> Result<Vec<f64>> {
    let reached = path.value.last().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t >= 0.0) {
            return domain(format!("calendar time {t} must be nonnegative"));
        }
        let idx = path.value.partition_point(|&u| u <= t);
        if idx >= path.value.len() {
            return Err(Error::Range { reached, required: t });
        }
        out.push(path.tau[idx.saturating_sub(1)]);
    }
    Ok(out)
}

/// Grid indices `i` such that `T_α(t) = τ_i`, for the same lookup as
/// [`inverse_subordinator`].
fn first_passage_indices(path: &SubordinatorPath, t_grid: &[f64]) -> Result<Vec<usize>> {
    let reached = path.value.last().copied().unwrap_or(0.0);
    t_grid
        .iter()
        .map(|&t| {
            let idx = path.value.partition_point(|&u| u <= t);
            if idx >= path.value.len() {
                Err(Error::Range { reached, required: t })
            } else {
                Ok(idx.saturating_sub(1))
            }
        })
        .collect()
}

/// How fractional Gaussian noise is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FgnMethod {
    /// Circulant embedding (Davies–Harte), falling back to Cholesky if the
    /// embedding has negative eigenvalues.
    #[default]
    CirculantEmbedding,
    Cholesky,
}

fn check_hurst(hurst: f64) -> Result<()> {
    if !(0.5..1.0).contains(&hurst) {
        return domain(format!("Hurst exponent {hurst} outside [1/2, 1)"));
    }
    Ok(())
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Two independent unit-step fGn samples of length `n`.
fn fgn_pair<R: Rng + ?Sized>(hurst: f64, n: usize, method: FgnMethod, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    if method == FgnMethod::CirculantEmbedding {
        if let Some(pair) = fgn_circulant(hurst, n, rng) {
            return Ok(pair);
        }
    }
    let factor = fgn_cholesky_factor(hurst, n)?;
    let a = cholesky_sample(&factor, n, rng);
    let b = cholesky_sample(&factor, n, rng);
    Ok((a, b))
}

/// Davies–Harte: embed the `n × n` Toeplitz covariance into a circulant of
/// size `2n`; the real and imaginary parts of one FFT give two independent
/// samples. Returns `None` when the embedding is not nonnegative-definite.
fn fgn_circulant<R: Rng + ?Sized>(hurst: f64, n: usize, rng: &mut R) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let scale = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    if row.iter().any(|c| c.re < -1e-10 * scale) {
        return None;
    }
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|lambda| {
            let s = (lambda.re.max(0.0) / m as f64).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex::new(s * a, s * b)
        })
        .collect();
    fft.process(&mut w);
    let re = w[..n].iter().map(|c| c.re).collect();
    let im = w[..n].iter().map(|c| c.im).collect();
    Some((re, im))
}

/// Lower-triangular Cholesky factor of the fGn covariance, row-major.
fn fgn_cholesky_factor(hurst: f64, n: usize) -> Result<Vec<f64>> {
    let cov = |i: usize, j: usize| fgn_autocovariance(hurst, i.abs_diff(j));
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = cov(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Internal(format!(
                        "fGn covariance is not positive definite at row {i} (H = {hurst})"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn cholesky_sample<R: Rng + ?Sized>(l: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    (0..n)
        .map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum())
        .collect()
}

fn validate_fbm_args(hurst: f64, n: usize, dt: f64) -> Result<()> {
    check_hurst(hurst)?;
    if n == 0 {
        return domain("fBm needs at least one step");
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return domain(format!("step size {dt} must be positive"));
    }
    Ok(())
}

fn cumulate(increments: &[f64], scale: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for x in increments {
        acc += scale * x;
        out.push(acc);
    }
    out
}

/// Fractional Brownian motion at `0, dt, …, n·dt` (length `n + 1`, starting at 0).
pub fn fbm_path(hurst: f64, n: usize, dt: f64, seed: RngSeed) -> Result<Vec<f64>> {
    fbm_path_with(hurst, n, dt, seed, FgnMethod::default())
}

pub fn fbm_path_with(hurst: f64, n: usize, dt: f64, seed: RngSeed, method: FgnMethod) -> Result<Vec<f64>> {
    validate_fbm_args(hurst, n, dt)?;
    let mut rng = seed.rng();
    let (g, _) = fgn_pair(hurst, n, method, &mut rng)?;
    Ok(cumulate(&g, dt.powf(hurst)))
}

/// Two fBm paths with pointwise correlation `rho`:
/// `B₂ = ρ B₁ + √(1−ρ²) B⊥` with `B⊥` independent of `B₁`.
pub fn correlated_fbm_pair(hurst: f64, rho: f64, n: usize, dt: f64, seed: RngSeed) -> Result<(Vec<f64>, Vec<f64>)> {
    validate_fbm_args(hurst, n, dt)?;
    if !(rho.abs() <= 1.0) {
        return domain(format!("correlation {rho} outside [-1, 1]"));
    }
    let mut rng = seed.rng();
    correlated_pair_from(hurst, rho, n, dt, &mut rng)
}

fn correlated_pair_from<R: Rng + ?Sized>(
    hurst: f64,
    rho: f64,
    n: usize,
    dt: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (g1, g2) = fgn_pair(hurst, n, FgnMethod::default(), rng)?;
    let scale = dt.powf(hurst);
    let b1 = cumulate(&g1, scale);
    let perp = cumulate(&g2, scale);
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let b2 = b1.iter().zip(&perp).map(|(x, y)| rho * x + c * y).collect();
    Ok((b1, b2))
}

/// Interpretation of the fBm-driven asset equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssetDynamics {
    /// `exp(μτ + σB − ½σ²τ^{2H})`; geometric Brownian motion when `H = 1/2`.
    #[default]
    WickIto,
    /// `exp(μτ + σB)`.
    Pathwise,
}

/// Sampled subdiffusive trajectories on a calendar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffusivePath {
    pub t: Vec<f64>,
    pub t_alpha: Vec<f64>,
    pub asset: Vec<f64>,
    pub rate: Vec<f64>,
}

impl SubdiffusivePath {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Writes `t,T_alpha,asset,rate` rows with shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut out: W, delimiter: char) -> io::Result<()> {
        let d = delimiter;
        writeln!(out, "t{d}T_alpha{d}asset{d}rate")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{}{d}{}{d}{}{d}{}",
                self.t[i], self.t_alpha[i], self.asset[i], self.rate[i]
            )?;
        }
        Ok(())
    }
}

/// Simulates asset and short-rate paths on `n_steps` uniform steps of `[0, horizon]`.
pub fn simulate_paths(params: &ModelParams, horizon: f64, n_steps: usize, seed: RngSeed) -> Result<SubdiffusivePath> {
    simulate_paths_with(params, horizon, n_steps, seed, AssetDynamics::default())
}

pub fn simulate_paths_with(
    params: &ModelParams,
    horizon: f64,
    n_steps: usize,
    seed: RngSeed,
    dynamics: AssetDynamics,
) -> Result<SubdiffusivePath> {
    params.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("horizon {horizon} must be positive"));
    }
    if n_steps == 0 {
        return domain("need at least one time step");
    }
    let dt = horizon / n_steps as f64;
    let t: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
    let mut rng = seed.rng();

    // operational grid and the index of T_α(t_j) on it
    let (tau, index) = if params.alpha >= 1.0 {
        (t.clone(), (0..=n_steps).collect::<Vec<_>>())
    } else {
        let path = subordinator_covering(params.alpha, horizon, n_steps, &mut rng)?;
        let index = first_passage_indices(&path, &t)?;
        (path.tau, index)
    };

    let n_op = tau.len() - 1;
    let d_tau = if n_op > 0 { tau[1] - tau[0] } else { dt };
    let (b1, b2) = correlated_pair_from(params.hurst, params.rho, n_op.max(1), d_tau, &mut rng)?;

    let h2 = 2.0 * params.hurst;
    let asset_at = |i: usize| {
        let s = tau[i];
        let correction = match dynamics {
            AssetDynamics::WickIto => 0.5 * params.sigma_v * params.sigma_v * s.powf(h2),
            AssetDynamics::Pathwise => 0.0,
        };
        params.v0 * (params.mu_v * s + params.sigma_v * b1[i] - correction).exp()
    };
    let rate_at = |i: usize| params.r0 + params.mu_r * tau[i] + params.sigma_r * b2[i];

    Ok(SubdiffusivePath {
        t_alpha: index.iter().map(|&i| tau[i]).collect(),
        asset: index.iter().map(|&i| asset_at(i)).collect(),
        rate: index.iter().map(|&i| rate_at(i)).collect(),
        t,
    })
}

/// Simulates `U_α` on a uniform operational grid until it passes `horizon`,
/// doubling the number of steps as needed. The step is sized so that the
/// expected `T_α(horizon) = horizon^α / Γ(1+α)` spans four operational steps
/// per calendar step.
fn subordinator_covering<R: Rng + ?Sized>(
    alpha: f64,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    const OVERSAMPLE: usize = 4;
    const MAX_STEPS: usize = 1 << 26;
    check_alpha_open(alpha)?;
    let expected = horizon.powf(alpha) / lanczos_gamma(1.0 + alpha);
    let target_steps = OVERSAMPLE * n_steps;
    let d_tau = expected / target_steps as f64;
    let jump_scale = d_tau.powf(1.0 / alpha);

    let mut value = vec![0.0];
    let mut budget = target_steps + target_steps / 2;
    let mut u = 0.0;
    while u <= horizon {
        if value.len() > MAX_STEPS {
            return Err(Error::Range {
                reached: u,
                required: horizon,
            });
        }
        while value.len() <= budget && u <= horizon {
            u += jump_scale * one_sided_stable(alpha, rng);
            value.push(u);
        }
        budget *= 2;
    }
    let tau = (0..value.len()).map(|i| i as f64 * d_tau).collect();
    Ok(SubordinatorPath { tau, value })
}

/// Length of the longest run of exactly equal consecutive values.
pub fn longest_flat_run(values: &[f64]) -> usize {
    let mut best = usize::from(!values.is_empty());
    let mut run = 1;
    for w in values.windows(2) {
        if w[1] == w[0] {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    best
}
