//! Acceptance gate: one PASS/FAIL line per criterion, each with a runtime
//! budget. Lines go straight to stdout so they survive output capture.

mod oracles;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subwarrant::bond::{bond_price_with, f1_general, F1Variant};
use subwarrant::mc::{mc_bond_classical, mc_warrant_classical, McConfig};
use subwarrant::numerics::{rk4_solve, QuadratureSpec};
use subwarrant::pde::{residual_bond_pde, residual_warrant_pde, solve_theta_pde, theta_closed_form, GridSpec, Scheme, Steps};
use subwarrant::processes::{correlated_fbm_pair, fbm_path, longest_flat_run, simulate_paths, RngSeed};
use subwarrant::warrant::{d_values, variance_integral, warrant_price, WarrantVariant};
use subwarrant::{ModelParams, WarrantTerms};

type Outcome = Result<String, String>;

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn call_terms() -> WarrantTerms {
    WarrantTerms { shares: 1.0, warrants: 0.0, ratio: 1.0, strike: 100.0, maturity: 1.0 }
}

fn unit_alpha_limit(hurst: f64, mu_r: f64, sigma_r: f64) -> ModelParams {
    ModelParams { alpha: 1.0 - 1e-8, hurst, mu_r, sigma_r, ..ModelParams::default() }
}

fn criterion_1() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut near = 0.0_f64;
    let mut exact = 0.0_f64;
    for &tau in &[0.25_f64, 0.5, 1.0, 2.0] {
        for &mu_r in &[0.1, 1.0] {
            for &sigma_r in &[0.1, 1.0] {
                let p = unit_alpha_limit(0.5, mu_r, sigma_r);
                let cubic = sigma_r * sigma_r * tau.powi(3) / 6.0 - mu_r * tau * tau / 2.0;
                near = near.max(rel(f1_general(0.0, tau, &p, &spec).map_err(|e| e.to_string())?, cubic));
                for &alpha in &[0.7, 0.8, 0.9, 1.0] {
                    let q = ModelParams { alpha, ..p };
                    let got = f1_general(0.0, tau, &q, &spec).map_err(|e| e.to_string())?;
                    exact = exact.max(rel(got, oracles::f1_half(0.0, tau, alpha, mu_r, sigma_r)));
                }
            }
        }
    }
    ensure(near <= 1e-4, format!("near-unit alpha rel error {near:.2e}"))?;
    ensure(exact <= 1e-10, format!("H=1/2 rel error {exact:.2e}"))?;
    Ok(format!("cubic rel {near:.1e}, H=1/2 closed form rel {exact:.1e}"))
}

fn criterion_2() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut worst = 0.0_f64;
    for &hurst in &[0.5, 0.6, 0.7, 0.8, 0.9] {
        for &maturity in &[0.5_f64, 1.0, 2.0] {
            let p = unit_alpha_limit(hurst, 1.0, 1.0);
            let h2 = 2.0 * hurst;
            let target = maturity.powf(h2 + 2.0) / ((h2 + 1.0) * (h2 + 2.0)) - maturity * maturity / 2.0;
            worst = worst.max(rel(f1_general(0.0, maturity, &p, &spec).map_err(|e| e.to_string())?, target));
        }
    }
    ensure(worst <= 1e-4, format!("rel error {worst:.2e}"))?;
    Ok(format!("max rel error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let spec = QuadratureSpec::default();
    let n = 2000;
    let mut worst = 0.0_f64;
    for &(mu_r, sigma_r) in &[(1.0, 1.0), (0.1, 1.0), (1.0, 0.1), (-0.5, 0.3)] {
        for i in 0..10 {
            let t = 0.1 * i as f64;
            let (end, rhs) = oracles::f1_ode(t, 1.0, 0.9, 0.7, mu_r, sigma_r);
            let grid: Vec<f64> = (0..=n).map(|k| end * (1.0 - (1.0 - k as f64 / n as f64).powi(4))).collect();
            let ode = *rk4_solve(rhs, 0.0, &grid).map_err(|e| e.to_string())?.last().unwrap();
            let p = ModelParams { alpha: 0.9, hurst: 0.7, mu_r, sigma_r, ..ModelParams::default() };
            let quad = f1_general(t, 1.0, &p, &spec).map_err(|e| e.to_string())?;
            worst = worst.max((ode - quad).abs());
        }
    }
    ensure(worst <= 1e-6, format!("abs gap {worst:.2e}"))?;
    Ok(format!("max abs gap {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let spec = QuadratureSpec::default();
    let p = ModelParams { v0: 100.0, ..ModelParams::black_scholes(0.2, 0.05) };
    let target = oracles::black_scholes_call(100.0, 100.0, 0.05, 0.2, 1.0);
    ensure((target - 10.4506).abs() < 1e-4, format!("oracle {target}"))?;
    let direct = 100.0 * oracles::normal_cdf(0.35) - 100.0 * (-0.05_f64).exp() * oracles::normal_cdf(0.15);
    ensure((target - direct).abs() < 1e-12, "oracle self-check")?;
    let consistent = warrant_price(100.0, 0.05, 0.0, &call_terms(), &p, &spec, WarrantVariant::DerivationConsistent)
        .map_err(|e| e.to_string())?;
    let literal = warrant_price(100.0, 0.05, 0.0, &call_terms(), &p, &spec, WarrantVariant::PaperLiteral)
        .map_err(|e| e.to_string())?;
    let err = (consistent.price - target).abs();
    ensure(err <= 1e-10, format!("BS gap {err:.2e}"))?;
    let literal_target = 100.0 * oracles::normal_cdf(0.35) - 100.0 * (-0.1_f64).exp() * oracles::normal_cdf(0.15);
    let lit_err = (literal.price - literal_target).abs();
    ensure(lit_err <= 1e-10, format!("literal gap {lit_err:.2e}"))?;
    Ok(format!("price {:.6} (gap {err:.1e}); literal {:.6} (gap {lit_err:.1e})", consistent.price, literal.price))
}

fn pde_interior_error(params: &ModelParams) -> Result<f64, String> {
    let spec = QuadratureSpec::default();
    let terms = call_terms();
    let grid = GridSpec::around_strike(&terms, params, 0.0, 400, 400, &spec).map_err(|e| e.to_string())?;
    let surface = solve_theta_pde(&grid, &terms, params, Scheme::CrankNicolson).map_err(|e| e.to_string())?;
    let sd = variance_integral(0.0, 1.0, params, &spec).map_err(|e| e.to_string())?.sqrt();
    let (lo, hi) = (100.0 * (-sd).exp(), 100.0 * sd.exp());
    let mut worst = 0.0_f64;
    for (&z, &theta) in surface.z.iter().zip(surface.at_start()) {
        if z >= lo && z <= hi {
            let exact = theta_closed_form(z, 0.0, &terms, params, &spec).map_err(|e| e.to_string())?;
            worst = worst.max(rel(theta, exact));
        }
    }
    Ok(worst)
}

fn criterion_5() -> Outcome {
    let classical = pde_interior_error(&ModelParams::black_scholes(0.2, 0.05))?;
    let fractional = pde_interior_error(&ModelParams {
        alpha: 0.9,
        hurst: 0.7,
        sigma_v: 0.3,
        sigma_r: 0.1,
        mu_r: 0.02,
        rho: 0.5,
        ..ModelParams::default()
    })?;
    ensure(classical <= 1e-3, format!("classical {classical:.2e}"))?;
    ensure(fractional <= 5e-3, format!("fractional {fractional:.2e}"))?;
    Ok(format!("interior rel error classical {classical:.1e}, (0.9, 0.7) {fractional:.1e}"))
}

fn ratios(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| w[0].abs() / w[1].abs()).collect()
}

fn second_order(r: &[f64]) -> bool {
    r.iter().all(|x| (3.0..=5.0).contains(x))
}

fn criterion_6() -> Outcome {
    let spec = QuadratureSpec::default().with_tolerance(1e-14, 1e-16);
    let fig = ModelParams::default();
    let bond = |variant: F1Variant, point: (f64, f64)| -> Vec<f64> {
        let f = |r: f64, t: f64| bond_price_with(r, t, 1.0, &fig, &spec, variant).unwrap().price;
        ratios(&(0..4).map(|k| {
            let h = 0.05 / 2f64.powi(k);
            residual_bond_pde(f, point, Steps { h_v: h, h_r: h, h_t: h }, &fig)
        }).collect::<Vec<_>>())
    };
    let warrant = |p: ModelParams, terms: WarrantTerms, point: (f64, f64, f64), variant: WarrantVariant| -> Vec<f64> {
        let f = |v: f64, r: f64, t: f64| warrant_price(v, r, t, &terms, &p, &spec, variant).unwrap().price;
        ratios(&(0..4).map(|k| {
            let h = 0.1 / 2f64.powi(k);
            residual_warrant_pde(f, point, Steps { h_v: 0.5 * h * point.0, h_r: h, h_t: h }, &p)
        }).collect::<Vec<_>>())
    };
    let bs = ModelParams::black_scholes(0.2, 0.05);
    let mut shown = Vec::new();
    for point in [(1.0, 0.5), (0.3, 0.25)] {
        let r = bond(F1Variant::Derivation, point);
        ensure(second_order(&r), format!("bond at {point:?}: {r:?}"))?;
        let bad = bond(F1Variant::TheoremStatement, point);
        ensure(!second_order(&bad), format!("theorem-statement f1 converged at {point:?}: {bad:?}"))?;
        shown.extend(r);
    }
    for (p, terms, point) in [
        (bs, call_terms(), (100.0, 0.05, 0.5)),
        (fig, WarrantTerms::default(), (1.5, 1.0, 0.5)),
        (fig, WarrantTerms { warrants: 0.5, ratio: 2.0, ..WarrantTerms::default() }, (0.8, 0.3, 0.25)),
    ] {
        let r = warrant(p, terms, point, WarrantVariant::DerivationConsistent);
        ensure(second_order(&r), format!("warrant at {point:?}: {r:?}"))?;
        let bad = warrant(p, terms, point, WarrantVariant::PaperLiteral);
        ensure(!second_order(&bad), format!("literal warrant converged at {point:?}: {bad:?}"))?;
        shown.extend(r);
    }
    let (lo, hi) = shown.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    Ok(format!("ratios in [{lo:.3}, {hi:.3}]; theorem-statement and literal variants plateau"))
}

fn criterion_7() -> Outcome {
    let bond = mc_bond_classical(1.0, 1.0, 1.0, 1.0, &McConfig {
        n_paths: 100_000,
        n_steps: 100,
        seed: RngSeed::new(2024, 0),
        antithetic: false,
    })
    .map_err(|e| e.to_string())?;
    let bond_target = (-4.0_f64 / 3.0).exp();
    let zb = (bond.mean - bond_target).abs() / bond.std_error;
    ensure(zb <= 3.0, format!("bond {} vs {bond_target}: {zb:.2} se", bond.mean))?;
    let warrant = mc_warrant_classical(100.0, 0.05, &call_terms(), 0.2, &McConfig {
        n_paths: 1_000_000,
        n_steps: 10,
        seed: RngSeed::new(2024, 1000),
        antithetic: true,
    })
    .map_err(|e| e.to_string())?;
    let call = oracles::black_scholes_call(100.0, 100.0, 0.05, 0.2, 1.0);
    let zw = (warrant.mean - call).abs() / warrant.std_error;
    ensure(zw <= 3.0, format!("warrant {} vs {call}: {zw:.2} se", warrant.mean))?;
    Ok(format!("bond {:.5} ({zb:.2} se), warrant {:.4} ({zw:.2} se)", bond.mean, warrant.mean))
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn criterion_8() -> Outcome {
    let p = ModelParams::default();
    for s in 0..1000 {
        let path = simulate_paths(&p, 1.0, 200, RngSeed::new(8, s)).map_err(|e| e.to_string())?;
        ensure(path.t_alpha.windows(2).all(|w| w[1] >= w[0]), format!("path {s} decreases"))?;
    }
    let near = ModelParams { alpha: 1.0 - 1e-6, ..p };
    let path = simulate_paths(&near, 2.0, 200, RngSeed::new(8, 0)).map_err(|e| e.to_string())?;
    for &i in &[50usize, 100, 200] {
        let gap = (path.t_alpha[i] / path.t[i] - 1.0).abs();
        ensure(gap < 0.01, format!("T_alpha({})/t off by {gap}", path.t[i]))?;
    }
    let mut worst_var = 0.0_f64;
    for (j, &h) in [0.5, 0.7, 0.9].iter().enumerate() {
        let sq: Vec<f64> = (0..10_000)
            .map(|s| fbm_path(h, 32, 1.0 / 32.0, RngSeed::new(88, 100_000 * j as u64 + s)).map(|b| b[32] * b[32]))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (mean, se) = mean_and_error(&sq);
        let z = (mean - 1.0).abs() / se;
        ensure(z <= 3.0, format!("Var B^H(1) at H={h}: {mean} ({z:.2} se)"))?;
        worst_var = worst_var.max(z);
    }
    let mut worst_corr = 0.0_f64;
    for (j, &rho) in [-0.5, 0.0, 0.5].iter().enumerate() {
        let ends: Vec<(f64, f64)> = (0..10_000)
            .map(|s| correlated_fbm_pair(0.7, rho, 32, 1.0 / 32.0, RngSeed::new(888, 100_000 * j as u64 + s)).map(|(a, b)| (a[32], b[32])))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let n = ends.len() as f64;
        let ma = ends.iter().map(|e| e.0).sum::<f64>() / n;
        let mb = ends.iter().map(|e| e.1).sum::<f64>() / n;
        let cab: f64 = ends.iter().map(|e| (e.0 - ma) * (e.1 - mb)).sum();
        let caa: f64 = ends.iter().map(|e| (e.0 - ma).powi(2)).sum();
        let cbb: f64 = ends.iter().map(|e| (e.1 - mb).powi(2)).sum();
        let corr = cab / (caa * cbb).sqrt();
        let z = (corr - rho).abs() / ((1.0 - rho * rho) / n.sqrt());
        ensure(z <= 3.0, format!("correlation at rho={rho}: {corr} ({z:.2} se)"))?;
        worst_corr = worst_corr.max(z);
    }
    Ok(format!("monotone clocks, variance within {worst_var:.2} se, correlation within {worst_corr:.2} se"))
}

fn run_cli(args: &[&str], out: &Path) -> Result<String, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_subwarrant"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))?;
    std::fs::read_to_string(out).map_err(|e| e.to_string())
}

fn column(csv: &str, name: &str) -> Result<Vec<f64>, String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().ok_or("empty csv")?.split(',').collect();
    let idx = header.iter().position(|h| *h == name).ok_or(format!("no column {name}"))?;
    lines
        .map(|l| l.split(',').nth(idx).ok_or("short row".to_string())?.parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn criterion_9() -> Outcome {
    let dir = std::env::temp_dir().join(format!("subwarrant-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let sim = run_cli(&["simulate", "--seed", "42", "-T", "1", "-n", "1000"], &dir.join("paths.csv"))?;
    let bonds = run_cli(&["price-bond", "--sweep"], &dir.join("bond.csv"))?;
    let warrants = run_cli(&["price-warrant", "--sweep"], &dir.join("warrant.csv"))?;
    std::fs::remove_dir_all(&dir).map_err(|e| e.to_string())?;

    for (name, text) in [("simulate", &sim), ("bond", &bonds), ("warrant", &warrants)] {
        ensure(text.lines().count() > 1, format!("{name} csv is empty"))?;
    }
    let flat = longest_flat_run(&column(&sim, "asset")?);
    ensure(flat >= 5, format!("longest flat asset run {flat}"))?;
    let maturities = column(&bonds, "T")?;
    let prices = column(&bonds, "price")?;
    let hursts = column(&bonds, "H")?;
    let mut curves = 0;
    for ((m, p), _) in maturities.iter().zip(&prices).zip(&hursts) {
        ensure(p.is_finite() && *p > 0.0, format!("bond price {p} at T={m}"))?;
        if *m == 0.0 {
            ensure(*p == 1.0, format!("P(t=T) = {p}"))?;
            curves += 1;
        }
    }
    ensure(curves == 5, format!("{curves} bond curves"))?;
    let wp = column(&warrants, "price")?;
    ensure(wp.iter().all(|w| w.is_finite() && *w >= 0.0), "warrant prices finite and nonnegative")?;
    Ok(format!("{} path rows (flat run {flat}), {} bond rows, {} warrant rows", sim.lines().count() - 1, prices.len(), wp.len()))
}

fn criterion_10() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut draws = 0;
    let mut worst_gap = 0.0_f64;
    while draws < 1000 {
        let hurst = rng.random_range(0.5..0.95);
        let alpha = rng.random_range(0.55..=1.0);
        if alpha < 1.0 && alpha * (1.0 + hurst) <= 1.0 {
            continue;
        }
        draws += 1;
        let p = ModelParams {
            alpha,
            hurst,
            sigma_v: rng.random_range(0.05..1.0),
            sigma_r: rng.random_range(0.0..0.6),
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
            let w = warrant_price(v, r, t, &terms, &p, &spec, WarrantVariant::DerivationConsistent).map_err(|e| e.to_string())?;
            let cap = terms.ratio * v / (terms.shares + terms.warrants * terms.ratio);
            ensure(w.price >= 0.0 && w.price <= cap * (1.0 + 1e-12), format!("bound broken: {w:?} cap {cap}"))?;
            ensure(w.price >= last - 1e-12 * cap, format!("not monotone at V={v}"))?;
            last = w.price;
            let (d1, d2) = d_values(v, r, t, &terms, &p, &spec).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max((d1 - d2 - w.variance_integral.sqrt()).abs());
        }
    }
    ensure(worst_gap <= 1e-12, format!("d1 - d2 gap {worst_gap:.2e}"))?;
    Ok(format!("{draws} draws, d1 - d2 gap {worst_gap:.1e}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 near-unit alpha, H = 1/2 bond exponent", criterion_1, 1),
        ("2 near-unit alpha fractional bond exponent", criterion_2, 1),
        ("3 ODE vs quadrature bond exponent", criterion_3, 5),
        ("4 Black-Scholes limit", criterion_4, 1),
        ("5 PDE vs closed form", criterion_5, 30),
        ("6 residual refinement", criterion_6, 10),
        ("7 Monte Carlo agreement", criterion_7, 60),
        ("8 process properties", criterion_8, 60),
        ("9 figure reproduction", criterion_9, 10),
        ("10 invariant suite", criterion_10, 10),
    ];
    let mut failed = Vec::new();
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => Err(format!("{detail}; over the {budget} s budget")),
            other => other,
        };
        let line = match &outcome {
            Ok(detail) => format!("PASS  criterion {name}: {detail} [{:.2} s]\n", elapsed.as_secs_f64()),
            Err(detail) => format!("FAIL  criterion {name}: {detail} [{:.2} s]\n", elapsed.as_secs_f64()),
        };
        std::io::stdout().write_all(line.as_bytes()).unwrap();
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
