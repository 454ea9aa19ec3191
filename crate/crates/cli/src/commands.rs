use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use subwarrant::bond::{bond_price_with, F1Variant};
use subwarrant::numerics::QuadratureSpec;
use subwarrant::processes::{simulate_paths_with, AssetDynamics, RngSeed};
use subwarrant::validation::{run_suite, SuiteOptions};
use subwarrant::warrant::{warrant_price, WarrantVariant};
use subwarrant::{ModelParams, WarrantTerms};

use crate::args::{SweepOptions, SweepTarget};
use crate::config::RunConfig;
use crate::Failure;

/// Bytes for stdout or `--out`, plus an optional plotting script.
#[derive(Debug, Default)]
pub struct Output {
    pub body: Vec<u8>,
    pub plot: Option<(PathBuf, String)>,
    /// Exit with status 1 after writing (failed validation).
    pub failed: bool,
}

fn numeric(e: subwarrant::Error) -> Failure {
    Failure::Numeric(e.to_string())
}

pub fn bond_variant(name: Option<&str>) -> Result<F1Variant, Failure> {
    match name.map(|s| s.to_ascii_lowercase().replace('_', "-")).as_deref() {
        None | Some("derivation") | Some("derivation-consistent") | Some("default") => Ok(F1Variant::Derivation),
        Some("theorem-statement") | Some("theorem") => Ok(F1Variant::TheoremStatement),
        Some(other) => Err(Failure::Usage(format!("unknown bond variant '{other}'"))),
    }
}

pub fn warrant_variant(name: Option<&str>) -> Result<WarrantVariant, Failure> {
    match name {
        None => Ok(WarrantVariant::default()),
        Some(s) => s.parse().map_err(|e: subwarrant::Error| Failure::Usage(e.to_string())),
    }
}

pub fn simulate(run: &RunConfig, pathwise: bool, plot: Option<&Path>) -> Result<Output, Failure> {
    let steps = run.steps.unwrap_or(1000);
    if steps == 0 {
        return Err(Failure::Usage("-n must be positive".into()));
    }
    let dynamics = if pathwise { AssetDynamics::Pathwise } else { AssetDynamics::WickIto };
    let path = simulate_paths_with(&run.params, run.maturity(), steps, RngSeed::new(run.seed, 0), dynamics)
        .map_err(numeric)?;
    let mut body = Vec::new();
    path.write_csv(&mut body, run.format.delimiter())
        .map_err(|e| Failure::Numeric(e.to_string()))?;
    Ok(Output {
        body,
        plot: plot.map(|p| (p.to_path_buf(), plot_script(run, "t", &["asset", "rate"], None))),
        failed: false,
    })
}

pub fn price_bond(run: &RunConfig) -> Result<Output, Failure> {
    let variant = bond_variant(run.variant.as_deref())?;
    let q = bond_price_with(run.params.r0, run.t, run.maturity(), &run.params, &QuadratureSpec::default(), variant)
        .map_err(numeric)?;
    Ok(Output { body: format!("{:?}\n", q.price).into_bytes(), ..Output::default() })
}

pub fn price_warrant(run: &RunConfig) -> Result<Output, Failure> {
    let variant = warrant_variant(run.variant.as_deref())?;
    let w = warrant_price(run.params.v0, run.params.r0, run.t, &run.terms, &run.params, &QuadratureSpec::default(), variant)
        .map_err(numeric)?;
    Ok(Output { body: format!("{:?}\n", w.price).into_bytes(), ..Output::default() })
}

/// Maturities `t, t + Δ, …, t + T_max` with `points` steps after the boundary.
pub fn sweep_maturities(t: f64, opts: &SweepOptions) -> Result<Vec<f64>, Failure> {
    if opts.points == 0 || !(opts.maturity_max > 0.0) || !opts.maturity_max.is_finite() {
        return Err(Failure::Usage("--points and --T-max must be positive".into()));
    }
    Ok((0..=opts.points)
        .map(|j| t + opts.maturity_max * j as f64 / opts.points as f64)
        .collect())
}

fn sweep_params(run: &RunConfig, opts: &SweepOptions) -> Result<Vec<ModelParams>, Failure> {
    if opts.hurst_values.is_empty() {
        return Err(Failure::Usage("--hurst-values is empty".into()));
    }
    opts.hurst_values
        .iter()
        .map(|&hurst| {
            let p = ModelParams { hurst, ..run.params };
            p.validate().map(|_| p).map_err(|e| Failure::Usage(e.to_string()))
        })
        .collect()
}

pub fn sweep(run: &RunConfig, target: SweepTarget, opts: &SweepOptions) -> Result<Output, Failure> {
    let maturities = sweep_maturities(run.t, opts)?;
    let curves = sweep_params(run, opts)?;
    let d = run.format.delimiter();
    let spec = QuadratureSpec::default();
    let mut text = String::new();
    let plot = match target {
        SweepTarget::Bond => {
            let variant = bond_variant(run.variant.as_deref())?;
            let _ = writeln!(text, "T{d}H{d}alpha{d}price");
            for p in &curves {
                for &m in &maturities {
                    let q = bond_price_with(p.r0, run.t, m, p, &spec, variant).map_err(numeric)?;
                    let _ = writeln!(text, "{m}{d}{}{d}{}{d}{}", p.hurst, p.alpha, q.price);
                }
            }
            opts.plot_script.as_ref().map(|path| (path.clone(), plot_script(run, "T", &["price"], Some("H"))))
        }
        SweepTarget::Warrant => {
            let variant = warrant_variant(run.variant.as_deref())?;
            let _ = writeln!(text, "T{d}H{d}alpha{d}rho{d}price{d}d1{d}d2{d}variant");
            for p in &curves {
                for &m in &maturities {
                    let terms = WarrantTerms { maturity: m, ..run.terms };
                    let w = warrant_price(p.v0, p.r0, run.t, &terms, p, &spec, variant).map_err(numeric)?;
                    let _ = writeln!(
                        text,
                        "{m}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}",
                        p.hurst, p.alpha, p.rho, w.price, w.d1, w.d2, w.variant
                    );
                }
            }
            opts.plot_script.as_ref().map(|path| (path.clone(), plot_script(run, "T", &["price"], Some("H"))))
        }
    };
    Ok(Output { body: text.into_bytes(), plot, failed: false })
}

pub fn validate(quick: bool, variant: Option<&str>, seed: u64) -> Result<Output, Failure> {
    let options = SuiteOptions { quick, residual_variant: warrant_variant(variant)?, seed };
    let report = run_suite(&options).map_err(numeric)?;
    Ok(Output {
        body: format!("{report}\n").into_bytes(),
        plot: None,
        failed: !report.all_passed(),
    })
}

/// A small matplotlib script that plots `ys` against `x` from the output file,
/// one line per distinct value of `group`.
fn plot_script(run: &RunConfig, x: &str, ys: &[&str], group: Option<&str>) -> String {
    let data = run
        .out
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "output.csv".into());
    let delimiter = match run.format.delimiter() {
        '\t' => "\\t",
        _ => ",",
    };
    let ys = ys.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
    let group = group.map(|g| format!("{g:?}")).unwrap_or_else(|| "None".into());
    format!(
        r#"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {data:?}
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh, delimiter="{delimiter}"))

x, ys, group = {x:?}, [{ys}], {group}
fig, axes = plt.subplots(len(ys), 1, sharex=True, squeeze=False)
for ax, y in zip(axes[:, 0], ys):
    curves = defaultdict(list)
    for row in rows:
        curves[row[group] if group else y].append((float(row[x]), float(row[y])))
    for label, points in curves.items():
        xs, vs = zip(*points)
        ax.plot(xs, vs, label=f"{{group}}={{label}}" if group else label, drawstyle="steps-post" if x == "t" else "default")
    ax.set_ylabel(y)
    ax.legend()
axes[-1, 0].set_xlabel(x)
plt.show()
"#
    )
}
