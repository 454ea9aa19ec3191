//! Browser bindings for the interactive demo page in `www/`.
//!
//! Each export returns a flat `Float64Array`; the page slices it into
//! columns. The plain functions below the exports carry the logic and are
//! what the native tests exercise.

use wasm_bindgen::prelude::*;

use subwarrant::bond::bond_price;
use subwarrant::numerics::QuadratureSpec;
use subwarrant::processes::{simulate_paths, RngSeed};
use subwarrant::warrant::{warrant_price, WarrantVariant};
use subwarrant::{ModelParams, WarrantTerms};

fn to_js(e: subwarrant::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[t…, T_α…, asset…, rate…]`, each block `steps + 1` long.
#[wasm_bindgen(js_name = simulatePaths)]
pub fn simulate_paths_js(alpha: f64, hurst: f64, sigma_v: f64, sigma_r: f64, rho: f64, seed: u64, steps: usize) -> Result<Vec<f64>, JsError> {
    path_columns(&model(alpha, hurst, sigma_v, sigma_r, rho), seed, steps).map_err(to_js)
}

/// Bond prices at `points + 1` maturities in `[0, t_max]` for each Hurst
/// exponent, concatenated curve by curve.
#[wasm_bindgen(js_name = bondCurves)]
pub fn bond_curves_js(alpha: f64, sigma_r: f64, mu_r: f64, r0: f64, hursts: Vec<f64>, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let base = ModelParams { alpha, sigma_r, mu_r, r0, ..ModelParams::default() };
    bond_curves(&base, &hursts, t_max, points).map_err(to_js)
}

/// Warrant values against maturity for each correlation, concatenated.
#[wasm_bindgen(js_name = warrantCurves)]
#[allow(clippy::too_many_arguments)]
pub fn warrant_curves_js(
    alpha: f64,
    hurst: f64,
    sigma_v: f64,
    sigma_r: f64,
    dilution: f64,
    rhos: Vec<f64>,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let base = model(alpha, hurst, sigma_v, sigma_r, 0.0);
    let terms = WarrantTerms { warrants: dilution, ..WarrantTerms::default() };
    warrant_curves(&base, &terms, &rhos, t_max, points).map_err(to_js)
}

fn model(alpha: f64, hurst: f64, sigma_v: f64, sigma_r: f64, rho: f64) -> ModelParams {
    ModelParams { alpha, hurst, sigma_v, sigma_r, rho, ..ModelParams::default() }
}

fn maturities(t_max: f64, points: usize) -> subwarrant::Result<Vec<f64>> {
    if points == 0 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(subwarrant::Error::Domain("need points > 0 and a positive horizon".into()));
    }
    Ok((0..=points).map(|j| t_max * j as f64 / points as f64).collect())
}

pub fn path_columns(params: &ModelParams, seed: u64, steps: usize) -> subwarrant::Result<Vec<f64>> {
    let path = simulate_paths(params, 1.0, steps, RngSeed::new(seed, 0))?;
    let mut out = Vec::with_capacity(4 * path.len());
    for column in [&path.t, &path.t_alpha, &path.asset, &path.rate] {
        out.extend_from_slice(column);
    }
    Ok(out)
}

pub fn bond_curves(base: &ModelParams, hursts: &[f64], t_max: f64, points: usize) -> subwarrant::Result<Vec<f64>> {
    let spec = QuadratureSpec::default();
    let grid = maturities(t_max, points)?;
    let mut out = Vec::with_capacity(hursts.len() * grid.len());
    for &hurst in hursts {
        let p = ModelParams { hurst, ..*base };
        for &m in &grid {
            out.push(bond_price(p.r0, 0.0, m, &p, &spec)?.price);
        }
    }
    Ok(out)
}

pub fn warrant_curves(base: &ModelParams, terms: &WarrantTerms, rhos: &[f64], t_max: f64, points: usize) -> subwarrant::Result<Vec<f64>> {
    let spec = QuadratureSpec::default();
    let grid = maturities(t_max, points)?;
    let mut out = Vec::with_capacity(rhos.len() * grid.len());
    for &rho in rhos {
        let p = ModelParams { rho, ..*base };
        for &m in &grid {
            let t = WarrantTerms { maturity: m, ..*terms };
            out.push(warrant_price(p.v0, p.r0, 0.0, &t, &p, &spec, WarrantVariant::DerivationConsistent)?.price);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_columns_have_equal_length() {
        let cols = path_columns(&ModelParams::default(), 1, 100).unwrap();
        assert_eq!(cols.len(), 4 * 101);
        assert_eq!(cols[0], 0.0);
        assert_eq!(cols[100], 1.0);
        assert_eq!(cols[101], 0.0);
    }

    #[test]
    fn bond_curves_start_at_par() {
        let curves = bond_curves(&ModelParams::default(), &[0.5, 0.7, 0.9], 2.0, 20).unwrap();
        assert_eq!(curves.len(), 63);
        for c in curves.chunks(21) {
            assert_eq!(c[0], 1.0);
            assert!(c.iter().all(|p| p.is_finite() && *p > 0.0));
        }
    }

    #[test]
    fn warrant_curves_are_bounded() {
        let terms = WarrantTerms::default();
        let curves = warrant_curves(&ModelParams::default(), &terms, &[-0.5, 0.0, 0.5], 2.0, 10).unwrap();
        assert_eq!(curves.len(), 33);
        let cap = terms.ratio * ModelParams::default().v0 * terms.dilution_factor();
        assert!(curves.iter().all(|w| (0.0..=cap).contains(w)));
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(bond_curves(&ModelParams::default(), &[1.2], 1.0, 5).is_err());
        assert!(maturities(0.0, 5).is_err());
        assert!(path_columns(&ModelParams { alpha: 0.3, ..ModelParams::default() }, 0, 10).is_err());
    }
}
