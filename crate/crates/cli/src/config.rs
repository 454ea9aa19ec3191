//! Resolution of flags, `key=value` config files and defaults into a
//! validated [`RunConfig`].

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use subwarrant::{ModelParams, WarrantTerms};

use crate::args::{Format, ModelArgs, TermsArgs};
use crate::Failure;

const KEYS: &[&str] = &[
    "alpha", "hurst", "mu-v", "sigma-v", "mu-r", "sigma-r", "rho", "r0", "v0", "T", "t", "seed", "format", "variant",
    "shares-N", "warrants-M", "ratio-k", "strike-X", "steps",
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let key = raw.trim().replace('_', "-");
    let key = match key.as_str() {
        "maturity" => "T",
        "shares" | "N" => "shares-N",
        "warrants" | "M" => "warrants-M",
        "ratio" | "k" => "ratio-k",
        "strike" | "X" => "strike-X",
        other => other,
    };
    KEYS.iter().copied().find(|k| *k == key)
}

/// Parsed `key=value` file. Blank lines and `#` comments are ignored.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<&'static str, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = canonical_key(key)
                .ok_or_else(|| Failure::Usage(format!("config line {}: unknown key '{}'", lineno + 1, key.trim())))?;
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Failure::Usage(format!("config key '{key}': cannot parse '{raw}'"))),
        }
    }
}

/// Everything a command needs, after precedence and validation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub terms: WarrantTerms,
    pub t: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub variant: Option<String>,
    pub steps: Option<usize>,
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T, Failure> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

impl RunConfig {
    pub fn resolve(model: &ModelArgs, terms: Option<&TermsArgs>, steps: Option<usize>) -> Result<Self, Failure> {
        let file = match &model.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let d = ModelParams::default();
        let params = ModelParams {
            alpha: pick(model.alpha, &file, "alpha", d.alpha)?,
            hurst: pick(model.hurst, &file, "hurst", d.hurst)?,
            mu_v: pick(model.mu_v, &file, "mu-v", d.mu_v)?,
            sigma_v: pick(model.sigma_v, &file, "sigma-v", d.sigma_v)?,
            mu_r: pick(model.mu_r, &file, "mu-r", d.mu_r)?,
            sigma_r: pick(model.sigma_r, &file, "sigma-r", d.sigma_r)?,
            rho: pick(model.rho, &file, "rho", d.rho)?,
            r0: pick(model.r0, &file, "r0", d.r0)?,
            v0: pick(model.v0, &file, "v0", d.v0)?,
        };
        let dt = WarrantTerms::default();
        let empty = TermsArgs::default();
        let ta = terms.unwrap_or(&empty);
        let terms = WarrantTerms {
            shares: pick(ta.shares, &file, "shares-N", dt.shares)?,
            warrants: pick(ta.warrants, &file, "warrants-M", dt.warrants)?,
            ratio: pick(ta.ratio, &file, "ratio-k", dt.ratio)?,
            strike: pick(ta.strike, &file, "strike-X", dt.strike)?,
            maturity: pick(model.maturity, &file, "T", dt.maturity)?,
        };
        let format = match model.format {
            Some(f) => f,
            None => match file.values.get("format").map(|s| s.to_ascii_lowercase()) {
                None => Format::Csv,
                Some(s) if s == "csv" => Format::Csv,
                Some(s) if s == "tsv" => Format::Tsv,
                Some(s) => return Err(Failure::Usage(format!("unknown format '{s}'"))),
            },
        };
        let config = Self {
            params,
            terms,
            t: pick(model.t, &file, "t", 0.0)?,
            seed: pick(model.seed, &file, "seed", 42)?,
            out: model.out.clone(),
            format,
            variant: model.variant.clone().or_else(|| file.values.get("variant").cloned()),
            steps: match steps {
                Some(n) => Some(n),
                None => file.get("steps")?,
            },
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        self.params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        self.terms.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Failure::Usage(format!("valuation time --t {} must be nonnegative", self.t)));
        }
        if self.terms.maturity < self.t {
            return Err(Failure::Usage(format!("maturity -T {} precedes valuation time --t {}", self.terms.maturity, self.t)));
        }
        Ok(())
    }

    pub fn maturity(&self) -> f64 {
        self.terms.maturity
    }
}
