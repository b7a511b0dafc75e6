//! Plain-text `key = value` run configuration with manifest round-tripping.
//!
//! A configuration file fully describes one sweep: the scheme and its
//! geometry, power split, detection coefficient, channel gains, stopping
//! rule, seed, and the SNR grid. Manifests emitted next to result files use
//! the same format, so any run can be reproduced by feeding its manifest
//! back in. Keys are case-insensitive; `#` starts a comment.

use std::fmt::Write as _;

use noma_ie::metrics::PowerPolicy;
use noma_ie::phy::{feasible_beta, PowerAllocation};
use noma_ie::sim::{BetaPolicy, ScenarioConfig, SicMode, SimScheme};
use noma_ie::Error;

/// Scheme selector as written in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKey {
    NomaIe,
    OfdmNoma,
    ImNoma,
    OfdmAsk,
}

impl SchemeKey {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKey::NomaIe => "noma-ie",
            SchemeKey::OfdmNoma => "ofdm-noma",
            SchemeKey::ImNoma => "im-noma",
            SchemeKey::OfdmAsk => "ofdm-ask",
        }
    }
}

/// A validated sweep description: one scenario plus its SNR grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKey,
    pub l: usize,
    pub k_f: usize,
    pub k_n: usize,
    pub delta_m_n: u32,
    pub a_f: f64,
    pub p_max: f64,
    pub beta: BetaPolicy,
    pub omega_f_db: f64,
    pub omega_n_db: f64,
    pub policy: PowerPolicy,
    pub sic: SicMode,
    pub seed: u64,
    pub snr_db: Vec<f64>,
    pub target_errors: u64,
    pub max_bits: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKey::NomaIe,
            l: 4,
            k_f: 3,
            k_n: 2,
            delta_m_n: 0,
            a_f: 0.75,
            p_max: 1.0,
            beta: BetaPolicy::Feasible,
            omega_f_db: -6.0,
            omega_n_db: 0.0,
            policy: PowerPolicy::MaxPower,
            sic: SicMode::Envelope,
            seed: 1,
            snr_db: (0..=10).map(|i| 5.0 * i as f64).collect(),
            target_errors: 400,
            max_bits: 100_000_000,
        }
    }
}

impl RunConfig {
    /// The scenario this sweep runs (geometry keys are meaningful only for
    /// the schemes that use them).
    pub fn scenario(&self) -> ScenarioConfig {
        let scheme = match self.scheme {
            SchemeKey::NomaIe => SimScheme::NomaIe {
                l: self.l,
                k_f: self.k_f,
                k_n: self.k_n,
                delta_m_n: self.delta_m_n,
            },
            SchemeKey::OfdmNoma => SimScheme::OfdmNoma { l: self.l },
            SchemeKey::ImNoma => SimScheme::ImNoma,
            SchemeKey::OfdmAsk => SimScheme::OfdmAsk,
        };
        ScenarioConfig {
            scheme,
            a_f: self.a_f,
            p_max: self.p_max,
            beta: self.beta,
            omega_f_db: self.omega_f_db,
            omega_n_db: self.omega_n_db,
            policy: self.policy,
            sic: self.sic,
            seed: self.seed,
            target_errors: self.target_errors,
            max_bits: self.max_bits,
        }
    }

    /// The numeric detection coefficient this configuration resolves to.
    pub fn resolved_beta(&self) -> Result<f64, Error> {
        match self.beta {
            BetaPolicy::Fixed(v) => Ok(v),
            BetaPolicy::Feasible => {
                let alloc = PowerAllocation::with_p_max(self.a_f, self.p_max)?;
                Ok(feasible_beta(&alloc))
            }
        }
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v}")
}

/// Renders a configuration as a manifest that parses back to an identical
/// `RunConfig`. Extra context can be attached as comment lines.
pub fn render_manifest(cfg: &RunConfig, comments: &[&str]) -> String {
    let mut out = String::new();
    for line in comments {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "scheme = {}", cfg.scheme.label());
    let _ = writeln!(out, "l = {}", cfg.l);
    let _ = writeln!(out, "k_f = {}", cfg.k_f);
    let _ = writeln!(out, "k_n = {}", cfg.k_n);
    let _ = writeln!(out, "delta_m_n = {}", cfg.delta_m_n);
    let _ = writeln!(out, "a_f = {}", fmt_float(cfg.a_f));
    let _ = writeln!(out, "p_max = {}", fmt_float(cfg.p_max));
    match cfg.beta {
        BetaPolicy::Feasible => {
            let _ = writeln!(out, "beta_e = feasible");
        }
        BetaPolicy::Fixed(v) => {
            let _ = writeln!(out, "beta_e = {}", fmt_float(v));
        }
    }
    let _ = writeln!(out, "omega_f_db = {}", fmt_float(cfg.omega_f_db));
    let _ = writeln!(out, "omega_n_db = {}", fmt_float(cfg.omega_n_db));
    let _ = writeln!(
        out,
        "policy = {}",
        match cfg.policy {
            PowerPolicy::MaxPower => "max-power",
            PowerPolicy::Reallocation => "reallocation",
        }
    );
    let _ = writeln!(
        out,
        "sic = {}",
        match cfg.sic {
            SicMode::Envelope => "envelope",
            SicMode::Genie => "genie",
        }
    );
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let snrs: Vec<String> = cfg.snr_db.iter().map(|v| fmt_float(*v)).collect();
    let _ = writeln!(out, "snr_db = {}", snrs.join(","));
    let _ = writeln!(out, "target_errors = {}", cfg.target_errors);
    let _ = writeln!(out, "max_bits = {}", cfg.max_bits);
    out
}

/// Splits configuration text into `(key, value)` pairs, lowercasing keys.
/// Only syntax is checked here; semantics happen in [`build_config`].
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{}`",
                idx + 1,
                line
            )));
        };
        pairs.push((
            key.trim().to_ascii_lowercase(),
            value.trim().to_string(),
        ));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{value}`")))
}

/// Accepts plain integers and scientific notation such as `1e8`.
fn parse_count(key: &str, value: &str) -> Result<u64, Error> {
    if let Ok(v) = value.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = parse_num(key, value)?;
    if v.is_finite() && v >= 0.0 && v <= 9.0e18 && v.fract() == 0.0 {
        Ok(v as u64)
    } else {
        Err(Error::Config(format!(
            "key `{key}`: `{value}` is not a non-negative integer"
        )))
    }
}

/// Accepts `a,b,c` lists and `start:step:stop` inclusive ranges.
fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parse_num(key, parts[0].trim())?;
        let step: f64 = parse_num(key, parts[1].trim())?;
        let stop: f64 = parse_num(key, parts[2].trim())?;
        if !(step > 0.0 && stop >= start) {
            return Err(Error::Config(format!(
                "key `{key}`: range needs a positive step and stop >= start"
            )));
        }
        let n = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
        return Ok((0..n).map(|i| start + step * i as f64).collect());
    }
    let grid: Result<Vec<f64>, Error> = value
        .split(',')
        .map(|p| parse_num::<f64>(key, p.trim()))
        .collect();
    let grid = grid?;
    if grid.is_empty() {
        return Err(Error::Config(format!("key `{key}`: empty grid")));
    }
    Ok(grid)
}

/// Applies `(key, value)` pairs over the defaults and validates the result.
/// Later pairs override earlier ones, which is how command-line flags take
/// precedence over file entries.
pub fn build_config(
    pairs: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    for (key, value) in pairs {
        let v = value.as_str();
        match key.as_str() {
            "scheme" => {
                cfg.scheme = match v {
                    "noma-ie" => SchemeKey::NomaIe,
                    "ofdm-noma" => SchemeKey::OfdmNoma,
                    "im-noma" => SchemeKey::ImNoma,
                    "ofdm-ask" => SchemeKey::OfdmAsk,
                    other => {
                        return Err(Error::Config(format!(
                            "key `scheme`: unknown scheme `{other}` (expected noma-ie, \
                             ofdm-noma, im-noma, or ofdm-ask)"
                        )))
                    }
                }
            }
            "l" => cfg.l = parse_num(&key, v)?,
            "k_f" => cfg.k_f = parse_num(&key, v)?,
            "k_n" => cfg.k_n = parse_num(&key, v)?,
            "delta_m_n" => cfg.delta_m_n = parse_num(&key, v)?,
            "a_f" => cfg.a_f = parse_num(&key, v)?,
            "p_max" => cfg.p_max = parse_num(&key, v)?,
            "beta_e" => {
                cfg.beta = if v.eq_ignore_ascii_case("feasible") {
                    BetaPolicy::Feasible
                } else {
                    BetaPolicy::Fixed(parse_num(&key, v)?)
                }
            }
            "omega_f_db" => cfg.omega_f_db = parse_num(&key, v)?,
            "omega_n_db" => cfg.omega_n_db = parse_num(&key, v)?,
            "policy" => {
                cfg.policy = match v {
                    "max-power" => PowerPolicy::MaxPower,
                    "reallocation" => PowerPolicy::Reallocation,
                    other => {
                        return Err(Error::Config(format!(
                            "key `policy`: unknown policy `{other}` (expected max-power or \
                             reallocation)"
                        )))
                    }
                }
            }
            "sic" => {
                cfg.sic = match v {
                    "envelope" => SicMode::Envelope,
                    "genie" => SicMode::Genie,
                    other => {
                        return Err(Error::Config(format!(
                            "key `sic`: unknown mode `{other}` (expected envelope or genie)"
                        )))
                    }
                }
            }
            "seed" => cfg.seed = parse_num(&key, v)?,
            "snr_db" => cfg.snr_db = parse_grid(&key, v)?,
            "target_errors" => cfg.target_errors = parse_count(&key, v)?,
            "max_bits" => cfg.max_bits = parse_count(&key, v)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key `{other}`"
                )))
            }
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Parses complete configuration text (defaults filled, validated).
pub fn parse_config(text: &str) -> Result<RunConfig, Error> {
    build_config(parse_pairs(text)?)
}

fn validate(cfg: &RunConfig) -> Result<(), Error> {
    if !(cfg.a_f > 0.5 && cfg.a_f < 1.0) {
        return Err(Error::Config(format!(
            "key `a_f`: a_F must exceed a_N, so a_F must lie in (0.5, 1); got {}",
            cfg.a_f
        )));
    }
    if !(cfg.p_max > 0.0 && cfg.p_max.is_finite()) {
        return Err(Error::Config(format!(
            "key `p_max`: need a positive total power, got {}",
            cfg.p_max
        )));
    }
    if let BetaPolicy::Fixed(v) = cfg.beta {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!(
                "key `beta_e`: need a positive coefficient or `feasible`, got {v}"
            )));
        }
    }
    if cfg.snr_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("key `snr_db`: grid values must be finite".into()));
    }
    if cfg.target_errors == 0 {
        return Err(Error::Config("key `target_errors`: must be positive".into()));
    }
    if cfg.max_bits == 0 {
        return Err(Error::Config("key `max_bits`: must be positive".into()));
    }
    Ok(())
}
