//! Flat `key = value` configuration (TOML syntax) with command-line overrides.

use std::path::Path;

use serde::Deserialize;

use crate::error::{ExpError, Result};
use crate::scenario::{Scenario, ScenarioKind};

/// Every recognised key; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<ScenarioKind>,
    pub s: Option<usize>,
    pub ell: Option<usize>,
    pub ell1: Option<usize>,
    pub ell2: Option<usize>,
    pub delta: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    #[serde(rename = "N_min")]
    pub n_min: Option<usize>,
    #[serde(rename = "N_max")]
    pub n_max: Option<usize>,
    pub srf_min: Option<f64>,
    pub srf_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub breakdown: Option<f64>,
    pub omega: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
        for kv in overrides {
            let (k, v) = parse_override(kv)?;
            table.insert(k, v);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ExpError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ExpError::Io {
                path: p.to_path_buf(),
                source,
            })?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    /// A single scenario, for the one-instance subcommands.
    pub fn scenario(&self) -> Result<Scenario> {
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| ExpError::Config(format!("missing key {k}")));
        let delta = need(self.delta, "delta")?;
        let n = self.n.ok_or_else(|| ExpError::Config("missing key N".into()))?;
        let seed = self.seed.unwrap_or(0);
        Ok(match self.kind.unwrap_or(ScenarioKind::SingleCluster) {
            ScenarioKind::SingleCluster => {
                let ell = self.ell.unwrap_or(2);
                Scenario::single(self.s.unwrap_or(ell), ell, delta, n, seed)
            }
            ScenarioKind::MultiCluster => {
                let (Some(l1), Some(l2)) = (self.ell1, self.ell2) else {
                    return Err(ExpError::Config("multi_cluster needs ell1 and ell2".into()));
                };
                Scenario::multi(self.s.unwrap_or(l1 + l2), l1, l2, delta, n, seed)
            }
        })
    }
}

/// `key=value`; the value is read as a TOML literal, falling back to a bare string.
fn parse_override(kv: &str) -> Result<(String, toml::Value)> {
    let Some((k, v)) = kv.split_once('=') else {
        return Err(ExpError::Config(format!("override {kv:?} is not key=value")));
    };
    let (k, v) = (k.trim(), v.trim());
    let value = toml::from_str::<toml::Table>(&format!("v = {v}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Sigma,
    Rayleigh,
    Esprit,
}

/// Fully resolved sweep settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kind: ScenarioKind,
    pub s: usize,
    pub ell: usize,
    pub ell1: Option<usize>,
    pub ell2: Option<usize>,
    pub n_min: usize,
    pub n_max: usize,
    pub srf_min: f64,
    pub srf_max: f64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// E_total at or above this marks an ESPRIT trial as broken down.
    pub breakdown: f64,
}

impl SweepConfig {
    pub fn defaults(sweep: SweepKind) -> Self {
        let base = Self {
            kind: ScenarioKind::SingleCluster,
            s: 2,
            ell: 2,
            ell1: None,
            ell2: None,
            n_min: 16,
            n_max: 128,
            srf_min: 10.0,
            srf_max: 1000.0,
            trials: 200,
            seed: 0,
            epsilon: 0.0,
            breakdown: 0.5,
        };
        match sweep {
            SweepKind::Sigma | SweepKind::Rayleigh => base,
            SweepKind::Esprit => Self {
                n_min: 32,
                n_max: 32,
                srf_min: 2.0,
                srf_max: 6.0,
                epsilon: 1e-12,
                ..base
            },
        }
    }

    pub fn resolve(sweep: SweepKind, cfg: &ConfigFile) -> Result<Self> {
        let bad = |m: String| Err(ExpError::Config(m));
        let mut out = Self::defaults(sweep);
        if cfg.delta.is_some() || cfg.omega.is_some() {
            return bad("delta and omega are not sweep keys; delta is drawn from srf_min..srf_max".into());
        }
        if let Some(k) = cfg.kind {
            out.kind = k;
        }
        if let Some(l) = cfg.ell {
            out.ell = l;
        }
        out.ell1 = cfg.ell1;
        out.ell2 = cfg.ell2;
        if out.kind == ScenarioKind::MultiCluster {
            match (cfg.ell1, cfg.ell2) {
                (Some(a), Some(b)) => out.ell = a.max(b),
                _ => return bad("multi_cluster needs ell1 and ell2".into()),
            }
        }
        out.s = cfg.s.unwrap_or(match out.kind {
            ScenarioKind::SingleCluster => out.ell,
            ScenarioKind::MultiCluster => out.ell1.unwrap_or(0) + out.ell2.unwrap_or(0),
        });
        if let Some(n) = cfg.n {
            out.n_min = n;
            out.n_max = n;
        }
        out.n_min = cfg.n_min.unwrap_or(out.n_min);
        out.n_max = cfg.n_max.unwrap_or(out.n_max);
        out.srf_min = cfg.srf_min.unwrap_or(out.srf_min);
        out.srf_max = cfg.srf_max.unwrap_or(out.srf_max);
        out.trials = cfg.trials.unwrap_or(out.trials);
        out.seed = cfg.seed.unwrap_or(out.seed);
        out.epsilon = cfg.epsilon.unwrap_or(out.epsilon);
        out.breakdown = cfg.breakdown.unwrap_or(out.breakdown);

        if sweep != SweepKind::Sigma && (out.kind != ScenarioKind::SingleCluster || out.s != out.ell) {
            return bad("this sweep needs a single cluster with s = ell".into());
        }
        if out.n_min == 0 || out.n_min > out.n_max {
            return bad(format!("need 1 <= N_min <= N_max, got {}..{}", out.n_min, out.n_max));
        }
        if !(out.srf_min > 0.0 && out.srf_min <= out.srf_max && out.srf_max.is_finite()) {
            return bad(format!("need 0 < srf_min <= srf_max, got {}..{}", out.srf_min, out.srf_max));
        }
        if !(out.epsilon >= 0.0 && out.epsilon.is_finite()) {
            return bad(format!("epsilon must be nonnegative, got {}", out.epsilon));
        }
        Ok(out)
    }
}
