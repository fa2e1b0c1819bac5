//! TOML sweep configurations.
//!
//! ```toml
//! kind = "delta-ratio"      # delta-ratio | delta-tau | fwhm-delta | lifetime-tau
//! unit = "t2"               # t2 | seconds
//! cycles = 200
//! tau = 5.0
//!
//! [params]
//! t2 = 1.0
//! meq = 0.8
//!
//! [delta]
//! start = -0.5
//! stop = 0.5
//! count = 41
//! scale = "pi"
//!
//! [ratio]
//! start = 1.0
//! stop = 1000.0
//! count = 31
//! spacing = "log"
//! ```
//!
//! An axis may be a bare number or array. A table takes either `values` or
//! `start`/`stop`/`count`.

use serde::{Deserialize, Serialize};

use crate::analysis::SweepSettings;
use crate::error::{Error, Result};
use crate::params::{validate_params, Dephasing, RawParams, SystemParams};
use crate::sequence::TimeUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Crystalline fraction over δ × T1/T2 at fixed τ.
    DeltaRatio,
    /// Crystalline fraction over δ × τ.
    DeltaTau,
    /// Line width over δ at fixed τ, with a power-law fit.
    FwhmDelta,
    /// Lifetime over τ at fixed δ.
    LifetimeTau,
}

impl SweepKind {
    pub fn is_grid(self) -> bool {
        matches!(self, SweepKind::DeltaRatio | SweepKind::DeltaTau)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    None,
    Pi,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisTable {
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    #[serde(default)]
    spacing: Spacing,
    #[serde(default)]
    scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Single(f64),
    List(Vec<f64>),
    Table(AxisTable),
}

impl AxisSpec {
    pub fn resolve(&self, name: &str) -> Result<Vec<f64>> {
        let bad = |msg: &str| Error::InvalidInput(format!("axis `{name}`: {msg}"));
        let (raw, scale) = match self {
            AxisSpec::Single(v) => (vec![*v], Scale::None),
            AxisSpec::List(v) => (v.clone(), Scale::None),
            AxisSpec::Table(t) => {
                let raw = match (&t.values, t.start, t.stop, t.count) {
                    (Some(v), None, None, None) => v.clone(),
                    (None, Some(a), Some(b), Some(n)) => range(a, b, n, t.spacing).map_err(|m| bad(&m))?,
                    _ => return Err(bad("give either `values` or `start`, `stop` and `count`")),
                };
                (raw, t.scale)
            }
        };
        if raw.is_empty() {
            return Err(bad("no values"));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        Ok(match scale {
            Scale::None => raw,
            Scale::Pi => raw.into_iter().map(|v| v * std::f64::consts::PI).collect(),
        })
    }
}

fn range(start: f64, stop: f64, count: usize, spacing: Spacing) -> std::result::Result<Vec<f64>, String> {
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = |i: usize| i as f64 / (count - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..count).map(|i| start + (stop - start) * step(i)).collect()),
        Spacing::Log => {
            if !(start > 0.0 && stop > 0.0) {
                return Err("log spacing needs positive bounds".into());
            }
            let (a, b) = (start.ln(), stop.ln());
            // Pin the endpoints so they are exact rather than exp(ln(x)).
            Ok((0..count)
                .map(|i| match i {
                    0 => start,
                    i if i == count - 1 => stop,
                    i => (a + (b - a) * step(i)).exp(),
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub tphi: Option<f64>,
    pub meq: f64,
    pub omega1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    #[serde(default)]
    pub unit: TimeUnit,
    pub cycles: Option<u64>,
    pub pad: Option<usize>,
    pub window_bins: Option<usize>,
    pub initial_mz_fraction: Option<f64>,
    #[serde(default)]
    pub dissipative_pulse: bool,
    pub params: ParamsConfig,
    pub delta: Option<AxisSpec>,
    pub ratio: Option<AxisSpec>,
    pub tau: Option<AxisSpec>,
}

/// A configuration with defaults filled in and axes expanded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub kind: SweepKind,
    pub unit: TimeUnit,
    pub settings: SweepSettings,
    pub base: SystemParams,
    pub deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<f64>,
    pub taus: Vec<f64>,
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    toml::from_str(text).map_err(|e| Error::InvalidInput(e.to_string().trim_end().to_string()))
}

impl SweepConfig {
    pub fn plan(&self, cycles_override: Option<u64>) -> Result<SweepPlan> {
        let defaults = SweepSettings::default();
        let settings = SweepSettings {
            cycles: cycles_override.or(self.cycles).unwrap_or(defaults.cycles),
            pad: self.pad,
            window_bins: self.window_bins.unwrap_or(defaults.window_bins),
            initial_mz_fraction: self.initial_mz_fraction.unwrap_or(defaults.initial_mz_fraction),
            dissipative_pulse: self.dissipative_pulse,
            jobs: 0,
        };
        let axis = |spec: &Option<AxisSpec>, name: &str| -> Result<Vec<f64>> {
            spec.as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("`{name}` is required for kind {:?}", self.kind)))?
                .resolve(name)
        };
        let single = |spec: &Option<AxisSpec>, name: &str| -> Result<Vec<f64>> {
            let v = axis(spec, name)?;
            if v.len() != 1 {
                return Err(Error::InvalidInput(format!("`{name}` must be a single value for this kind")));
            }
            Ok(v)
        };
        let unused = |spec: &Option<AxisSpec>, name: &str| -> Result<()> {
            match spec {
                Some(_) => Err(Error::InvalidInput(format!("`{name}` is not used by this kind"))),
                None => Ok(()),
            }
        };

        let deltas;
        let mut ratios = Vec::new();
        let taus;
        match self.kind {
            SweepKind::DeltaRatio => {
                deltas = axis(&self.delta, "delta")?;
                ratios = axis(&self.ratio, "ratio")?;
                taus = single(&self.tau, "tau")?;
                if self.params.t1.is_some() || self.params.tphi.is_some() {
                    return Err(Error::InvalidInput("t1 and tphi follow from the ratio axis; give only t2".into()));
                }
            }
            SweepKind::DeltaTau => {
                deltas = axis(&self.delta, "delta")?;
                taus = axis(&self.tau, "tau")?;
                unused(&self.ratio, "ratio")?;
            }
            SweepKind::FwhmDelta => {
                deltas = axis(&self.delta, "delta")?;
                taus = single(&self.tau, "tau")?;
                unused(&self.ratio, "ratio")?;
            }
            SweepKind::LifetimeTau => {
                deltas = single(&self.delta, "delta")?;
                taus = axis(&self.tau, "tau")?;
                unused(&self.ratio, "ratio")?;
            }
        }

        let p = &self.params;
        let t1 = match self.kind {
            SweepKind::DeltaRatio => p.t2.map(|t2| ratios[0] * t2),
            _ => p.t1,
        };
        let base = validate_params(RawParams {
            t1,
            t2: p.t2,
            t_phi: p.tphi.map(Dephasing::from_f64),
            m_eq: p.meq,
            omega1: p.omega1.unwrap_or_else(|| self.unit.default_omega1()),
        })?;
        Ok(SweepPlan { kind: self.kind, unit: self.unit, settings, base, deltas, ratios, taus })
    }
}
