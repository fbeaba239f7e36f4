//! JSON dynamics configuration for the swing model.
//!
//! ```json
//! {"delta_t": 0.01, "inertia": 1.0, "damping": {"30": 2.0},
//!  "contingencies": ["37-25", "36-23"], "sigma": 1.0}
//! ```
//!
//! `inertia`, `damping` and `sigma` take either one number for everything or
//! a map keyed by generator bus id (by line id for `sigma`); missing keys use
//! the default.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::LinkId;

pub const DEFAULT_DELTA_T: f64 = 0.01;
pub const DEFAULT_INERTIA: f64 = 1.0;
pub const DEFAULT_DAMPING: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 1.0;

/// One value for all entries or values keyed by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Keyed {
    Uniform(f64),
    ById(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(default = "default_delta_t")]
    pub delta_t: f64,
    #[serde(default)]
    pub inertia: Option<Keyed>,
    #[serde(default)]
    pub damping: Option<Keyed>,
    #[serde(default)]
    pub contingencies: Vec<String>,
    #[serde(default)]
    pub sigma: Option<Keyed>,
}

fn default_delta_t() -> f64 {
    DEFAULT_DELTA_T
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig { delta_t: DEFAULT_DELTA_T, inertia: None, damping: None, contingencies: Vec::new(), sigma: None }
    }
}

impl DynamicsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Default parameters with the given contingency lines.
    pub fn with_contingencies<S: Into<String>>(lines: impl IntoIterator<Item = S>) -> Self {
        DynamicsConfig { contingencies: lines.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn validated_delta_t(&self) -> Result<f64> {
        if self.delta_t > 0.0 && self.delta_t.is_finite() {
            Ok(self.delta_t)
        } else {
            Err(Error::Config(format!("delta_t must be positive, got {}", self.delta_t)))
        }
    }

    /// Inertia per generator bus, in the given order.
    pub fn inertia_for(&self, gen_buses: &[usize]) -> Result<Vec<f64>> {
        per_bus(self.inertia.as_ref(), gen_buses, DEFAULT_INERTIA, "inertia")
    }

    pub fn damping_for(&self, gen_buses: &[usize]) -> Result<Vec<f64>> {
        per_bus(self.damping.as_ref(), gen_buses, DEFAULT_DAMPING, "damping")
    }

    /// Contingency lines as bus pairs, in config order.
    pub fn lines(&self) -> Result<Vec<(usize, usize)>> {
        let lines: Vec<(usize, usize)> = self.contingencies.iter().map(|s| parse_line(s)).collect::<Result<_>>()?;
        for (k, &(i, j)) in lines.iter().enumerate() {
            if lines[..k].iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i)) {
                return Err(Error::Config(format!("contingency {i}-{j} listed twice")));
            }
        }
        Ok(lines)
    }

    /// Standard deviation per contingency line.
    pub fn sigma_for(&self, lines: &[(usize, usize)]) -> Result<Vec<f64>> {
        let ids: Vec<String> = lines.iter().map(|&(i, j)| LinkId::pair(i, j).0).collect();
        let values = match &self.sigma {
            None => vec![DEFAULT_SIGMA; lines.len()],
            Some(Keyed::Uniform(v)) => vec![*v; lines.len()],
            Some(Keyed::ById(map)) => {
                let mut by_line = BTreeMap::new();
                for (key, v) in map {
                    let (i, j) = parse_line(key)?;
                    let pos = lines
                        .iter()
                        .position(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i))
                        .ok_or_else(|| Error::Config(format!("sigma given for {key}, which is not a contingency")))?;
                    by_line.insert(pos, *v);
                }
                (0..lines.len()).map(|k| by_line.get(&k).copied().unwrap_or(DEFAULT_SIGMA)).collect()
            }
        };
        for (id, v) in ids.iter().zip(&values) {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Config(format!("sigma for {id} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(values)
    }
}

fn per_bus(value: Option<&Keyed>, gen_buses: &[usize], default: f64, what: &str) -> Result<Vec<f64>> {
    let values = match value {
        None => vec![default; gen_buses.len()],
        Some(Keyed::Uniform(v)) => vec![*v; gen_buses.len()],
        Some(Keyed::ById(map)) => {
            let mut by_bus = BTreeMap::new();
            for (key, v) in map {
                let bus: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{what} key {key:?} is not a bus id")))?;
                if !gen_buses.contains(&bus) {
                    return Err(Error::Config(format!("{what} given for bus {bus}, which has no generator")));
                }
                by_bus.insert(bus, *v);
            }
            gen_buses.iter().map(|b| by_bus.get(b).copied().unwrap_or(default)).collect()
        }
    };
    for (bus, v) in gen_buses.iter().zip(&values) {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Config(format!("{what} at bus {bus} must be positive, got {v}")));
        }
    }
    Ok(values)
}

/// Parses `"37-25"` (spaces allowed around the dash).
pub fn parse_line(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("contingency {text:?} is not of the form \"from-to\""));
    let (a, b) = text.split_once('-').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == j {
        return Err(bad());
    }
    Ok((i, j))
}
