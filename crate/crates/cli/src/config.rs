//! Experiment configuration, read from TOML.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use polyent::catalog;
use polyent::entropy_lab::{pl_system, EstimationProtocol, MetricSystem};
use polyent::phase_space::build_graph;
use polyent::pl_dynamics::{PLMap, Piece};
use polyent::rational::{one, parse_q};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Growth,
    Kato,
    Lap,
    Factor,
    HyperspaceTrend,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Growth => "growth",
            Check::Kato => "kato",
            Check::Lap => "lap",
            Check::Factor => "factor",
            Check::HyperspaceTrend => "hyperspace_trend",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolOverrides {
    pub preset: Option<String>,
    pub eps_exponents: Option<Vec<u32>>,
    pub n_exponents: Option<Vec<u32>>,
    pub mesh_factor: Option<f64>,
    pub window: Option<usize>,
    pub tolerance: Option<f64>,
}

impl ProtocolOverrides {
    /// The preset (default `default`) with every given field replaced.
    pub fn resolve(&self, base: Option<&ProtocolOverrides>) -> Result<EstimationProtocol, CliError> {
        let pick = |f: fn(&ProtocolOverrides) -> bool| if f(self) { Some(self) } else { base };
        let preset = self.preset.as_ref().or(base.and_then(|b| b.preset.as_ref()));
        let mut p = match preset {
            Some(name) => EstimationProtocol::preset(name)
                .ok_or_else(|| CliError::Config(format!("unknown protocol preset {name:?}")))?,
            None => EstimationProtocol::default(),
        };
        if let Some(v) = pick(|o| o.eps_exponents.is_some()).and_then(|o| o.eps_exponents.clone()) {
            p.eps_exponents = v;
        }
        if let Some(v) = pick(|o| o.n_exponents.is_some()).and_then(|o| o.n_exponents.clone()) {
            p.n_exponents = v;
        }
        if let Some(v) = pick(|o| o.mesh_factor.is_some()).and_then(|o| o.mesh_factor) {
            p.mesh_factor = v;
        }
        if let Some(v) = pick(|o| o.window.is_some()).and_then(|o| o.window) {
            p.window = Some(v);
        }
        if let Some(v) = pick(|o| o.tolerance.is_some()).and_then(|o| o.tolerance) {
            p.tolerance = v;
        }
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

/// A PL map on an inline graph. Edges are `[from, to, "p/q"]`; `pieces[e]`
/// lists rows `[t_i, target, a, b]`, each row covering `[t_i, t_{i+1}]` of
/// edge `e` (the last one up to 1) by `t ↦ a·t + b` on edge `target`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMap {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, String)>,
    pub pieces: Vec<Vec<(String, usize, String, String)>>,
}

impl InlineMap {
    pub fn build(&self) -> Result<PLMap, CliError> {
        let cfg = |e: polyent::Error| CliError::Config(e.to_string());
        let names: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        let edges = self
            .edges
            .iter()
            .map(|(u, v, len)| Ok((u.as_str(), v.as_str(), parse_q(len)?)))
            .collect::<polyent::Result<Vec<_>>>()
            .map_err(cfg)?;
        let graph = Arc::new(build_graph(&names, &edges).map_err(cfg)?);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for rows in &self.pieces {
            let mut list = Vec::with_capacity(rows.len());
            for (i, (t, target, a, b)) in rows.iter().enumerate() {
                let end = match rows.get(i + 1) {
                    Some(next) => parse_q(&next.0),
                    None => Ok(one()),
                };
                list.push(Piece { start: parse_q(t).map_err(cfg)?, end: end.map_err(cfg)?, target: *target, a: parse_q(a).map_err(cfg)?, b: parse_q(b).map_err(cfg)? });
            }
            pieces.push(list);
        }
        PLMap::new(graph, pieces).map_err(cfg)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub inline: Option<InlineMap>,
    pub protocol: Option<ProtocolOverrides>,
    /// Accepted exponent range for the growth check.
    pub expect: Option<[f64; 2]>,
}

impl SystemConfig {
    pub fn system(&self) -> Result<Arc<dyn MetricSystem>, CliError> {
        match &self.inline {
            Some(m) => pl_system(self.name.clone(), m.build()?).map_err(CliError::from),
            None => catalog::resolve(&self.name).map_err(CliError::from),
        }
    }

    /// The underlying PL map, for checks that need one.
    pub fn map(&self) -> Result<PLMap, CliError> {
        match &self.inline {
            Some(m) => m.build(),
            None => catalog::resolve_map(&self.name).map_err(CliError::from),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorOptions {
    pub samples: usize,
    pub k: usize,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { samples: 1000, k: 2 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrendOptions {
    pub k_max: usize,
    pub min_step: f64,
    pub protocol: ProtocolOverrides,
}

impl Default for TrendOptions {
    fn default() -> Self {
        TrendOptions {
            k_max: 3,
            min_step: 0.6,
            protocol: ProtocolOverrides { preset: Some("hyperspace_trend".into()), ..Default::default() },
        }
    }
}

fn default_checks() -> Vec<Check> {
    vec![Check::Growth]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub systems: Vec<SystemConfig>,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub protocol: ProtocolOverrides,
    /// `n` for the lap check; defaults to the largest protocol `n`.
    pub lap_n: Option<usize>,
    #[serde(default)]
    pub factor: FactorOptions,
    #[serde(default)]
    pub trend: TrendOptions,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Resolves every system and protocol once, so that a bad config fails
    /// before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.systems.is_empty() {
            return Err(CliError::Config("no systems given".into()));
        }
        self.protocol.resolve(None)?;
        self.trend.protocol.resolve(None)?;
        let mut names = std::collections::BTreeSet::new();
        for s in &self.systems {
            if !names.insert(s.name.as_str()) {
                return Err(CliError::Config(format!("system {} listed twice", s.name)));
            }
            s.system()?;
            if let Some(p) = &s.protocol {
                p.resolve(Some(&self.protocol))?;
            }
            if let Some([lo, hi]) = s.expect {
                if !(lo <= hi) {
                    return Err(CliError::Config(format!("empty expected range for {}", s.name)));
                }
            }
        }
        if self.factor.k == 0 {
            return Err(CliError::Config("factor.k must be positive".into()));
        }
        if self.trend.k_max == 0 || self.trend.k_max > polyent::hyperspace::MAX_SYMMETRIC_POWER {
            return Err(CliError::Config(format!(
                "trend.k_max must lie in 1..={}",
                polyent::hyperspace::MAX_SYMMETRIC_POWER
            )));
        }
        Ok(())
    }

    pub fn protocol_for(&self, s: &SystemConfig) -> Result<EstimationProtocol, CliError> {
        match &s.protocol {
            Some(p) => p.resolve(Some(&self.protocol)),
            None => self.protocol.resolve(None),
        }
    }
}
