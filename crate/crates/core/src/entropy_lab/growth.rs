use serde::Serialize;

use crate::error::{Error, Result};
use crate::pl_dynamics::{homeo_certificate, lap_number_capped, phi_capped, PLMap, DEFAULT_PIECE_CAP};

use super::system::{MetricSystem, NetOptions};

/// Finite stand-in for the double limit `ε → 0`, `n → ∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationProtocol {
    /// `ε = 2^{-k}` for each `k`.
    pub eps_exponents: Vec<u32>,
    /// `n = 2^j` for each `j`, ascending.
    pub n_exponents: Vec<u32>,
    /// Net spacing as a fraction of `ε`.
    pub mesh_factor: f64,
    /// Number of largest `n` values in each regression (default: upper half).
    pub window: Option<usize>,
    pub tolerance: f64,
    #[serde(skip)]
    pub net: NetOptions,
}

impl Default for EstimationProtocol {
    fn default() -> Self {
        EstimationProtocol {
            eps_exponents: (3..=7).collect(),
            n_exponents: (0..=12).collect(),
            mesh_factor: 0.25,
            window: None,
            tolerance: 0.15,
            net: NetOptions::default(),
        }
    }
}

impl EstimationProtocol {
    pub fn with_ranges(eps: impl IntoIterator<Item = u32>, n: impl IntoIterator<Item = u32>) -> Self {
        EstimationProtocol {
            eps_exponents: eps.into_iter().collect(),
            n_exponents: n.into_iter().collect(),
            ..Default::default()
        }
    }

    /// `ε = 2^{-3}..2^{-6}`, `n = 2^0..2^9`.
    pub fn wandering() -> Self {
        Self::with_ranges(3..=6, 0..=9)
    }

    /// `ε = 2^{-3}..2^{-5}`, `n = 2^0..2^8`.
    pub fn product() -> Self {
        Self::with_ranges(3..=5, 0..=8)
    }

    /// `ε = 1/2`, `n = 2^0..2^8`.
    pub fn hyperspace() -> Self {
        Self::with_ranges([1], 0..=8)
    }

    /// `ε = 1/4`, `n = 2^0..2^6`, four-point window, 9M-state budget.
    pub fn hyperspace_trend() -> Self {
        let mut p = Self::with_ranges([2], 0..=6);
        p.window = Some(4);
        p.net.state_budget = 9_000_000;
        p
    }

    /// A named preset: `default`, `wandering`, `product`, `hyperspace` or
    /// `hyperspace_trend`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "wandering" => Some(Self::wandering()),
            "product" => Some(Self::product()),
            "hyperspace" => Some(Self::hyperspace()),
            "hyperspace_trend" => Some(Self::hyperspace_trend()),
            _ => None,
        }
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.eps_exponents.iter().map(|&k| 0.5f64.powi(k as i32)).collect()
    }

    pub fn n_values(&self) -> Vec<usize> {
        self.n_exponents.iter().map(|&j| 1usize << j).collect()
    }

    pub fn window_len(&self) -> usize {
        self.window.unwrap_or_else(|| self.n_exponents.len().div_ceil(2).max(4))
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_exponents.is_empty() || self.n_exponents.is_empty() {
            return Err(Error::Protocol("ε and n lists must be nonempty".into()));
        }
        if !(self.mesh_factor > 0.0 && self.mesh_factor <= 0.5) {
            return Err(Error::Protocol(format!("mesh factor {} must lie in (0, 1/2]", self.mesh_factor)));
        }
        if self.n_exponents.windows(2).any(|w| w[0] >= w[1]) || self.n_exponents.iter().any(|&j| j > 24) {
            return Err(Error::Protocol("n exponents must be strictly increasing and at most 24".into()));
        }
        if self.eps_exponents.iter().any(|&k| k > 30) {
            return Err(Error::Protocol("ε exponents must be at most 30".into()));
        }
        let w = self.window_len();
        if w < 4 || w > self.n_exponents.len() {
            return Err(Error::Protocol(format!(
                "regression window {w} needs at least 4 of the {} n values",
                self.n_exponents.len()
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Protocol("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub system: String,
    pub eps: f64,
    pub n: usize,
    pub sep_greedy: usize,
    pub span_greedy: Option<usize>,
    pub sample_size: usize,
    pub mesh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub eps: f64,
    pub slope: f64,
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub system: String,
    pub fits: Vec<SlopeFit>,
    pub exponent: f64,
    pub flags: Vec<String>,
    pub rows: Vec<CountRow>,
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (ss / m).sqrt())
}

/// Slope of `log count` against `log n` over the last `window` entries.
pub fn regress(ns: &[usize], counts: &[usize], window: usize, eps: f64) -> SlopeFit {
    let start = ns.len().saturating_sub(window);
    let (ns, counts) = (&ns[start..], &counts[start..]);
    if counts.iter().all(|&c| c == counts[0]) {
        return SlopeFit { eps, slope: 0.0, residual: 0.0, degenerate: true };
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let (slope, residual) = fit_line(&x, &y);
    SlopeFit { eps, slope, residual, degenerate: false }
}

/// Greedy counts on the protocol grid and the resulting exponent estimate:
/// the largest window slope among the two smallest `ε`.
pub fn growth_exponent(s: &dyn MetricSystem, p: &EstimationProtocol) -> Result<GrowthReport> {
    p.validate()?;
    let system = s.descriptor();
    let eps_list = p.eps_values();
    let ns = p.n_values();
    let mut rows = Vec::new();
    let mut flags: Vec<String> = Vec::new();
    for &n in &ns {
        for &eps in &eps_list {
            let prep = s.prepare(n, eps, eps * p.mesh_factor, &p.net)?;
            for f in prep.flags() {
                if !flags.contains(&f) {
                    flags.push(f);
                }
            }
            rows.push(CountRow {
                system: system.clone(),
                eps,
                n,
                sep_greedy: prep.greedy_separated(),
                span_greedy: prep.greedy_spanning(),
                sample_size: prep.len(),
                mesh: prep.mesh(),
            });
        }
    }
    let w = p.window_len();
    let fits: Vec<SlopeFit> = eps_list
        .iter()
        .enumerate()
        .map(|(ei, &eps)| {
            let counts: Vec<usize> = (0..ns.len()).map(|ni| rows[ni * eps_list.len() + ei].sep_greedy).collect();
            regress(&ns, &counts, w, eps)
        })
        .collect();
    let mut by_eps: Vec<&SlopeFit> = fits.iter().collect();
    by_eps.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let exponent = by_eps.iter().take(2).map(|f| f.slope).fold(f64::NEG_INFINITY, f64::max);
    if fits.iter().any(|f| f.degenerate) {
        flags.push("degenerate_regression".into());
    }
    Ok(GrowthReport { system, fits, exponent, flags, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatoReport {
    pub exponent_estimate: Option<f64>,
    pub phi_slope: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// How `φ` was obtained: `certificate` (homeomorphism) or `exact`.
    pub phi_source: String,
}

/// Checks `h_pol(f) ≤ 1 + limsup log φ(f, n) / log n` on the protocol
/// window. `estimate` supplies a precomputed exponent; otherwise one is
/// computed when the bound is finite.
pub fn kato_bound_check(
    s: &dyn MetricSystem,
    p: &EstimationProtocol,
    estimate: Option<f64>,
) -> Result<KatoReport> {
    let f = s
        .pl_map()
        .ok_or_else(|| Error::Unsupported("the φ bound needs a PL graph system".into()))?;
    p.validate()?;
    let (phi_slope, source) = if homeo_certificate(f).is_ok() {
        (0.0, "certificate")
    } else {
        let ns = p.n_values();
        let window = &ns[ns.len() - p.window_len()..];
        let mut best: f64 = 0.0;
        for &n in window.iter().filter(|&&n| n >= 2) {
            match phi_capped(f, n, DEFAULT_PIECE_CAP) {
                Ok(v) => best = best.max((v as f64).ln() / (n as f64).ln()),
                Err(e) if e.is_resource() => {
                    best = f64::INFINITY;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        (best, "exact")
    };
    let bound = 1.0 + phi_slope;
    if bound.is_infinite() {
        return Ok(KatoReport {
            exponent_estimate: estimate,
            phi_slope,
            bound,
            satisfied: true,
            phi_source: source.into(),
        });
    }
    let est = match estimate {
        Some(e) => e,
        None => growth_exponent(s, p)?.exponent,
    };
    Ok(KatoReport {
        exponent_estimate: Some(est),
        phi_slope,
        bound,
        satisfied: est <= bound + p.tolerance,
        phi_source: source.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LapReport {
    pub n: usize,
    pub laps: Option<u64>,
    pub bound: f64,
    pub exponent_estimate: Option<f64>,
    pub satisfied: bool,
}

/// Compares the estimate with `1 + log c_n / log n` at the given `n`.
pub fn lap_bound_check(f: &PLMap, n: usize, estimate: Option<f64>, tolerance: f64) -> Result<LapReport> {
    if f.graph().edge_count() != 1 {
        return Err(Error::Unsupported("lap numbers need an interval domain".into()));
    }
    if n < 2 {
        return Err(Error::Protocol("the lap bound needs n >= 2".into()));
    }
    let laps = if homeo_certificate(f).is_ok() {
        Some(1)
    } else {
        match lap_number_capped(f, n, DEFAULT_PIECE_CAP) {
            Ok(c) => Some(c),
            Err(e) if e.is_resource() => None,
            Err(e) => return Err(e),
        }
    };
    let bound = match laps {
        Some(c) => 1.0 + (c as f64).ln() / (n as f64).ln(),
        None => f64::INFINITY,
    };
    let satisfied = estimate.map_or(true, |e| e <= bound + tolerance);
    Ok(LapReport { n, laps, bound, exponent_estimate: estimate, satisfied })
}
