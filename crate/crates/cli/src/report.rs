//! CSV and TOML output.

use std::path::Path;

use serde::Serialize;

use polyent::entropy_lab::{CountRow, EstimationProtocol, KatoReport, LapReport, SlopeFit};
use polyent::hyperspace::TrendRow;

use crate::CliError;

pub const CSV_HEADER: [&str; 5] = ["system", "eps", "n", "sep_greedy", "span_greedy"];

/// Counts table with header `system,eps,n,sep_greedy,span_greedy`; a
/// skipped spanning count is an empty field.
pub fn counts_csv(rows: &[CountRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in rows {
        let span = r.span_greedy.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([r.system.clone(), r.eps.to_string(), r.n.to_string(), r.sep_greedy.to_string(), span])
            .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// File-name stem for a system name: `F2(pl_contract)` becomes
/// `F2_pl_contract_`.
pub fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthEntry {
    pub exponent: f64,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<[f64; 2]>,
    pub satisfied: bool,
    pub fits: Vec<SlopeFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorEntry {
    pub k: usize,
    pub checked: usize,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendEntry {
    /// Always true: finite-`n` estimates are evidence for growth in `k`,
    /// not a computation of the limit.
    pub evidence: bool,
    pub increasing: bool,
    pub min_step: f64,
    pub rows: Vec<TrendRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemEntry {
    pub name: String,
    pub csv: String,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    pub protocol: EstimationProtocol,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kato: Option<KatoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lap: Option<LapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperspace_trend: Option<TrendEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub all_satisfied: bool,
    pub systems: Vec<SystemEntry>,
}

impl RunReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let row = |span| CountRow {
            system: "F2(pl_contract)".into(),
            eps: 0.125,
            n: 4,
            sep_greedy: 9,
            span_greedy: span,
            sample_size: 40,
            mesh: 0.03125,
        };
        let text = String::from_utf8(counts_csv(&[row(Some(5)), row(None)])).unwrap();
        assert_eq!(
            text,
            "system,eps,n,sep_greedy,span_greedy\nF2(pl_contract),0.125,4,9,5\nF2(pl_contract),0.125,4,9,\n"
        );
        assert_eq!(file_stem("prod(rotation(phi),pl_contract)"), "prod_rotation_phi__pl_contract_");
    }
}
