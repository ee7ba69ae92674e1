//! All-pairs screening over a dataset: ingestion, missing-data policy,
//! two-stage contingency-table pipeline, per-pair ensemble pipeline, and
//! result persistence.

mod csv_io;
mod engine;
mod persist;

pub use csv_io::{load_csv, write_csv, CsvOptions};
pub use engine::{
    fit_marginal_traces, screen, screen_ctbf, screen_mi, screen_mixmod, MarginalTrace,
};
pub use persist::{load_results, persist_results, OutputFormat};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ctbf::CtbfConfig;
use crate::dpm::{defaults, DpmConfig, McmcSettings};
use crate::mi::MiConfig;
use crate::mixmod::EnsembleConfig;
use crate::{Error, Result};

/// n×p numeric matrix with a missing mask, variable names, and row ids.
#[derive(Clone, Debug)]
pub struct Dataset {
    names: Vec<String>,
    row_ids: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.row_ids == other.row_ids
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &present)| !present || a == b)
    }
}

impl Dataset {
    /// Builds from rows of optional values; `None` marks missing entries.
    pub fn from_rows(
        names: Vec<String>,
        row_ids: Vec<String>,
        rows: &[Vec<Option<f64>>],
    ) -> Result<Dataset> {
        let p = names.len();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(Error::invalid(format!("duplicate variable name: {name}")));
            }
        }
        if rows.len() != row_ids.len() {
            return Err(Error::invalid("row ids must match row count"));
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        let mut mask = Vec::with_capacity(rows.len() * p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::invalid(format!(
                    "row {r} has {} entries, expected {p}",
                    row.len()
                )));
            }
            for cell in row {
                match cell {
                    Some(v) if v.is_finite() => {
                        values.push(*v);
                        mask.push(true);
                    }
                    Some(v) => {
                        return Err(Error::invalid(format!(
                            "non-finite value {v} in row {r}"
                        )));
                    }
                    None => {
                        values.push(f64::NAN);
                        mask.push(false);
                    }
                }
            }
        }
        Ok(Dataset { names, row_ids, values, mask })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn is_present(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.names.len() + col]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if self.is_present(row, col) {
            Some(self.values[row * self.names.len() + col])
        } else {
            None
        }
    }

    /// Indices of rows where the variable is present, sorted by row id so
    /// results are invariant to the physical row order of the input.
    pub fn column_rows(&self, col: usize) -> Vec<usize> {
        let mut rows: Vec<usize> =
            (0..self.n_rows()).filter(|&r| self.is_present(r, col)).collect();
        rows.sort_by(|&a, &b| {
            self.row_ids[a].cmp(&self.row_ids[b]).then(a.cmp(&b))
        });
        rows
    }

    pub fn values_at(&self, col: usize, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| self.values[r * self.names.len() + col]).collect()
    }
}

/// Dependence measures a screening plan can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ctbf,
    Mixmod,
    Mi,
    ChiSq,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ctbf => "ctbf",
            Method::Mixmod => "mixmod",
            Method::Mi => "mi",
            Method::ChiSq => "chisq",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "ctbf" => Ok(Method::Ctbf),
            "mixmod" => Ok(Method::Mixmod),
            "mi" => Ok(Method::Mi),
            "chisq" => Ok(Method::ChiSq),
            other => Err(Error::invalid(format!("unknown method: {other}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a screen run needs: method set, thresholds, priors, MCMC
/// schedule, worker count, and the master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenPlan {
    pub methods: BTreeSet<Method>,
    pub min_complete_rows: usize,
    pub mcmc: McmcSettings,
    pub ctbf_dpm: DpmConfig,
    pub mixmod_marginal_dpm: DpmConfig,
    pub mixmod_joint_dpm: DpmConfig,
    pub ctbf_config: CtbfConfig,
    pub ensemble: EnsembleConfig,
    pub mi: MiConfig,
    /// Worker threads; 0 means one per logical core.
    pub workers: usize,
    pub seed: u64,
}

impl Default for ScreenPlan {
    fn default() -> Self {
        ScreenPlan {
            methods: BTreeSet::from([Method::Ctbf]),
            min_complete_rows: defaults::MIN_COMPLETE_ROWS,
            mcmc: McmcSettings::default(),
            ctbf_dpm: DpmConfig::ctbf_marginal(),
            mixmod_marginal_dpm: DpmConfig::mixmod_marginal(),
            mixmod_joint_dpm: DpmConfig::mixmod_joint(),
            ctbf_config: CtbfConfig::default(),
            ensemble: EnsembleConfig::default(),
            mi: MiConfig::default(),
            workers: 0,
            seed: 0,
        }
    }
}

impl ScreenPlan {
    pub fn validate(&self) -> Result<()> {
        if self.min_complete_rows < 2 {
            return Err(Error::invalid("minimum complete rows must be >= 2"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method must be requested"));
        }
        self.mcmc.validate()?;
        self.ctbf_dpm.validate()?;
        self.mixmod_marginal_dpm.validate()?;
        self.mixmod_joint_dpm.validate()?;
        self.ctbf_config.validate()?;
        self.ensemble.validate()?;
        Ok(())
    }
}

/// Canonical status flags attached to pair results.
pub mod status {
    pub const SKIPPED_TOO_FEW_ROWS: &str = "skipped-too-few-rows";
    pub const CHAIN_FAILED: &str = "chain-failed";
    pub const MI_FAILED: &str = "mi-failed";
    pub const MI_JITTERED: &str = "mi-jittered";
    pub const CHAIN_WARNING: &str = "chain-warning";
}

/// Dependence summaries of one variable pair (i < j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub i: usize,
    pub j: usize,
    pub n_complete: usize,
    pub p_dep: Option<f64>,
    pub pi_hat: Option<f64>,
    pub mi: Option<f64>,
    pub chi2_stat: Option<f64>,
    pub chi2_p: Option<f64>,
    pub status: Vec<String>,
}

impl PairResult {
    pub fn empty(i: usize, j: usize, n_complete: usize) -> PairResult {
        PairResult {
            i,
            j,
            n_complete,
            p_dep: None,
            pi_hat: None,
            mi: None,
            chi2_stat: None,
            chi2_p: None,
            status: Vec::new(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.status.iter().any(|s| s == status::SKIPPED_TOO_FEW_ROWS)
    }

    pub fn has_failure(&self) -> bool {
        self.status.iter().any(|s| {
            s.starts_with(status::CHAIN_FAILED) || s.starts_with(status::MI_FAILED)
        })
    }
}
