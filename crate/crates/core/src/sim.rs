//! Synthetic scenarios, permutation nulls, and ROC/AUC power summaries.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctbf::{dahl_chi_square, p_dep_over_trace};
use crate::dpm::{run_chain, univariate_points};
use crate::mi::knn_mi;
use crate::mixmod::mixmod_ensemble;
use crate::screen::{Method, ScreenPlan};
use crate::stats::{sample_normal, standardize, RngStream, StreamRng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Bivariate normal with unit variances and correlation ρ.
    Normal,
    /// Y = 2 sin(X) + noise, X uniform on [0, 5π].
    Sinusoidal,
    /// Y = 2X²/3 + noise, X standard normal.
    Parabolic,
    /// (X, Y) = (10 cos θ, 10 sin θ) + independent noise, θ uniform on [0, 2π].
    Circular,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Normal => "normal",
            ScenarioKind::Sinusoidal => "sinusoidal",
            ScenarioKind::Parabolic => "parabolic",
            ScenarioKind::Circular => "circular",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScenarioKind> {
        match s {
            "normal" => Ok(ScenarioKind::Normal),
            "sinusoidal" => Ok(ScenarioKind::Sinusoidal),
            "parabolic" => Ok(ScenarioKind::Parabolic),
            "circular" => Ok(ScenarioKind::Circular),
            other => Err(Error::invalid(format!("unknown scenario kind: {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Correlation (normal model only).
    pub rho: f64,
    /// Noise standard deviation (other models).
    pub phi: f64,
    pub n: usize,
    /// Replications per arm.
    pub reps: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    /// The dependence parameter of the cell: ρ for the normal model, φ
    /// otherwise.
    pub fn parameter(&self) -> f64 {
        match self.kind {
            ScenarioKind::Normal => self.rho,
            _ => self.phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.abs() >= 1.0 {
            return Err(Error::invalid(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if self.phi < 0.0 || !self.phi.is_finite() {
            return Err(Error::invalid(format!("phi must be >= 0, got {}", self.phi)));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!("n must be >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Draws one paired sample from the scenario's generative law.
pub fn generate(config: &ScenarioConfig, rng: &mut StreamRng) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    let n = config.n;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    match config.kind {
        ScenarioKind::Normal => {
            let rho = config.rho;
            let resid = (1.0 - rho * rho).sqrt();
            for _ in 0..n {
                let z1 = sample_normal(0.0, 1.0, rng)?;
                let z2 = sample_normal(0.0, 1.0, rng)?;
                x.push(z1);
                y.push(rho * z1 + resid * z2);
            }
        }
        ScenarioKind::Sinusoidal => {
            let var = config.phi * config.phi;
            for _ in 0..n {
                let u: f64 = rand::Rng::random::<f64>(rng);
                let xi = u * 5.0 * std::f64::consts::PI;
                x.push(xi);
                y.push(2.0 * xi.sin() + sample_normal(0.0, var, rng)?);
            }
        }
        ScenarioKind::Parabolic => {
            let var = config.phi * config.phi;
            for _ in 0..n {
                let xi = sample_normal(0.0, 1.0, rng)?;
                x.push(xi);
                y.push(2.0 * xi * xi / 3.0 + sample_normal(0.0, var, rng)?);
            }
        }
        ScenarioKind::Circular => {
            let var = config.phi * config.phi;
            for _ in 0..n {
                let theta: f64 = rand::Rng::random::<f64>(rng) * 2.0 * std::f64::consts::PI;
                x.push(10.0 * theta.cos() + sample_normal(0.0, var, rng)?);
                y.push(10.0 * theta.sin() + sample_normal(0.0, var, rng)?);
            }
        }
    }
    Ok((x, y))
}

/// Destroys the dependence by reordering the second sample with a uniform
/// random permutation; the first sample is untouched.
pub fn permute_null(x: &[f64], y: &[f64], rng: &mut StreamRng) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::invalid("paired samples must have equal length"));
    }
    let mut perm: Vec<usize> = (0..y.len()).collect();
    crate::mi::fisher_yates(&mut perm, rng);
    Ok((x.to_vec(), perm.iter().map(|&i| y[i]).collect()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RocCurve {
    /// Decision thresholds, descending; scores >= threshold are called
    /// dependent.
    pub thresholds: Vec<f64>,
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    pub auc: f64,
}

/// ROC curve over the pooled score set and area by the trapezoid rule.
/// Tied scores produce diagonal segments, so the area matches the
/// Mann–Whitney statistic with the half-tie correction.
pub fn roc(dep_scores: &[f64], null_scores: &[f64]) -> Result<RocCurve> {
    if dep_scores.is_empty() || null_scores.is_empty() {
        return Err(Error::invalid("both score sets must be nonempty"));
    }
    if dep_scores.iter().chain(null_scores.iter()).any(|v| v.is_nan()) {
        return Err(Error::invalid("scores must not be NaN"));
    }
    let mut pooled: Vec<f64> = dep_scores.iter().chain(null_scores).copied().collect();
    pooled.sort_by(|a, b| b.total_cmp(a));
    pooled.dedup();

    let np = dep_scores.len() as f64;
    let nn = null_scores.len() as f64;
    let mut thresholds = Vec::with_capacity(pooled.len());
    let mut tpr = vec![0.0];
    let mut fpr = vec![0.0];
    for &t in &pooled {
        let tp = dep_scores.iter().filter(|&&s| s >= t).count() as f64;
        let fp = null_scores.iter().filter(|&&s| s >= t).count() as f64;
        thresholds.push(t);
        tpr.push(tp / np);
        fpr.push(fp / nn);
    }
    let mut auc = 0.0;
    for i in 1..tpr.len() {
        auc += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
    }
    // drop the artificial (0,0) anchor from the reported points
    Ok(RocCurve { thresholds, tpr: tpr[1..].to_vec(), fpr: fpr[1..].to_vec(), auc })
}

/// Dependence score of one paired sample under one method. Higher means
/// more evidence for dependence.
pub fn pair_score(
    method: Method,
    x: &[f64],
    y: &[f64],
    plan: &ScreenPlan,
    stream: RngStream,
) -> Result<f64> {
    match method {
        Method::Ctbf => {
            let (zx, _, _) = standardize(x);
            let (zy, _, _) = standardize(y);
            let (tx, _) = run_chain(
                &univariate_points(&zx)?,
                &plan.ctbf_dpm,
                &plan.mcmc,
                &[],
                stream.substream_label("ctbf:x"),
            )?;
            let (ty, _) = run_chain(
                &univariate_points(&zy)?,
                &plan.ctbf_dpm,
                &plan.mcmc,
                &[],
                stream.substream_label("ctbf:y"),
            )?;
            Ok(p_dep_over_trace(&tx, &ty, &plan.ctbf_config)?.p_dep)
        }
        Method::ChiSq => {
            let (zx, _, _) = standardize(x);
            let (zy, _, _) = standardize(y);
            let (tx, _) = run_chain(
                &univariate_points(&zx)?,
                &plan.ctbf_dpm,
                &plan.mcmc,
                &[],
                stream.substream_label("ctbf:x"),
            )?;
            let (ty, _) = run_chain(
                &univariate_points(&zy)?,
                &plan.ctbf_dpm,
                &plan.mcmc,
                &[],
                stream.substream_label("ctbf:y"),
            )?;
            Ok(1.0 - dahl_chi_square(&tx, &ty)?.p_value)
        }
        Method::Mixmod => Ok(mixmod_ensemble(
            x,
            y,
            &plan.mixmod_marginal_dpm,
            &plan.mixmod_joint_dpm,
            &plan.mcmc,
            &plan.ensemble,
            stream,
        )?
        .pi_hat),
        Method::Mi => Ok(knn_mi(x, y, &plan.mi)?.value),
    }
}

/// One grid cell of a power study: a scenario plus an optional plan
/// override (used by the prior-sensitivity sweeps).
#[derive(Clone, Debug)]
pub struct PowerCell {
    pub scenario: ScenarioConfig,
    pub plan: Option<ScreenPlan>,
}

/// One replication's score with its arm label.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScoreRow {
    pub replication: usize,
    /// 1 for the dependent arm, 0 for the permuted null arm.
    pub label: u8,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct PowerRow {
    pub scenario: ScenarioKind,
    pub parameter: f64,
    pub method: Method,
    pub auc: f64,
    pub runtime_s: f64,
    pub dep_ok: usize,
    pub null_ok: usize,
    pub scores: Vec<ScoreRow>,
    pub curve: RocCurve,
}

/// Runs `reps` dependent and `reps` permuted-null replications of every
/// cell, scoring each with the method, and summarizes the separation by the
/// ROC/AUC. Failed replications are dropped from the curve but counted.
pub fn power_study(
    method: Method,
    cells: &[PowerCell],
    plan: &ScreenPlan,
    stream: RngStream,
) -> Result<Vec<PowerRow>> {
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        cell.scenario.validate()?;
        if cell.scenario.reps < 2 {
            return Err(Error::invalid("need at least 2 replications per arm"));
        }
        let cell_plan = cell.plan.as_ref().unwrap_or(plan);
        let start = Instant::now();
        let reps = cell.scenario.reps;
        let scores: Vec<(usize, u8, Result<f64>)> = (0..2 * reps)
            .into_par_iter()
            .map(|task| {
                let rep = task / 2;
                let dependent = task % 2 == 0;
                let cell_stream = stream
                    .substream_label(cell.scenario.kind.as_str())
                    .substream(cell.scenario.parameter().to_bits())
                    .substream(cell.scenario.seed)
                    .substream(rep as u64)
                    .substream(u64::from(dependent));
                let mut rng = cell_stream.substream_label("generate").rng();
                let sample = generate(&cell.scenario, &mut rng);
                let score = sample.and_then(|(x, y)| {
                    if dependent {
                        pair_score(method, &x, &y, cell_plan, cell_stream.substream_label("score"))
                    } else {
                        let (xn, yn) = permute_null(&x, &y, &mut rng)?;
                        pair_score(method, &xn, &yn, cell_plan, cell_stream.substream_label("score"))
                    }
                });
                (rep, u8::from(dependent), score)
            })
            .collect();

        let mut dep_scores = Vec::with_capacity(reps);
        let mut null_scores = Vec::with_capacity(reps);
        let mut score_rows = Vec::with_capacity(2 * reps);
        for (rep, label, score) in scores {
            match score {
                Ok(s) => {
                    score_rows.push(ScoreRow { replication: rep, label, score: s });
                    if label == 1 {
                        dep_scores.push(s);
                    } else {
                        null_scores.push(s);
                    }
                }
                Err(_) => {}
            }
        }
        let curve = roc(&dep_scores, &null_scores)?;
        rows.push(PowerRow {
            scenario: cell.scenario.kind,
            parameter: cell.scenario.parameter(),
            method,
            auc: curve.auc,
            runtime_s: start.elapsed().as_secs_f64(),
            dep_ok: dep_scores.len(),
            null_ok: null_scores.len(),
            scores: score_rows,
            curve,
        });
    }
    Ok(rows)
}

/// The paper-style grid: normal ρ ∈ {0, .1, .3, .5, .9}; sinusoidal,
/// parabolic and circular φ ∈ {1..5}.
pub fn full_grid(n: usize, reps: usize, seed: u64) -> Vec<PowerCell> {
    let mut cells = Vec::new();
    for rho in [0.0, 0.1, 0.3, 0.5, 0.9] {
        cells.push(PowerCell {
            scenario: ScenarioConfig { kind: ScenarioKind::Normal, rho, phi: 0.0, n, reps, seed },
            plan: None,
        });
    }
    for kind in [ScenarioKind::Sinusoidal, ScenarioKind::Parabolic, ScenarioKind::Circular] {
        for phi in [1.0, 2.0, 3.0, 4.0, 5.0] {
            cells.push(PowerCell {
                scenario: ScenarioConfig { kind, rho: 0.0, phi, n, reps, seed },
                plan: None,
            });
        }
    }
    cells
}

/// Per-replication scores: scenario, parameter, replication, score, label.
pub fn write_cell_tsv(rows: &[PowerRow], path: &Path) -> Result<()> {
    let mut out = String::from("scenario\tparameter\tmethod\treplication\tlabel\tscore\n");
    for row in rows {
        for s in &row.scores {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                row.scenario.as_str(),
                row.parameter,
                row.method.as_str(),
                s.replication,
                s.label,
                s.score
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Cell summaries: scenario, parameter, method, AUC plus bookkeeping.
pub fn write_summary_tsv(rows: &[PowerRow], path: &Path) -> Result<()> {
    let mut out = String::from("scenario\tparameter\tmethod\tauc\truntime_s\tdep_ok\tnull_ok\n");
    for row in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            row.scenario.as_str(),
            row.parameter,
            row.method.as_str(),
            row.auc,
            row.runtime_s,
            row.dep_ok,
            row.null_ok
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// ROC points, losslessly: every (threshold, fpr, tpr) with full precision.
pub fn write_roc_tsv(rows: &[PowerRow], path: &Path) -> Result<()> {
    let mut out = String::from("scenario\tparameter\tmethod\tthreshold\tfpr\ttpr\n");
    for row in rows {
        for i in 0..row.curve.thresholds.len() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                row.scenario.as_str(),
                row.parameter,
                row.method.as_str(),
                row.curve.thresholds[i],
                row.curve.fpr[i],
                row.curve.tpr[i]
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
