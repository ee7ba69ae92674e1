//! Result persistence.
//!
//! TSV: one line per pair with columns
//! `var_i  var_j  n_complete  p_dep  pi_hat  mi  chi2_T  chi2_p  status`;
//! absent metrics are empty fields and a clean pair reads `ok`. JSON wraps
//! the same records with the full plan and seed for reproducibility.
//! Floats are written in the shortest form that parses back bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairResult, ScreenPlan};
use crate::{Error, Result};

pub const TSV_HEADER: &str = "var_i\tvar_j\tn_complete\tp_dep\tpi_hat\tmi\tchi2_T\tchi2_p\tstatus";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Tsv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "tsv" => Ok(OutputFormat::Tsv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown output format: {other}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    seed: u64,
    plan: ScreenPlan,
    results: Vec<PairResult>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn status_field(status: &[String]) -> String {
    if status.is_empty() {
        "ok".to_string()
    } else {
        status.join(";")
    }
}

pub fn persist_results(
    results: &[PairResult],
    plan: &ScreenPlan,
    path: &Path,
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Tsv => {
            let mut out = String::with_capacity(64 * (results.len() + 1));
            out.push_str(TSV_HEADER);
            out.push('\n');
            for r in results {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.i,
                    r.j,
                    r.n_complete,
                    opt(r.p_dep),
                    opt(r.pi_hat),
                    opt(r.mi),
                    opt(r.chi2_stat),
                    opt(r.chi2_p),
                    status_field(&r.status)
                ));
            }
            std::fs::write(path, out).map_err(|e| Error::io(path, e))
        }
        OutputFormat::Json => {
            let doc = JsonDocument {
                seed: plan.seed,
                plan: plan.clone(),
                results: results.to_vec(),
            };
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::invalid(format!("serializing results: {e}")))?;
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
    }
}

pub fn load_results(path: &Path, format: OutputFormat) -> Result<Vec<PairResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        OutputFormat::Tsv => {
            let mut lines = text.lines();
            match lines.next() {
                Some(h) if h == TSV_HEADER => {}
                other => {
                    return Err(Error::invalid(format!(
                        "unexpected results header: {other:?}"
                    )))
                }
            }
            let mut results = Vec::new();
            for (ln, line) in lines.enumerate() {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 9 {
                    return Err(Error::invalid(format!(
                        "line {}: expected 9 columns, got {}",
                        ln + 2,
                        cols.len()
                    )));
                }
                let parse_opt = |s: &str| -> Result<Option<f64>> {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        s.parse::<f64>()
                            .map(Some)
                            .map_err(|e| Error::invalid(format!("line {}: {e}", ln + 2)))
                    }
                };
                let status = if cols[8] == "ok" {
                    Vec::new()
                } else {
                    cols[8].split(';').map(|s| s.to_string()).collect()
                };
                results.push(PairResult {
                    i: cols[0]
                        .parse()
                        .map_err(|e| Error::invalid(format!("line {}: {e}", ln + 2)))?,
                    j: cols[1]
                        .parse()
                        .map_err(|e| Error::invalid(format!("line {}: {e}", ln + 2)))?,
                    n_complete: cols[2]
                        .parse()
                        .map_err(|e| Error::invalid(format!("line {}: {e}", ln + 2)))?,
                    p_dep: parse_opt(cols[3])?,
                    pi_hat: parse_opt(cols[4])?,
                    mi: parse_opt(cols[5])?,
                    chi2_stat: parse_opt(cols[6])?,
                    chi2_p: parse_opt(cols[7])?,
                    status,
                });
            }
            Ok(results)
        }
        OutputFormat::Json => {
            let doc: JsonDocument = serde_json::from_str(&text)
                .map_err(|e| Error::invalid(format!("parsing results: {e}")))?;
            Ok(doc.results)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screen::status;

    fn sample_results() -> Vec<PairResult> {
        vec![
            PairResult {
                i: 0,
                j: 1,
                n_complete: 42,
                p_dep: Some(0.9876543210123456),
                pi_hat: Some(1.0 / 3.0),
                mi: None,
                chi2_stat: Some(17.25),
                chi2_p: Some(3.2e-5),
                status: Vec::new(),
            },
            PairResult {
                i: 0,
                j: 2,
                n_complete: 4,
                p_dep: None,
                pi_hat: None,
                mi: None,
                chi2_stat: None,
                chi2_p: None,
                status: vec![status::SKIPPED_TOO_FEW_ROWS.to_string()],
            },
        ]
    }

    #[test]
    fn tsv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.tsv");
        let results = sample_results();
        let plan = ScreenPlan::default();
        persist_results(&results, &plan, &path, OutputFormat::Tsv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let skipped_line = text.lines().nth(2).unwrap();
        assert!(skipped_line.contains("skipped-too-few-rows"));
        assert!(skipped_line.split('\t').nth(3).unwrap().is_empty());
        let back = load_results(&path, OutputFormat::Tsv).unwrap();
        assert_eq!(results, back);
    }

    #[test]
    fn json_roundtrip_carries_plan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.json");
        let results = sample_results();
        let mut plan = ScreenPlan::default();
        plan.seed = 99;
        persist_results(&results, &plan, &path, OutputFormat::Json).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"seed\": 99"));
        assert!(text.contains("\"mcmc\""));
        let back = load_results(&path, OutputFormat::Json).unwrap();
        assert_eq!(results, back);
    }

    #[test]
    fn empty_results_write_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.tsv");
        persist_results(&[], &ScreenPlan::default(), &path, OutputFormat::Tsv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim_end(), TSV_HEADER);
        assert_eq!(load_results(&path, OutputFormat::Tsv).unwrap(), vec![]);
    }
}
