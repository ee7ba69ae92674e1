//! The screening pipelines.
//!
//! Contingency-table screening is two-stage: stage one fits one univariate
//! chain per variable on all its observed rows; stage two restricts the
//! stored traces of each eligible pair to their common rows and averages
//! the per-iteration tests. The ensemble and mutual-information screens are
//! per-pair over complete rows. RNG substreams are keyed by variable name
//! (stage one) and by pair name plus method (pair level), so results do not
//! depend on scheduling or worker count.

use rayon::prelude::*;

use super::{status, Dataset, Method, PairResult, ScreenPlan};
use crate::ctbf::{dahl_chi_square, p_dep_over_trace};
use crate::dpm::{run_chain, univariate_points, AllocationTrace};
use crate::mi::knn_mi;
use crate::mixmod::mixmod_ensemble;
use crate::stats::{standardize, RngStream};
use crate::{Error, Result};

/// Stage-one output for one variable: the allocation trace and the dataset
/// rows (sorted by row id) its columns correspond to.
#[derive(Clone, Debug)]
pub struct MarginalTrace {
    pub trace: AllocationTrace,
    pub rows: Vec<usize>,
}

fn run_in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Fits one univariate chain per variable on all rows where it is observed
/// (standardized over those rows), keyed by variable name.
pub fn fit_marginal_traces(
    dataset: &Dataset,
    plan: &ScreenPlan,
    stream: RngStream,
) -> Result<Vec<Result<MarginalTrace>>> {
    plan.validate()?;
    run_in_pool(plan.workers, || {
        (0..dataset.n_vars())
            .into_par_iter()
            .map(|v| {
                let rows = dataset.column_rows(v);
                let raw = dataset.values_at(v, &rows);
                let (z, _, _) = standardize(&raw);
                let points = univariate_points(&z)?;
                let sub = stream
                    .substream_label("stage1")
                    .substream_label(&dataset.names()[v]);
                let (trace, _) = run_chain(&points, &plan.ctbf_dpm, &plan.mcmc, &[], sub)?;
                Ok(MarginalTrace { trace, rows })
            })
            .collect()
    })
}

// Positions (within each sorted row list) of the rows common to both, via a
// merge over the shared (row id, index) sort order.
fn common_positions(
    dataset: &Dataset,
    rows_a: &[usize],
    rows_b: &[usize],
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let key = |r: usize| (&dataset.row_ids()[r], r);
    let mut pos_a = Vec::new();
    let mut pos_b = Vec::new();
    let mut rows = Vec::new();
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < rows_a.len() && ib < rows_b.len() {
        let (ka, kb) = (key(rows_a[ia]), key(rows_b[ib]));
        match ka.cmp(&kb) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                pos_a.push(ia);
                pos_b.push(ib);
                rows.push(rows_a[ia]);
                ia += 1;
                ib += 1;
            }
        }
    }
    (pos_a, pos_b, rows)
}

fn all_pairs(p: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Stage two of the contingency-table screen over precomputed traces.
/// `with_chisq` additionally tests the representative-partition table.
pub fn screen_ctbf_with_traces(
    dataset: &Dataset,
    plan: &ScreenPlan,
    traces: &[Result<MarginalTrace>],
    with_ctbf: bool,
    with_chisq: bool,
) -> Result<Vec<PairResult>> {
    run_in_pool(plan.workers, || {
        all_pairs(dataset.n_vars())
            .into_par_iter()
            .map(|(i, j)| {
                let mut res = PairResult::empty(i, j, 0);
                let (mt_i, mt_j) = match (&traces[i], &traces[j]) {
                    (Ok(a), Ok(b)) => (a, b),
                    (a, b) => {
                        for (v, t) in [(i, a), (j, b)] {
                            if let Err(e) = t {
                                res.status.push(format!(
                                    "{}:{}: {e}",
                                    status::CHAIN_FAILED,
                                    dataset.names()[v]
                                ));
                            }
                        }
                        return res;
                    }
                };
                let (pos_i, pos_j, _) = common_positions(dataset, &mt_i.rows, &mt_j.rows);
                res.n_complete = pos_i.len();
                if res.n_complete < plan.min_complete_rows {
                    res.status.push(status::SKIPPED_TOO_FEW_ROWS.to_string());
                    return res;
                }
                let restricted = mt_i
                    .trace
                    .restrict(&pos_i)
                    .and_then(|ti| mt_j.trace.restrict(&pos_j).map(|tj| (ti, tj)));
                let (ti, tj) = match restricted {
                    Ok(t) => t,
                    Err(e) => {
                        res.status.push(format!("{}: {e}", status::CHAIN_FAILED));
                        return res;
                    }
                };
                for (var, trace) in [(i, &ti), (j, &tj)] {
                    for w in trace.warnings() {
                        res.status.push(format!(
                            "{}:{}: {w}",
                            status::CHAIN_WARNING,
                            dataset.names()[var]
                        ));
                    }
                }
                if with_ctbf {
                    match p_dep_over_trace(&ti, &tj, &plan.ctbf_config) {
                        Ok(r) => res.p_dep = Some(r.p_dep),
                        Err(e) => {
                            res.status.push(format!("{}: {e}", status::CHAIN_FAILED))
                        }
                    }
                }
                if with_chisq {
                    match dahl_chi_square(&ti, &tj) {
                        Ok(c) => {
                            res.chi2_stat = Some(c.statistic);
                            res.chi2_p = Some(c.p_value);
                        }
                        Err(e) => {
                            res.status.push(format!("{}: {e}", status::CHAIN_FAILED))
                        }
                    }
                }
                res.status.dedup();
                res
            })
            .collect()
    })
}

/// Two-stage contingency-table screen: one chain per variable, then the
/// averaged Bayes-factor test on every eligible pair.
pub fn screen_ctbf(
    dataset: &Dataset,
    plan: &ScreenPlan,
    stream: RngStream,
) -> Result<Vec<PairResult>> {
    let traces = fit_marginal_traces(dataset, plan, stream)?;
    screen_ctbf_with_traces(dataset, plan, &traces, true, false)
}

/// Per-pair ensemble screen over complete rows.
pub fn screen_mixmod(
    dataset: &Dataset,
    plan: &ScreenPlan,
    stream: RngStream,
) -> Result<Vec<PairResult>> {
    plan.validate()?;
    run_in_pool(plan.workers, || {
        all_pairs(dataset.n_vars())
            .into_par_iter()
            .map(|(i, j)| {
                let mut res = PairResult::empty(i, j, 0);
                let rows_i = dataset.column_rows(i);
                let rows_j = dataset.column_rows(j);
                let (_, _, rows) = common_positions(dataset, &rows_i, &rows_j);
                res.n_complete = rows.len();
                if res.n_complete < plan.min_complete_rows {
                    res.status.push(status::SKIPPED_TOO_FEW_ROWS.to_string());
                    return res;
                }
                let x = dataset.values_at(i, &rows);
                let y = dataset.values_at(j, &rows);
                let sub = pair_stream(stream, dataset, i, j, "mixmod");
                match mixmod_ensemble(
                    &x,
                    &y,
                    &plan.mixmod_marginal_dpm,
                    &plan.mixmod_joint_dpm,
                    &plan.mcmc,
                    &plan.ensemble,
                    sub,
                ) {
                    Ok(r) => res.pi_hat = Some(r.pi_hat),
                    Err(e) => res.status.push(format!("{}: {e}", status::CHAIN_FAILED)),
                }
                res
            })
            .collect()
    })
}

/// Per-pair mutual information over complete rows.
pub fn screen_mi(dataset: &Dataset, plan: &ScreenPlan, _stream: RngStream) -> Result<Vec<PairResult>> {
    plan.validate()?;
    run_in_pool(plan.workers, || {
        all_pairs(dataset.n_vars())
            .into_par_iter()
            .map(|(i, j)| {
                let mut res = PairResult::empty(i, j, 0);
                let rows_i = dataset.column_rows(i);
                let rows_j = dataset.column_rows(j);
                let (_, _, rows) = common_positions(dataset, &rows_i, &rows_j);
                res.n_complete = rows.len();
                if res.n_complete < plan.min_complete_rows {
                    res.status.push(status::SKIPPED_TOO_FEW_ROWS.to_string());
                    return res;
                }
                let x = dataset.values_at(i, &rows);
                let y = dataset.values_at(j, &rows);
                match knn_mi(&x, &y, &plan.mi) {
                    Ok(est) => {
                        res.mi = Some(est.value);
                        if est.jitter_applied {
                            res.status.push(status::MI_JITTERED.to_string());
                        }
                    }
                    Err(e) => res.status.push(format!("{}: {e}", status::MI_FAILED)),
                }
                res
            })
            .collect()
    })
}

fn pair_stream(
    stream: RngStream,
    dataset: &Dataset,
    i: usize,
    j: usize,
    method: &str,
) -> RngStream {
    stream
        .substream_label("pair")
        .substream_label(&dataset.names()[i])
        .substream_label(&dataset.names()[j])
        .substream_label(method)
}

/// Runs every requested method and merges the per-pair results. The
/// contingency-table and chi-squared screens share their stage-one chains.
pub fn screen(dataset: &Dataset, plan: &ScreenPlan, stream: RngStream) -> Result<Vec<PairResult>> {
    plan.validate()?;
    let with_ctbf = plan.methods.contains(&Method::Ctbf);
    let with_chisq = plan.methods.contains(&Method::ChiSq);

    let mut merged: Option<Vec<PairResult>> = None;
    if with_ctbf || with_chisq {
        let traces = fit_marginal_traces(dataset, plan, stream)?;
        merged = Some(screen_ctbf_with_traces(dataset, plan, &traces, with_ctbf, with_chisq)?);
    }
    if plan.methods.contains(&Method::Mixmod) {
        let part = screen_mixmod(dataset, plan, stream)?;
        merged = Some(match merged {
            None => part,
            Some(base) => merge_results(base, part),
        });
    }
    if plan.methods.contains(&Method::Mi) {
        let part = screen_mi(dataset, plan, stream)?;
        merged = Some(match merged {
            None => part,
            Some(base) => merge_results(base, part),
        });
    }
    Ok(merged.unwrap_or_default())
}

fn merge_results(mut base: Vec<PairResult>, other: Vec<PairResult>) -> Vec<PairResult> {
    for (slot, extra) in base.iter_mut().zip(other) {
        debug_assert_eq!((slot.i, slot.j), (extra.i, extra.j));
        slot.n_complete = slot.n_complete.max(extra.n_complete);
        slot.p_dep = slot.p_dep.or(extra.p_dep);
        slot.pi_hat = slot.pi_hat.or(extra.pi_hat);
        slot.mi = slot.mi.or(extra.mi);
        slot.chi2_stat = slot.chi2_stat.or(extra.chi2_stat);
        slot.chi2_p = slot.chi2_p.or(extra.chi2_p);
        for s in extra.status {
            if !slot.status.contains(&s) {
                slot.status.push(s);
            }
        }
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpm::McmcSettings;
    use crate::stats::sample_normal;
    use std::collections::BTreeSet;

    fn quick_plan(methods: &[Method]) -> ScreenPlan {
        ScreenPlan {
            methods: BTreeSet::from_iter(methods.iter().copied()),
            mcmc: McmcSettings::new(40, 60, 1),
            mi: crate::mi::MiConfig { k: 5 },
            seed: 123,
            ..ScreenPlan::default()
        }
    }

    fn toy_dataset(n: usize, p: usize, seed: u64, missing_in_first: usize) -> Dataset {
        let mut rng = RngStream::new(seed).rng();
        let names: Vec<String> = (0..p).map(|v| format!("v{v:02}")).collect();
        let ids: Vec<String> = (0..n).map(|r| format!("r{r:03}")).collect();
        let rows: Vec<Vec<Option<f64>>> = (0..n)
            .map(|r| {
                (0..p)
                    .map(|c| {
                        if c == 0 && r < missing_in_first {
                            None
                        } else {
                            Some(sample_normal(0.0, 1.0, &mut rng).unwrap())
                        }
                    })
                    .collect()
            })
            .collect();
        Dataset::from_rows(names, ids, &rows).unwrap()
    }

    #[test]
    fn pair_count_and_coverage() {
        let ds = toy_dataset(30, 4, 1, 0);
        let plan = quick_plan(&[Method::Ctbf]);
        let results = screen_ctbf(&ds, &plan, RngStream::new(9)).unwrap();
        assert_eq!(results.len(), 6);
        assert!(results.iter().all(|r| r.p_dep.is_some()));
        assert!(results.iter().all(|r| r.n_complete == 30));
        // p = 2 means exactly one pair
        let ds2 = toy_dataset(25, 2, 2, 0);
        let results = screen_ctbf(&ds2, &plan, RngStream::new(9)).unwrap();
        assert_eq!(results.len(), 1);
    }

    #[test]
    fn sparse_variable_skips_all_its_pairs() {
        // the first variable is observed in only 5 rows
        let ds = toy_dataset(25, 3, 3, 20);
        let plan = quick_plan(&[Method::Ctbf]);
        let results = screen_ctbf(&ds, &plan, RngStream::new(5)).unwrap();
        for r in &results {
            if r.i == 0 {
                assert!(r.is_skipped(), "pair ({}, {}) should be skipped", r.i, r.j);
                assert!(r.p_dep.is_none());
            } else {
                assert!(r.p_dep.is_some());
            }
        }
        let skipped = results.iter().filter(|r| r.is_skipped()).count();
        assert_eq!(skipped + results.iter().filter(|r| !r.is_skipped()).count(), 3);
    }

    #[test]
    fn determinism_across_worker_counts() {
        let ds = toy_dataset(24, 3, 4, 0);
        let mut plan = quick_plan(&[Method::Ctbf, Method::Mi, Method::ChiSq]);
        plan.workers = 1;
        let a = screen(&ds, &plan, RngStream::new(77)).unwrap();
        plan.workers = 8;
        let b = screen(&ds, &plan, RngStream::new(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn row_reordered_dataset_gives_identical_results() {
        let ds = toy_dataset(26, 3, 6, 0);
        // rebuild with rows rotated; ids travel with their rows
        let perm: Vec<usize> = (0..26).map(|r| (r + 11) % 26).collect();
        let rows: Vec<Vec<Option<f64>>> = perm
            .iter()
            .map(|&r| (0..3).map(|c| ds.get(r, c)).collect())
            .collect();
        let ids: Vec<String> = perm.iter().map(|&r| ds.row_ids()[r].clone()).collect();
        let ds2 = Dataset::from_rows(ds.names().to_vec(), ids, &rows).unwrap();

        let plan = quick_plan(&[Method::Ctbf, Method::Mi]);
        let a = screen(&ds, &plan, RngStream::new(31)).unwrap();
        let b = screen(&ds2, &plan, RngStream::new(31)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_columns_detected_quickly() {
        // y is an exact copy of x with well-separated modes: the marginal
        // partitions align across chains, so dependence is near certain
        // even with a short chain
        let mut rng = RngStream::new(44).rng();
        let n = 60;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let center = if i % 2 == 0 { -3.0 } else { 3.0 };
                center + sample_normal(0.0, 0.25, &mut rng).unwrap()
            })
            .collect();
        let rows: Vec<Vec<Option<f64>>> = xs.iter().map(|&x| vec![Some(x), Some(x)]).collect();
        let ids: Vec<String> = (0..n).map(|r| format!("r{r:03}")).collect();
        let ds = Dataset::from_rows(
            vec!["x".to_string(), "copy".to_string()],
            ids,
            &rows,
        )
        .unwrap();
        let plan = quick_plan(&[Method::Ctbf]);
        let results = screen_ctbf(&ds, &plan, RngStream::new(2)).unwrap();
        assert!(results[0].p_dep.unwrap() > 0.8, "identical pair p_dep {:?}", results[0].p_dep);
    }

    #[test]
    fn mi_failure_flagged_per_pair() {
        // 12 complete rows with k = 20 cannot run the MI estimator
        let ds = toy_dataset(12, 2, 8, 0);
        let mut plan = quick_plan(&[Method::Mi]);
        plan.mi = crate::mi::MiConfig { k: 20 };
        let results = screen_mi(&ds, &plan, RngStream::new(3)).unwrap();
        assert_eq!(results.len(), 1);
        assert!(results[0].has_failure());
        assert!(results[0].mi.is_none());
    }
}
