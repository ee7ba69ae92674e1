//! Running a chain and recording its output: per-iteration cluster
//! allocations and the averaged posterior predictive density.

use std::io::Write;
use std::path::Path;

use super::cluster::{niw_posterior, ClusterStats, GaussKernel, StudentPred};
use super::config::{DpmConfig, McmcSettings};
use super::state::DpmState;
use super::sweep::gibbs_sweep;
use crate::stats::RngStream;
use crate::{Error, Result};

/// Saved cluster labels: `n_saved` rows of `n_points` entries, each row
/// canonicalized so clusters are numbered 1..K by order of first appearance.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationTrace {
    n_points: usize,
    labels: Vec<u32>,
    k_per_iter: Vec<u32>,
    settings: McmcSettings,
    warnings: Vec<String>,
}

impl AllocationTrace {
    pub(crate) fn new(n_points: usize, settings: McmcSettings) -> AllocationTrace {
        AllocationTrace {
            n_points,
            labels: Vec::new(),
            k_per_iter: Vec::new(),
            settings,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push_row(&mut self, row: &[u32]) {
        debug_assert_eq!(row.len(), self.n_points);
        let k = row.iter().copied().max().unwrap_or(0);
        self.labels.extend_from_slice(row);
        self.k_per_iter.push(k);
    }

    pub(crate) fn push_warning(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_saved(&self) -> usize {
        self.k_per_iter.len()
    }

    pub fn row(&self, s: usize) -> &[u32] {
        &self.labels[s * self.n_points..(s + 1) * self.n_points]
    }

    pub fn k_at(&self, s: usize) -> u32 {
        self.k_per_iter[s]
    }

    pub fn settings(&self) -> &McmcSettings {
        &self.settings
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Restricts the trace to a subset of columns, re-canonicalizing each
    /// row (clusters that vanish on the subset are renumbered away).
    pub fn restrict(&self, cols: &[usize]) -> Result<AllocationTrace> {
        if cols.iter().any(|&c| c >= self.n_points) {
            return Err(Error::invalid("restriction column out of range"));
        }
        let mut out = AllocationTrace::new(cols.len(), self.settings);
        out.warnings = self.warnings.clone();
        let mut buf = Vec::with_capacity(cols.len());
        for s in 0..self.n_saved() {
            let row = self.row(s);
            buf.clear();
            buf.extend(cols.iter().map(|&c| row[c]));
            let canon = canonicalize_labels(&buf);
            out.push_row(&canon);
        }
        Ok(out)
    }

    /// Writes one row per saved iteration as tab-separated labels, preceded
    /// by `#`-prefixed header lines recording the run metadata.
    pub fn write_tsv(&self, path: &Path, meta: &str) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(&mut f);
        (|| -> std::io::Result<()> {
            writeln!(w, "# {}", meta)?;
            writeln!(
                w,
                "# n_burn={} n_save={} thin={}",
                self.settings.n_burn, self.settings.n_save, self.settings.thin
            )?;
            for warning in &self.warnings {
                writeln!(w, "# warning: {}", warning)?;
            }
            for s in 0..self.n_saved() {
                let row = self.row(s);
                let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
                writeln!(w, "{}", line.join("\t"))?;
            }
            Ok(())
        })()
        .map_err(|e| Error::io(path, e))
    }
}

/// Posterior predictive densities averaged over the saved iterations.
#[derive(Clone, Debug)]
pub struct PredictivePoints {
    pub points: Vec<[f64; 2]>,
    pub density: Vec<f64>,
}

impl PredictivePoints {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Relabels clusters 1..K in order of first appearance. Idempotent.
pub fn canonicalize_labels(labels: &[u32]) -> Vec<u32> {
    let mut map: Vec<(u32, u32)> = Vec::new(); // (raw, canonical)
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let canon = match map.iter().find(|(raw, _)| *raw == l) {
            Some(&(_, c)) => c,
            None => {
                let c = map.len() as u32 + 1;
                map.push((l, c));
                c
            }
        };
        out.push(canon);
    }
    out
}

/// Runs a chain with the allocation pass visiting points in input order.
pub fn run_chain(
    data: &[[f64; 2]],
    config: &DpmConfig,
    mcmc: &McmcSettings,
    eval_points: &[[f64; 2]],
    stream: RngStream,
) -> Result<(AllocationTrace, PredictivePoints)> {
    let keys: Vec<u64> = (0..data.len() as u64).collect();
    run_chain_keyed(data, &keys, config, mcmc, eval_points, stream)
}

/// Runs a chain visiting points in ascending key order, so permuting the
/// rows together with their keys permutes the computation exactly.
pub fn run_chain_keyed(
    data: &[[f64; 2]],
    keys: &[u64],
    config: &DpmConfig,
    mcmc: &McmcSettings,
    eval_points: &[[f64; 2]],
    stream: RngStream,
) -> Result<(AllocationTrace, PredictivePoints)> {
    config.validate()?;
    mcmc.validate()?;
    if data.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::invalid("data must be finite"));
    }
    let mut rng = stream.rng();
    let mut state = DpmState::init(data, keys, config, &mut rng)?;
    let mut trace = AllocationTrace::new(data.len(), *mcmc);
    if is_degenerate(data, config.dim) {
        trace.push_warning("degenerate data: all points identical");
    }

    let n = data.len();
    let mut density_acc = vec![0.0f64; eval_points.len()];
    let mut row: Vec<u32> = vec![0; n];

    let total = mcmc.total_sweeps();
    let mut saved = 0usize;
    for sweep in 1..=total {
        gibbs_sweep(&mut state, data, config, &mut rng)?;
        if sweep > mcmc.n_burn && (sweep - mcmc.n_burn) % mcmc.thin == 0 {
            for (slot, &l) in row.iter_mut().zip(state.labels()) {
                *slot = l as u32 + 1;
            }
            let canon = canonicalize_labels(&row);
            trace.push_row(&canon);
            accumulate_predictive(&state, config, eval_points, &mut density_acc)?;
            saved += 1;
            if saved == mcmc.n_save {
                break;
            }
        }
    }

    let scale = 1.0 / saved as f64;
    let density = density_acc.iter().map(|d| d * scale).collect();
    Ok((trace, PredictivePoints { points: eval_points.to_vec(), density }))
}

fn is_degenerate(data: &[[f64; 2]], dim: usize) -> bool {
    if data.len() < 2 {
        return false;
    }
    let first = data[0];
    data.iter().all(|p| p[0] == first[0] && (dim == 1 || p[1] == first[1]))
}

/// Adds the current state's predictive density at each evaluation point:
/// Σ_k m_k/(c+n) · kernel(z | θ_k) + c/(c+n) · prior-predictive(z).
fn accumulate_predictive(
    state: &DpmState,
    config: &DpmConfig,
    eval_points: &[[f64; 2]],
    acc: &mut [f64],
) -> Result<()> {
    if eval_points.is_empty() {
        return Ok(());
    }
    let n = state.n_points() as f64;
    let c = state.concentration();
    let denom = c + n;
    let hypers = state.hypers_with(config.nu_eff());
    let prior = StudentPred::from_posterior(
        config.dim,
        &niw_posterior(config.dim, &hypers, &ClusterStats::default()),
    )?;
    let kernels: Vec<(f64, GaussKernel)> = state
        .clusters
        .iter()
        .map(|cl| {
            GaussKernel::new(config.dim, cl.mean, &cl.cov)
                .map(|k| (cl.stats.count as f64 / denom, k))
        })
        .collect::<Result<_>>()?;
    let new_weight = c / denom;
    for (slot, z) in acc.iter_mut().zip(eval_points) {
        let mut dens = new_weight * prior.logpdf(*z).exp();
        for (w, kernel) in &kernels {
            dens += w * kernel.logpdf(*z).exp();
        }
        *slot += dens;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpm::config::ConcentrationSpec;
    use crate::stats::sample_normal;

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize_labels(&[3, 3, 1, 2]), vec![1, 1, 2, 3]);
        assert_eq!(canonicalize_labels(&[1, 2, 3]), vec![1, 2, 3]);
        let twice = canonicalize_labels(&canonicalize_labels(&[9, 4, 9, 7]));
        assert_eq!(twice, canonicalize_labels(&[9, 4, 9, 7]));
    }

    #[test]
    fn zero_saves_is_an_error() {
        let cfg = DpmConfig::ctbf_marginal();
        let err = run_chain(
            &[[0.0, 0.0]],
            &cfg,
            &McmcSettings::new(5, 0, 1),
            &[],
            RngStream::new(1),
        );
        assert!(matches!(err, Err(Error::NoSavedIterations)));
    }

    #[test]
    fn empty_conditioning_set_gives_symmetric_prior_predictive() {
        // no data: the predictive is the base-measure Student-t about μ0
        let mut cfg = DpmConfig::ctbf_marginal();
        cfg.mu0 = crate::dpm::Mu0Spec::Fixed([0.6, 0.0]);
        cfg.k0 = crate::dpm::K0Spec::Fixed(2.0);
        cfg.psi = crate::dpm::PsiSpec::Fixed(crate::stats::SymMatrix::new_1d(1.1));
        let eval = [[0.6 + 0.9, 0.0], [0.6 - 0.9, 0.0], [0.6, 0.0]];
        let (_, pred) = run_chain(
            &[],
            &cfg,
            &McmcSettings::new(0, 1, 1),
            &eval,
            RngStream::new(2),
        )
        .unwrap();
        assert!((pred.density[0] - pred.density[1]).abs() < 1e-10);
        assert!(pred.density[2] > pred.density[0]);
    }

    #[test]
    fn empty_eval_points_allowed() {
        let cfg = DpmConfig::ctbf_marginal();
        let data = [[0.1, 0.0], [0.2, 0.0], [-0.4, 0.0]];
        let (trace, pred) =
            run_chain(&data, &cfg, &McmcSettings::new(5, 4, 2), &[], RngStream::new(3)).unwrap();
        assert_eq!(trace.n_saved(), 4);
        assert_eq!(trace.n_points(), 3);
        assert!(pred.is_empty());
    }

    #[test]
    fn trace_rows_are_canonical_partitions() {
        let mut cfg = DpmConfig::ctbf_marginal();
        cfg.concentration = ConcentrationSpec::Fixed(2.0);
        let mut r = RngStream::new(17).rng();
        let data: Vec<[f64; 2]> = (0..25)
            .map(|_| [sample_normal(0.0, 1.0, &mut r).unwrap(), 0.0])
            .collect();
        let (trace, _) =
            run_chain(&data, &cfg, &McmcSettings::new(20, 30, 2), &[], RngStream::new(4)).unwrap();
        for s in 0..trace.n_saved() {
            let row = trace.row(s);
            let k = trace.k_at(s) as usize;
            // surjection onto 1..K
            let mut seen = vec![false; k];
            for &l in row {
                assert!(l >= 1 && l as usize <= k);
                seen[l as usize - 1] = true;
            }
            assert!(seen.iter().all(|&b| b));
            assert_eq!(canonicalize_labels(row), row);
        }
    }

    #[test]
    fn degenerate_data_flagged_and_survives() {
        let cfg = DpmConfig::ctbf_marginal();
        let data = vec![[1.5, 0.0]; 12];
        let (trace, _) =
            run_chain(&data, &cfg, &McmcSettings::new(10, 10, 1), &[], RngStream::new(5)).unwrap();
        assert!(trace.warnings().iter().any(|w| w.contains("degenerate")));
        assert_eq!(trace.n_saved(), 10);
    }

    #[test]
    fn exchangeability_of_keyed_runs() {
        // permuting rows together with their keys permutes trace columns
        let mut cfg = DpmConfig::ctbf_marginal();
        cfg.concentration = ConcentrationSpec::Fixed(3.0);
        let mut r = RngStream::new(23).rng();
        let data: Vec<[f64; 2]> = (0..18)
            .map(|_| [sample_normal(0.0, 1.0, &mut r).unwrap(), 0.0])
            .collect();
        let keys: Vec<u64> = (0..18).collect();
        let mcmc = McmcSettings::new(10, 20, 1);
        let stream = RngStream::new(77);
        let (trace_a, _) = run_chain_keyed(&data, &keys, &cfg, &mcmc, &[], stream).unwrap();

        // rotate rows by 5, moving keys with them
        let shift = 5usize;
        let perm: Vec<usize> = (0..18).map(|i| (i + shift) % 18).collect();
        let data_b: Vec<[f64; 2]> = perm.iter().map(|&i| data[i]).collect();
        let keys_b: Vec<u64> = perm.iter().map(|&i| keys[i]).collect();
        let (trace_b, _) = run_chain_keyed(&data_b, &keys_b, &cfg, &mcmc, &[], stream).unwrap();

        assert_eq!(trace_a.n_saved(), trace_b.n_saved());
        for s in 0..trace_a.n_saved() {
            let row_a = trace_a.row(s);
            let row_b = trace_b.row(s);
            // column i of run B holds original point perm[i]
            let gathered: Vec<u32> = (0..18).map(|i| row_a[perm[i]]).collect();
            assert_eq!(canonicalize_labels(&gathered), canonicalize_labels(row_b), "iteration {s}");
        }
    }

    #[test]
    fn restrict_recanonicalizes() {
        let mut trace = AllocationTrace::new(4, McmcSettings::new(0, 2, 1));
        trace.push_row(&[1, 2, 2, 3]);
        trace.push_row(&[1, 1, 2, 2]);
        let r = trace.restrict(&[1, 3]).unwrap();
        assert_eq!(r.row(0), &[1, 2]);
        assert_eq!(r.row(1), &[1, 2]);
        assert_eq!(r.k_at(0), 2);
        assert!(trace.restrict(&[9]).is_err());
    }
}
