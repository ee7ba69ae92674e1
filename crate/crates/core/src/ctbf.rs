//! Dependence measure from contingency tables over cluster allocations.
//!
//! For each saved Gibbs iteration, the two marginal cluster-label vectors
//! induce a K_X × K_Y table of joint counts. A conjugate multinomial-
//! Dirichlet model gives closed-form marginal likelihoods for "independent
//! margins" versus "free cells"; their ratio is the Bayes factor, and the
//! posterior probability of dependence (at even prior odds) averaged over
//! iterations is the reported score. A chi-squared variant and a single
//! representative-partition selection are also provided.

use serde::{Deserialize, Serialize};

use crate::dpm::AllocationTrace;
use crate::stats::{lgamma_raw, reg_gamma_upper};
use crate::{Error, Result};

/// Joint count table with margins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    kx: usize,
    ky: usize,
    counts: Vec<u32>,
    row_margins: Vec<u32>,
    col_margins: Vec<u32>,
    n: u32,
    trimmed: bool,
}

impl ContingencyTable {
    /// Counts co-occurrences of the two label vectors:
    /// m_kl = #{i : x_i = k, y_i = l}, with K read off the label maxima.
    pub fn from_labels(labels_x: &[u32], labels_y: &[u32]) -> Result<ContingencyTable> {
        if labels_x.len() != labels_y.len() {
            return Err(Error::invalid(format!(
                "label vectors must have equal length, got {} and {}",
                labels_x.len(),
                labels_y.len()
            )));
        }
        if labels_x.is_empty() {
            return Err(Error::invalid("label vectors must be nonempty"));
        }
        if labels_x.iter().chain(labels_y.iter()).any(|&l| l == 0) {
            return Err(Error::invalid("labels must be positive (1-based)"));
        }
        let kx = *labels_x.iter().max().unwrap() as usize;
        let ky = *labels_y.iter().max().unwrap() as usize;
        let mut counts = vec![0u32; kx * ky];
        for (&a, &b) in labels_x.iter().zip(labels_y) {
            counts[(a as usize - 1) * ky + (b as usize - 1)] += 1;
        }
        Self::from_raw(kx, ky, counts)
    }

    /// Builds from a row-major count matrix. The structure is kept as given
    /// (all-zero rows or columns change the induced prior totals, so they
    /// are never dropped silently); use [`ContingencyTable::trim`] to reduce.
    pub fn from_counts(kx: usize, ky: usize, counts: Vec<u32>) -> Result<ContingencyTable> {
        if kx == 0 || ky == 0 || counts.len() != kx * ky {
            return Err(Error::invalid("count matrix shape mismatch"));
        }
        Self::from_raw(kx, ky, counts)
    }

    fn from_raw(kx: usize, ky: usize, counts: Vec<u32>) -> Result<ContingencyTable> {
        let mut row_margins = vec![0u32; kx];
        let mut col_margins = vec![0u32; ky];
        for k in 0..kx {
            for l in 0..ky {
                let c = counts[k * ky + l];
                row_margins[k] += c;
                col_margins[l] += c;
            }
        }
        let n: u32 = row_margins.iter().sum();
        if n == 0 {
            return Err(Error::invalid("table has no observations"));
        }
        Ok(ContingencyTable { kx, ky, counts, row_margins, col_margins, n, trimmed: false })
    }

    pub fn has_empty_margins(&self) -> bool {
        self.row_margins.iter().any(|&m| m == 0) || self.col_margins.iter().any(|&m| m == 0)
    }

    /// Drops all-zero rows and columns, marking the result as trimmed.
    pub fn trim(&self) -> ContingencyTable {
        if !self.has_empty_margins() {
            return self.clone();
        }
        let keep_rows: Vec<usize> = (0..self.kx).filter(|&k| self.row_margins[k] > 0).collect();
        let keep_cols: Vec<usize> = (0..self.ky).filter(|&l| self.col_margins[l] > 0).collect();
        let mut counts = Vec::with_capacity(keep_rows.len() * keep_cols.len());
        for &k in &keep_rows {
            for &l in &keep_cols {
                counts.push(self.count(k, l));
            }
        }
        ContingencyTable {
            kx: keep_rows.len(),
            ky: keep_cols.len(),
            counts,
            row_margins: keep_rows.iter().map(|&k| self.row_margins[k]).collect(),
            col_margins: keep_cols.iter().map(|&l| self.col_margins[l]).collect(),
            n: self.n,
            trimmed: true,
        }
    }

    pub fn kx(&self) -> usize {
        self.kx
    }

    pub fn ky(&self) -> usize {
        self.ky
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn count(&self, k: usize, l: usize) -> u32 {
        self.counts[k * self.ky + l]
    }

    pub fn row_margins(&self) -> &[u32] {
        &self.row_margins
    }

    pub fn col_margins(&self) -> &[u32] {
        &self.col_margins
    }

    /// True when this table was produced by dropping empty rows/columns.
    pub fn trimmed(&self) -> bool {
        self.trimmed
    }

    pub fn transpose(&self) -> ContingencyTable {
        let mut counts = vec![0u32; self.kx * self.ky];
        for k in 0..self.kx {
            for l in 0..self.ky {
                counts[l * self.kx + k] = self.count(k, l);
            }
        }
        ContingencyTable {
            kx: self.ky,
            ky: self.kx,
            counts,
            row_margins: self.col_margins.clone(),
            col_margins: self.row_margins.clone(),
            n: self.n,
            trimmed: self.trimmed,
        }
    }
}

/// Cell-prior rule for the Dirichlet prior on the cell probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellPrior {
    /// α_kl = value for every cell (total mass a = K_X·K_Y·value).
    Constant(f64),
    /// α_kl = a / (K_X·K_Y) for a given total mass a.
    TotalMass(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtbfConfig {
    pub cell_prior: CellPrior,
}

impl Default for CtbfConfig {
    fn default() -> Self {
        CtbfConfig { cell_prior: CellPrior::Constant(crate::dpm::defaults::CELL_ALPHA) }
    }
}

impl CtbfConfig {
    pub fn constant_alpha(alpha: f64) -> CtbfConfig {
        CtbfConfig { cell_prior: CellPrior::Constant(alpha) }
    }

    pub fn total_mass(a: f64) -> CtbfConfig {
        CtbfConfig { cell_prior: CellPrior::TotalMass(a) }
    }

    /// Per-cell α for a K_X × K_Y table.
    pub fn alpha_cell(&self, kx: usize, ky: usize) -> f64 {
        match self.cell_prior {
            CellPrior::Constant(a) => a,
            CellPrior::TotalMass(a) => a / (kx * ky) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = match self.cell_prior {
            CellPrior::Constant(a) | CellPrior::TotalMass(a) => a,
        };
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("cell prior mass must be > 0, got {a}")));
        }
        Ok(())
    }
}

// ln n! − Σ ln m_kl!: the multinomial coefficient shared by both models.
fn log_multinomial_coeff(table: &ContingencyTable) -> f64 {
    let mut v = lgamma_raw(table.n as f64 + 1.0);
    for &m in &table.counts {
        if m > 1 {
            v -= lgamma_raw(m as f64 + 1.0);
        }
    }
    v
}

/// Log marginal likelihood of the table with free cell probabilities
/// integrated against Dir(α): the Dirichlet-multinomial mass of the counts.
pub fn log_marginal_m1(table: &ContingencyTable, config: &CtbfConfig) -> f64 {
    let alpha = config.alpha_cell(table.kx, table.ky);
    let a = alpha * (table.kx * table.ky) as f64;
    let mut v = log_multinomial_coeff(table);
    v += lgamma_raw(a) - lgamma_raw(a + table.n as f64);
    let lg_alpha = lgamma_raw(alpha);
    for &m in &table.counts {
        if m > 0 {
            v += lgamma_raw(alpha + m as f64) - lg_alpha;
        }
    }
    v
}

/// Log marginal likelihood of the table under independent margins, each with
/// its induced Dirichlet prior.
pub fn log_marginal_m0(table: &ContingencyTable, config: &CtbfConfig) -> f64 {
    let alpha = config.alpha_cell(table.kx, table.ky);
    let a = alpha * (table.kx * table.ky) as f64;
    let alpha_row = alpha * table.ky as f64;
    let alpha_col = alpha * table.kx as f64;
    let mut v = log_multinomial_coeff(table);
    v += 2.0 * (lgamma_raw(a) - lgamma_raw(a + table.n as f64));
    for &m in &table.row_margins {
        v += lgamma_raw(alpha_row + m as f64) - lgamma_raw(alpha_row);
    }
    for &m in &table.col_margins {
        v += lgamma_raw(alpha_col + m as f64) - lgamma_raw(alpha_col);
    }
    v
}

/// Log Bayes factor of independence against dependence. The shared
/// multinomial coefficient cancels, leaving only gamma-function ratios of
/// the margins against the cells.
pub fn log_bf(table: &ContingencyTable, config: &CtbfConfig) -> f64 {
    let alpha = config.alpha_cell(table.kx, table.ky);
    let a = alpha * (table.kx * table.ky) as f64;
    let alpha_row = alpha * table.ky as f64;
    let alpha_col = alpha * table.kx as f64;
    let n = table.n as f64;
    let mut v = lgamma_raw(a) - lgamma_raw(a + n);
    for &m in &table.row_margins {
        v += lgamma_raw(alpha_row + m as f64) - lgamma_raw(alpha_row);
    }
    for &m in &table.col_margins {
        v += lgamma_raw(alpha_col + m as f64) - lgamma_raw(alpha_col);
    }
    let lg_alpha = lgamma_raw(alpha);
    for &m in &table.counts {
        if m > 0 {
            v += lg_alpha - lgamma_raw(alpha + m as f64);
        }
    }
    v
}

/// Posterior probability of dependence at even prior odds, 1/(1 + BF),
/// computed without overflowing for extreme log Bayes factors.
pub fn posterior_prob_dep(log_bf: f64) -> f64 {
    if log_bf >= 0.0 {
        let e = (-log_bf).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + log_bf.exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    /// True when empty margins were dropped before computing.
    pub trimmed: bool,
}

/// Pearson chi-squared statistic of independence with its upper-tail
/// p-value on (K_X−1)(K_Y−1) degrees of freedom. Empty rows/columns (where
/// the expected counts are undefined) are dropped first and flagged; a 1×1
/// table has zero degrees of freedom and p-value 1.
pub fn chi_square(table: &ContingencyTable) -> ChiSquareResult {
    if table.has_empty_margins() {
        return chi_square(&table.trim());
    }
    let dof = (table.kx - 1) * (table.ky - 1);
    if dof == 0 {
        return ChiSquareResult { statistic: 0.0, p_value: 1.0, dof: 0, trimmed: table.trimmed };
    }
    let n = table.n as f64;
    let mut t = 0.0;
    for k in 0..table.kx {
        for l in 0..table.ky {
            let expected = table.row_margins[k] as f64 * table.col_margins[l] as f64 / n;
            let d = table.count(k, l) as f64 - expected;
            t += d * d / expected;
        }
    }
    let p_value = reg_gamma_upper(dof as f64 / 2.0, t / 2.0).unwrap_or(f64::NAN);
    ChiSquareResult { statistic: t, p_value, dof, trimmed: table.trimmed }
}

/// Result of averaging the per-iteration dependence tests over a trace pair.
#[derive(Clone, Debug)]
pub struct CtbfResult {
    /// Mean posterior probability of dependence over the saved iterations.
    pub p_dep: f64,
    pub per_iter_prob: Vec<f64>,
    pub per_iter_log_bf: Vec<f64>,
    /// Chi-squared test on the representative-partition table, when requested.
    pub chi_square: Option<ChiSquareResult>,
    pub iterations: usize,
}

/// Builds the table of every saved iteration from the aligned traces and
/// averages the per-iteration posterior probabilities of dependence.
pub fn p_dep_over_trace(
    trace_x: &AllocationTrace,
    trace_y: &AllocationTrace,
    config: &CtbfConfig,
) -> Result<CtbfResult> {
    config.validate()?;
    if trace_x.n_saved() == 0 {
        return Err(Error::invalid("traces have no saved iterations"));
    }
    if trace_x.n_saved() != trace_y.n_saved() || trace_x.n_points() != trace_y.n_points() {
        return Err(Error::invalid(format!(
            "misaligned traces: {}x{} vs {}x{}",
            trace_x.n_saved(),
            trace_x.n_points(),
            trace_y.n_saved(),
            trace_y.n_points()
        )));
    }
    let s = trace_x.n_saved();
    let mut per_iter_prob = Vec::with_capacity(s);
    let mut per_iter_log_bf = Vec::with_capacity(s);
    let mut total = 0.0;
    for j in 0..s {
        let table = ContingencyTable::from_labels(trace_x.row(j), trace_y.row(j))?;
        let lbf = log_bf(&table, config);
        let p = posterior_prob_dep(lbf);
        per_iter_log_bf.push(lbf);
        per_iter_prob.push(p);
        total += p;
    }
    Ok(CtbfResult {
        p_dep: total / s as f64,
        per_iter_prob,
        per_iter_log_bf,
        chi_square: None,
        iterations: s,
    })
}

/// Representative partition by least squared deviation from the average
/// co-clustering matrix; ties go to the earliest iteration.
pub fn dahl_partition(trace: &AllocationTrace) -> Result<Vec<u32>> {
    Ok(trace.row(dahl_iteration(trace)?).to_vec())
}

/// Index of the saved iteration selected by the least-squares criterion.
pub fn dahl_iteration(trace: &AllocationTrace) -> Result<usize> {
    let s = trace.n_saved();
    let n = trace.n_points();
    if s == 0 {
        return Err(Error::invalid("trace has no saved iterations"));
    }
    // average co-clustering matrix (upper triangle)
    let mut pbar = vec![0.0f64; n * n];
    for j in 0..s {
        let row = trace.row(j);
        for i in 0..n {
            let li = row[i];
            let base = i * n;
            for ip in (i + 1)..n {
                if li == row[ip] {
                    pbar[base + ip] += 1.0;
                }
            }
        }
    }
    let scale = 1.0 / s as f64;
    for v in &mut pbar {
        *v *= scale;
    }
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for j in 0..s {
        let row = trace.row(j);
        let mut score = 0.0;
        for i in 0..n {
            let li = row[i];
            let base = i * n;
            for ip in (i + 1)..n {
                let ind = if li == row[ip] { 1.0 } else { 0.0 };
                let d = ind - pbar[base + ip];
                score += d * d;
            }
        }
        if score < best_score - 1e-12 {
            best_score = score;
            best = j;
        }
    }
    Ok(best)
}

/// Chi-squared test on the table induced by the representative partitions of
/// the two traces.
pub fn dahl_chi_square(
    trace_x: &AllocationTrace,
    trace_y: &AllocationTrace,
) -> Result<ChiSquareResult> {
    let px = dahl_partition(trace_x)?;
    let py = dahl_partition(trace_y)?;
    let table = ContingencyTable::from_labels(&px, &py)?;
    Ok(chi_square(&table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpm::McmcSettings;

    fn table(rows: &[&[u32]]) -> ContingencyTable {
        let kx = rows.len();
        let ky = rows[0].len();
        let counts: Vec<u32> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        ContingencyTable::from_counts(kx, ky, counts).unwrap()
    }

    fn trace_from_rows(rows: &[Vec<u32>]) -> AllocationTrace {
        let mut t = AllocationTrace::new(rows[0].len(), McmcSettings::new(0, rows.len(), 1));
        for r in rows {
            t.push_row(r);
        }
        t
    }

    // reuse of the crate-internal constructor for hand-made traces
    use crate::dpm::AllocationTrace;

    #[test]
    fn build_table_examples() {
        let t = ContingencyTable::from_labels(&[1, 1, 2], &[1, 2, 2]).unwrap();
        assert_eq!((t.kx(), t.ky()), (2, 2));
        assert_eq!(t.count(0, 0), 1);
        assert_eq!(t.count(0, 1), 1);
        assert_eq!(t.count(1, 0), 0);
        assert_eq!(t.count(1, 1), 1);
        assert_eq!(t.row_margins(), &[2, 1]);
        assert_eq!(t.col_margins(), &[1, 2]);

        let t = ContingencyTable::from_labels(&[1; 7], &[1; 7]).unwrap();
        assert_eq!((t.kx(), t.ky()), (1, 1));
        assert_eq!(t.count(0, 0), 7);

        assert!(ContingencyTable::from_labels(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn margins_match_label_histograms() {
        let lx = [1u32, 3, 2, 3, 1, 1, 2, 3, 3];
        let ly = [2u32, 1, 2, 2, 1, 2, 1, 1, 2];
        let t = ContingencyTable::from_labels(&lx, &ly).unwrap();
        for k in 0..t.kx() {
            let h = lx.iter().filter(|&&v| v as usize == k + 1).count() as u32;
            assert_eq!(t.row_margins()[k], h);
        }
        for l in 0..t.ky() {
            let h = ly.iter().filter(|&&v| v as usize == l + 1).count() as u32;
            assert_eq!(t.col_margins()[l], h);
        }
    }

    #[test]
    fn diagonal_table_reference_value() {
        let t = table(&[&[10, 0], &[0, 10]]);
        let cfg = CtbfConfig::default();
        let lbf = log_bf(&t, &cfg);
        assert!((lbf - (-11.699)).abs() < 0.01, "log BF {lbf}");
        let p = posterior_prob_dep(lbf);
        assert!((p - (1.0 - 8.3e-6)).abs() < 2e-6, "p {p}");
    }

    #[test]
    fn single_margin_cancels_exactly() {
        let t = table(&[&[3, 9, 1]]);
        let lbf = log_bf(&t, &CtbfConfig::default());
        assert!(lbf.abs() < 1e-12);
        assert!((posterior_prob_dep(lbf) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bf_equals_marginal_difference() {
        let cfg = CtbfConfig::default();
        let t = table(&[&[4, 1, 0], &[2, 7, 3]]);
        let diff = log_marginal_m0(&t, &cfg) - log_marginal_m1(&t, &cfg);
        assert!((log_bf(&t, &cfg) - diff).abs() < 1e-10);
        let cfg = CtbfConfig::total_mass(2.5);
        let diff = log_marginal_m0(&t, &cfg) - log_marginal_m1(&t, &cfg);
        assert!((log_bf(&t, &cfg) - diff).abs() < 1e-10);
    }

    #[test]
    fn marginal_m1_normalizes_over_tables() {
        // all 2x2 tables with total n=5
        let cfg = CtbfConfig::default();
        let n = 5u32;
        let mut total = 0.0;
        for a in 0..=n {
            for b in 0..=(n - a) {
                for c in 0..=(n - a - b) {
                    let d = n - a - b - c;
                    let t = ContingencyTable::from_counts(2, 2, vec![a, b, c, d]).unwrap();
                    total += log_marginal_m1(&t, &cfg).exp();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-8, "sum of table masses {total}");
    }

    #[test]
    fn posterior_prob_saturates_safely() {
        assert!((posterior_prob_dep(0.0) - 0.5).abs() < 1e-15);
        let p = posterior_prob_dep(700.0);
        assert!(p >= 0.0 && p < 1e-300);
        let p = posterior_prob_dep(-700.0);
        assert!(p <= 1.0 && p >= 1.0 - 1e-15);
        assert!((posterior_prob_dep(-11.699) - 0.9999917).abs() < 1e-6);
    }

    #[test]
    fn permutation_and_transpose_invariance() {
        let cfg = CtbfConfig::default();
        let t = table(&[&[4, 1, 0], &[2, 7, 3]]);
        let swapped_rows = table(&[&[2, 7, 3], &[4, 1, 0]]);
        let swapped_cols = table(&[&[0, 1, 4], &[3, 7, 2]]);
        assert!((log_bf(&t, &cfg) - log_bf(&swapped_rows, &cfg)).abs() < 1e-10);
        assert!((log_bf(&t, &cfg) - log_bf(&swapped_cols, &cfg)).abs() < 1e-10);
        assert!((log_bf(&t, &cfg) - log_bf(&t.transpose(), &cfg)).abs() < 1e-10);
        let c = chi_square(&t);
        assert!((c.statistic - chi_square(&t.transpose()).statistic).abs() < 1e-10);
    }

    #[test]
    fn diagonal_beats_proportional_at_same_margins() {
        let cfg = CtbfConfig::default();
        let diag = table(&[&[10, 0], &[0, 10]]);
        let prop = table(&[&[5, 5], &[5, 5]]);
        assert!(log_bf(&diag, &cfg) < log_bf(&prop, &cfg));
    }

    #[test]
    fn chi_square_examples() {
        let c = chi_square(&table(&[&[5, 5], &[5, 5]]));
        assert!(c.statistic.abs() < 1e-12);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        assert_eq!(c.dof, 1);

        let c = chi_square(&table(&[&[10, 0], &[0, 10]]));
        assert!((c.statistic - 20.0).abs() < 1e-12);
        assert_eq!(c.dof, 1);
        assert!(c.p_value < 1e-4);

        let c = chi_square(&table(&[&[7]]));
        assert_eq!(c.dof, 0);
        assert!((c.p_value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_margins_trimmed_with_flag() {
        let t = ContingencyTable::from_counts(3, 2, vec![2, 0, 0, 0, 5, 1]).unwrap();
        assert!(t.has_empty_margins());
        assert!(!t.trimmed());
        let reduced = t.trim();
        assert!(reduced.trimmed());
        assert_eq!((reduced.kx(), reduced.ky()), (2, 2));
        assert_eq!(reduced.n(), 8);
        // chi_square drops the empty row internally and flags it
        let c = chi_square(&t);
        assert_eq!(c.dof, 1);
        assert!(c.trimmed);
        assert!((c.statistic - chi_square(&reduced).statistic).abs() < 1e-12);
    }

    #[test]
    fn p_dep_over_trace_examples() {
        let cfg = CtbfConfig::default();
        // identical diagonal tables every iteration: p_dep = 1/(1+BF)
        let rows_x = vec![vec![1u32, 1, 2, 2], vec![1, 1, 2, 2], vec![1, 1, 2, 2]];
        let rows_y = rows_x.clone();
        let tx = trace_from_rows(&rows_x);
        let ty = trace_from_rows(&rows_y);
        let res = p_dep_over_trace(&tx, &ty, &cfg).unwrap();
        let table = ContingencyTable::from_labels(&rows_x[0], &rows_y[0]).unwrap();
        let expected = posterior_prob_dep(log_bf(&table, &cfg));
        assert!((res.p_dep - expected).abs() < 1e-12);
        assert_eq!(res.iterations, 3);

        // one side constant at K = 1 cancels every iteration
        let ones = vec![vec![1u32; 4]; 3];
        let ty = trace_from_rows(&ones);
        let res = p_dep_over_trace(&tx, &ty, &cfg).unwrap();
        assert!((res.p_dep - 0.5).abs() < 1e-12);

        // misaligned traces are rejected
        let short = trace_from_rows(&rows_x[..2].to_vec());
        assert!(p_dep_over_trace(&tx, &short, &cfg).is_err());
    }

    #[test]
    fn dahl_selects_minimizer_with_earliest_tie() {
        // identical iterations: that partition wins
        let t = trace_from_rows(&vec![vec![1u32, 1, 2]; 4]);
        assert_eq!(dahl_partition(&t).unwrap(), vec![1, 1, 2]);

        // {12|3} vs {1|23}: scores tie, iteration 0 wins
        let t = trace_from_rows(&[vec![1, 1, 2], vec![1, 2, 2]]);
        assert_eq!(dahl_iteration(&t).unwrap(), 0);
        assert_eq!(dahl_partition(&t).unwrap(), vec![1, 1, 2]);
    }

    #[test]
    fn dahl_score_is_minimal_over_saved_partitions() {
        // spot-check the least-squares property on a random-ish trace
        let rows = vec![
            vec![1u32, 1, 2, 2, 3],
            vec![1, 2, 2, 2, 1],
            vec![1, 1, 1, 2, 2],
            vec![1, 1, 2, 2, 3],
            vec![1, 2, 3, 3, 2],
        ];
        let trace = trace_from_rows(&rows);
        let n = 5;
        let s = rows.len();
        let mut pbar = vec![0.0f64; n * n];
        for row in &rows {
            for i in 0..n {
                for j in 0..n {
                    if row[i] == row[j] {
                        pbar[i * n + j] += 1.0 / s as f64;
                    }
                }
            }
        }
        let score = |row: &[u32]| -> f64 {
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let ind = if row[i] == row[j] { 1.0 } else { 0.0 };
                    let d = ind - pbar[i * n + j];
                    v += d * d;
                }
            }
            v
        };
        let chosen = dahl_iteration(&trace).unwrap();
        for row in &rows {
            assert!(score(&rows[chosen]) <= score(row) + 1e-12);
        }
    }
}
