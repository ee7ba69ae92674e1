//! Property tests for the pure algebraic pieces.

use proptest::prelude::*;

use depscreen::ctbf::{chi_square, log_bf, log_marginal_m0, log_marginal_m1, ContingencyTable, CtbfConfig};
use depscreen::dpm::canonicalize_labels;
use depscreen::mixmod::{estimate_pi, pi_log_posterior_grid, EnsembleConfig, PredictiveValues};
use depscreen::screen::{load_results, persist_results, OutputFormat, PairResult, ScreenPlan};
use depscreen::sim::roc;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent_and_dense(raw in prop::collection::vec(1u32..9, 1..40)) {
        let once = canonicalize_labels(&raw);
        prop_assert_eq!(&canonicalize_labels(&once), &once);
        // labels form 1..K with no gaps
        let k = *once.iter().max().unwrap();
        for l in 1..=k {
            prop_assert!(once.contains(&l));
        }
        // same partition as the input
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                prop_assert_eq!(raw[i] == raw[j], once[i] == once[j]);
            }
        }
    }

    #[test]
    fn table_margins_are_consistent(
        labels in prop::collection::vec((1u32..5, 1u32..4), 2..60)
    ) {
        let lx: Vec<u32> = labels.iter().map(|&(a, _)| a).collect();
        let ly: Vec<u32> = labels.iter().map(|&(_, b)| b).collect();
        let t = ContingencyTable::from_labels(&canonicalize_labels(&lx), &canonicalize_labels(&ly)).unwrap();
        let row_sum: u32 = t.row_margins().iter().sum();
        let col_sum: u32 = t.col_margins().iter().sum();
        prop_assert_eq!(row_sum, t.n());
        prop_assert_eq!(col_sum, t.n());
        for k in 0..t.kx() {
            let s: u32 = (0..t.ky()).map(|l| t.count(k, l)).sum();
            prop_assert_eq!(s, t.row_margins()[k]);
        }
    }

    #[test]
    fn log_bf_invariant_under_permutation_and_transpose(
        counts in prop::collection::vec(0u32..12, 6),
        alpha in prop::sample::select(vec![0.5f64, 1.0, 2.0]),
        swap_rows in any::<bool>(),
        perm_cols in 0usize..6,
    ) {
        prop_assume!(counts.iter().sum::<u32>() > 0);
        let cfg = CtbfConfig::constant_alpha(alpha);
        let t = ContingencyTable::from_counts(2, 3, counts.clone()).unwrap();
        let base = log_bf(&t, &cfg);

        // arbitrary row swap and column rotation
        let rows: Vec<Vec<u32>> = vec![counts[0..3].to_vec(), counts[3..6].to_vec()];
        let rows = if swap_rows { vec![rows[1].clone(), rows[0].clone()] } else { rows };
        let rot = perm_cols % 3;
        let permuted: Vec<u32> = rows
            .iter()
            .flat_map(|r| (0..3).map(move |c| r[(c + rot) % 3]))
            .collect();
        let tp = ContingencyTable::from_counts(2, 3, permuted).unwrap();
        prop_assert!((log_bf(&tp, &cfg) - base).abs() < 1e-9);
        prop_assert!((log_bf(&t.transpose(), &cfg) - base).abs() < 1e-9);

        // decomposition identity holds everywhere
        let diff = log_marginal_m0(&t, &cfg) - log_marginal_m1(&t, &cfg);
        prop_assert!((base - diff).abs() < 1e-10);

        // chi-squared statistic shares the invariances
        let c = chi_square(&t);
        prop_assert!((chi_square(&t.transpose()).statistic - c.statistic).abs() < 1e-9);
    }

    #[test]
    fn roc_complementarity(
        dep in prop::collection::vec(0.0f64..1.0, 1..30),
        null in prop::collection::vec(0.0f64..1.0, 1..30),
    ) {
        let a = roc(&dep, &null).unwrap();
        let b = roc(&null, &dep).unwrap();
        prop_assert!((a.auc + b.auc - 1.0).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&a.auc));
    }

    #[test]
    fn estimate_pi_shift_invariance(
        logs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 1..20),
        shift in -200.0f64..200.0,
    ) {
        let f1: Vec<f64> = logs.iter().map(|&(a, _, _)| a).collect();
        let f0x: Vec<f64> = logs.iter().map(|&(_, b, _)| b).collect();
        let f0y: Vec<f64> = logs.iter().map(|&(_, _, c)| c).collect();
        let cfg = EnsembleConfig { eta: 1e-3, ..Default::default() };
        let pv = PredictiveValues::from_log_densities(f1.clone(), f0x.clone(), f0y.clone()).unwrap();
        let base = estimate_pi(pi_log_posterior_grid(&pv, &cfg).unwrap()).unwrap();

        let shifted = PredictiveValues::from_log_densities(
            f1.iter().map(|v| v + shift).collect(),
            f0x.iter().map(|v| v + 0.5 * shift).collect(),
            f0y.iter().map(|v| v + 0.5 * shift).collect(),
        ).unwrap();
        let moved = estimate_pi(pi_log_posterior_grid(&shifted, &cfg).unwrap()).unwrap();
        prop_assert!((base.pi_hat - moved.pi_hat).abs() < 1e-9);
        prop_assert!(base.pi_hat >= cfg.eta && base.pi_hat <= 1.0 - cfg.eta);
    }

    #[test]
    fn results_roundtrip_through_tsv_and_json(
        entries in prop::collection::vec(
            (0usize..20, 0usize..20, 0usize..500,
             prop::option::of(0.0f64..1.0),
             prop::option::of(0.0f64..1.0),
             prop::option::of(-2.0f64..4.0),
             any::<bool>()),
            0..12
        )
    ) {
        let results: Vec<PairResult> = entries
            .iter()
            .map(|&(i, j, n, p_dep, pi_hat, mi, skipped)| PairResult {
                i,
                j: j + i + 1,
                n_complete: n,
                p_dep,
                pi_hat,
                mi,
                chi2_stat: p_dep.map(|v| v * 10.0),
                chi2_p: p_dep.map(|v| 1.0 - v),
                status: if skipped { vec!["skipped-too-few-rows".to_string()] } else { vec![] },
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let plan = ScreenPlan::default();
        for format in [OutputFormat::Tsv, OutputFormat::Json] {
            let path = dir.path().join(match format {
                OutputFormat::Tsv => "r.tsv",
                OutputFormat::Json => "r.json",
            });
            persist_results(&results, &plan, &path, format).unwrap();
            let back = load_results(&path, format).unwrap();
            prop_assert_eq!(&results, &back);
        }
    }
}
