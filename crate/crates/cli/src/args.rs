//! Argument definitions and their translation into library plans.
//!
//! Every default shown by `--help` comes from the library's `defaults`
//! module, so the help text, the plans, and the unit tests cannot drift
//! apart.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use depscreen::ctbf::CtbfConfig;
use depscreen::dpm::{defaults, ConcentrationSpec, DpmConfig, McmcSettings};
use depscreen::mi::MiConfig;
use depscreen::mixmod::EnsembleConfig;
use depscreen::screen::{Method, ScreenPlan};

#[derive(Parser, Debug)]
#[command(
    name = "depscreen",
    version,
    about = "Screens tabular data for pairwise dependence with Bayesian nonparametric mixture measures, a chi-squared variant, and a k-NN mutual-information baseline",
    after_help = "Exit codes: 0 success; 1 partial failure (some pairs flagged); 2 usage error; 3 fatal error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Screen all variable pairs of a CSV dataset.
    Screen(ScreenArgs),
    /// Run synthetic power studies (ROC/AUC against permutation nulls).
    Simulate(SimulateArgs),
    /// Sweep prior hyperparameters on the sinusoidal scenario.
    Sensitivity(SensitivityArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Master seed for all RNG streams (env: DEPSCREEN_SEED).
    #[arg(long, global = true, env = "DEPSCREEN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = one per logical core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Print progress to standard error.
    #[arg(short, long, global = true, default_value_t = false)]
    pub verbose: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PriorArgs {
    /// Fixed concentration of the per-variable marginal chains.
    #[arg(long, default_value_t = defaults::CTBF_CONCENTRATION)]
    pub c0: f64,

    /// Gamma(shape,rate) hyperprior on the marginal-chain concentration,
    /// overriding --c0 (also applied to ensemble marginals).
    #[arg(long, value_parser = parse_gamma_pair, value_name = "SHAPE,RATE")]
    pub c0_gamma: Option<(f64, f64)>,

    /// Gamma(shape,rate) hyperprior on the ensemble chains' concentration.
    #[arg(long, value_parser = parse_gamma_pair, value_name = "SHAPE,RATE",
          default_value = "1,1")]
    pub c1_gamma: (f64, f64),

    /// Constant per-cell Dirichlet mass of the contingency-table prior.
    #[arg(long, default_value_t = defaults::CELL_ALPHA)]
    pub alpha_cell: f64,

    /// Total Dirichlet mass spread as a/(Kx*Ky) per cell (overrides
    /// --alpha-cell).
    #[arg(long)]
    pub alpha_total: Option<f64>,

    /// Beta prior a0 on the ensemble weight.
    #[arg(long, default_value_t = defaults::ENSEMBLE_A0)]
    pub a0: f64,

    /// Beta prior b0 on the ensemble weight.
    #[arg(long, default_value_t = defaults::ENSEMBLE_B0)]
    pub b0: f64,

    /// Grid interval of the ensemble line search.
    #[arg(long, value_parser = parse_eta, default_value_t = defaults::ENSEMBLE_ETA)]
    pub eta: f64,

    /// Neighbour count of the mutual-information estimator.
    #[arg(long, default_value_t = defaults::MI_NEIGHBOURS)]
    pub mi_k: usize,

    /// Burn-in sweeps.
    #[arg(long, default_value_t = defaults::MCMC_BURN)]
    pub n_burn: usize,

    /// Saved states per chain.
    #[arg(long, default_value_t = defaults::MCMC_SAVE)]
    pub n_save: usize,

    /// Keep one of every `thin` post-burn-in sweeps.
    #[arg(long, default_value_t = defaults::MCMC_THIN)]
    pub thin: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ScreenArgs {
    /// Input CSV (first row is the header; empty, NA, NaN are missing).
    #[arg(long)]
    pub input: PathBuf,

    /// Output results path.
    #[arg(long)]
    pub output: PathBuf,

    /// Output format.
    #[arg(long, default_value = "tsv", value_parser = ["tsv", "json"])]
    pub format: String,

    /// Methods to run.
    #[arg(long, value_delimiter = ',', default_value = "ctbf")]
    pub methods: Vec<Method>,

    /// Minimum complete rows for a pair to be tested.
    #[arg(long, default_value_t = defaults::MIN_COMPLETE_ROWS)]
    pub min_rows: usize,

    /// Column holding row identifiers (excluded from the numeric data).
    #[arg(long)]
    pub row_id_column: Option<String>,

    #[command(flatten)]
    pub priors: PriorArgs,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Output directory for scores.tsv, summary.tsv, roc.tsv.
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Grid preset: the full scenario-by-parameter grid at reduced
    /// (n=100, R=20) or paper (n=250, R=50) size.
    #[arg(long, value_parser = ["paper-4.2-quick", "paper-4.2-full"])]
    pub preset: Option<String>,

    /// Single scenario instead of a preset grid.
    #[arg(long)]
    pub scenario: Option<depscreen::sim::ScenarioKind>,

    /// Correlation values (normal scenario).
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,0.5,0.9")]
    pub rho: Vec<f64>,

    /// Noise levels (sinusoidal/parabolic/circular scenarios).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub phi: Vec<f64>,

    /// Sample size per replication.
    #[arg(long, default_value_t = 250)]
    pub n: usize,

    /// Replications per arm.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,

    /// Methods to run.
    #[arg(long, value_delimiter = ',', default_value = "ctbf,mi")]
    pub methods: Vec<Method>,

    #[command(flatten)]
    pub priors: PriorArgs,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SensitivityArgs {
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Which prior family to sweep: the contingency-table cell mass and
    /// concentration, or the ensemble Beta prior.
    #[arg(long, value_parser = ["ctbf", "mixmod"])]
    pub target: String,

    /// Cell-mass values swept when target = ctbf.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,5")]
    pub a_values: Vec<f64>,

    /// Concentration values swept when target = ctbf.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    pub c0_values: Vec<f64>,

    /// Beta prior pairs a0:b0 swept when target = mixmod.
    #[arg(long, value_delimiter = ',', value_parser = parse_colon_pair,
          default_value = "0.5:0.5,1:1,2:2,5:5")]
    pub beta_priors: Vec<(f64, f64)>,

    /// Noise levels of the sinusoidal scenario.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub phi: Vec<f64>,

    /// Sample size per replication.
    #[arg(long, default_value_t = 250)]
    pub n: usize,

    /// Replications per arm.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,

    #[command(flatten)]
    pub priors: PriorArgs,

    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_gamma_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected SHAPE,RATE, got '{s}'"));
    }
    let shape: f64 = parts[0].trim().parse().map_err(|e| format!("shape: {e}"))?;
    let rate: f64 = parts[1].trim().parse().map_err(|e| format!("rate: {e}"))?;
    if !(shape > 0.0 && rate > 0.0) {
        return Err("shape and rate must be positive".to_string());
    }
    Ok((shape, rate))
}

fn parse_colon_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("expected A0:B0, got '{s}'"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|e| format!("a0: {e}"))?;
    let b: f64 = parts[1].trim().parse().map_err(|e| format!("b0: {e}"))?;
    if !(a > 0.0 && b > 0.0) {
        return Err("a0 and b0 must be positive".to_string());
    }
    Ok((a, b))
}

fn parse_eta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v < 1.0) {
        return Err("grid interval must be in (0,1)".to_string());
    }
    Ok(v)
}

/// Builds the screening plan shared by every subcommand from the prior and
/// scheduling flags.
pub fn build_plan(
    priors: &PriorArgs,
    common: &CommonArgs,
    methods: &[Method],
    min_rows: usize,
) -> ScreenPlan {
    let mut ctbf_dpm = DpmConfig::ctbf_marginal();
    ctbf_dpm.concentration = match priors.c0_gamma {
        Some((shape, rate)) => ConcentrationSpec::Gamma { shape, rate },
        None => ConcentrationSpec::Fixed(priors.c0),
    };
    let mut mixmod_marginal = DpmConfig::mixmod_marginal();
    let mut mixmod_joint = DpmConfig::mixmod_joint();
    let (c1_shape, c1_rate) = priors.c1_gamma;
    mixmod_marginal.concentration = ConcentrationSpec::Gamma { shape: c1_shape, rate: c1_rate };
    mixmod_joint.concentration = ConcentrationSpec::Gamma { shape: c1_shape, rate: c1_rate };

    let ctbf_config = match priors.alpha_total {
        Some(a) => CtbfConfig::total_mass(a),
        None => CtbfConfig::constant_alpha(priors.alpha_cell),
    };

    ScreenPlan {
        methods: BTreeSet::from_iter(methods.iter().copied()),
        min_complete_rows: min_rows,
        mcmc: McmcSettings::new(priors.n_burn, priors.n_save, priors.thin),
        ctbf_dpm,
        mixmod_marginal_dpm: mixmod_marginal,
        mixmod_joint_dpm: mixmod_joint,
        ctbf_config,
        ensemble: EnsembleConfig { a0: priors.a0, b0: priors.b0, eta: priors.eta },
        mi: MiConfig { k: priors.mi_k },
        workers: common.workers,
        seed: common.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn screen_args_build_expected_plan() {
        let cli = Cli::try_parse_from([
            "depscreen", "screen", "--input", "data.csv", "--methods", "ctbf", "--seed", "7",
            "--output", "out.tsv",
        ])
        .unwrap();
        let Command::Screen(args) = cli.command else { panic!("wrong subcommand") };
        let plan = build_plan(&args.priors, &args.common, &args.methods, args.min_rows);
        assert_eq!(plan.methods, BTreeSet::from([Method::Ctbf]));
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.min_complete_rows, defaults::MIN_COMPLETE_ROWS);
        assert_eq!(plan.mcmc, McmcSettings::default());
        assert_eq!(
            plan.ctbf_dpm.concentration,
            ConcentrationSpec::Fixed(defaults::CTBF_CONCENTRATION)
        );
        assert_eq!(plan.ensemble.a0, defaults::ENSEMBLE_A0);
        assert_eq!(plan.mi.k, defaults::MI_NEIGHBOURS);
    }

    #[test]
    fn eta_zero_is_rejected_with_message() {
        let err = Cli::try_parse_from([
            "depscreen", "screen", "--input", "a.csv", "--output", "b.tsv", "--eta", "0",
        ])
        .unwrap_err();
        assert!(err.to_string().contains("grid interval must be in (0,1)"), "{err}");
    }

    #[test]
    fn method_lists_parse() {
        let cli = Cli::try_parse_from([
            "depscreen", "screen", "--input", "a.csv", "--output", "b.tsv", "--methods",
            "ctbf,mi,chisq",
        ])
        .unwrap();
        let Command::Screen(args) = cli.command else { panic!() };
        assert_eq!(args.methods, vec![Method::Ctbf, Method::Mi, Method::ChiSq]);
    }

    #[test]
    fn help_mentions_paper_defaults() {
        // every default surfaced by --help is the constant the tests pin
        let mut cmd = <Cli as clap::CommandFactory>::command();
        let help = cmd.render_long_help().to_string();
        assert!(help.contains("depscreen"));
        let mut screen_cmd = cmd.find_subcommand_mut("screen").unwrap().clone();
        let sub_help = screen_cmd.render_long_help().to_string();
        for needle in [
            format!("[default: {}]", defaults::CTBF_CONCENTRATION),
            format!("[default: {}]", defaults::CELL_ALPHA),
            format!("[default: {}]", defaults::ENSEMBLE_ETA),
            format!("[default: {}]", defaults::MCMC_BURN),
            format!("[default: {}]", defaults::MCMC_SAVE),
            format!("[default: {}]", defaults::MI_NEIGHBOURS),
            format!("[default: {}]", defaults::MIN_COMPLETE_ROWS),
        ] {
            assert!(sub_help.contains(&needle), "help missing {needle}:\n{sub_help}");
        }
    }

    #[test]
    fn gamma_pair_validation() {
        assert!(parse_gamma_pair("1,1").is_ok());
        assert!(parse_gamma_pair("1").is_err());
        assert!(parse_gamma_pair("-1,2").is_err());
        assert_eq!(parse_colon_pair("0.5:0.5").unwrap(), (0.5, 0.5));
    }
}
