mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;

use depscreen::screen::{
    load_csv, persist_results, screen, CsvOptions, Method, OutputFormat, ScreenPlan,
};
use depscreen::sim::{
    full_grid, power_study, write_cell_tsv, write_roc_tsv, write_summary_tsv, PowerCell,
    ScenarioConfig, ScenarioKind,
};
use depscreen::stats::RngStream;

use args::{build_plan, Cli, Command, CommonArgs, SensitivityArgs, SimulateArgs};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Screen(a) => run_screen(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Sensitivity(a) => run_sensitivity(a),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

#[derive(serde::Serialize)]
struct Sidecar<'a> {
    version: &'a str,
    command: Vec<String>,
    seed: u64,
    workers: usize,
    wall_clock_s: f64,
    outputs: Vec<PathBuf>,
    plan: &'a ScreenPlan,
}

fn write_sidecar(
    base: &Path,
    plan: &ScreenPlan,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<PathBuf> {
    let meta = Sidecar {
        version: env!("CARGO_PKG_VERSION"),
        command: std::env::args().collect(),
        seed: plan.seed,
        workers: plan.workers,
        wall_clock_s: started.elapsed().as_secs_f64(),
        outputs: outputs.to_vec(),
        plan,
    };
    let path = base.with_extension(match base.extension() {
        Some(e) => format!("{}.meta.json", e.to_string_lossy()),
        None => "meta.json".to_string(),
    });
    std::fs::write(&path, serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn progress(common: &CommonArgs, msg: &str) {
    if common.verbose {
        eprintln!("[depscreen] {msg}");
    }
}

fn run_screen(a: args::ScreenArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let plan = build_plan(&a.priors, &a.common, &a.methods, a.min_rows);
    plan.validate().context("invalid plan")?;
    progress(&a.common, &format!("loading {}", a.input.display()));
    let dataset = load_csv(&a.input, &CsvOptions { row_id_column: a.row_id_column.clone() })
        .context("loading input")?;
    progress(
        &a.common,
        &format!("{} rows x {} variables", dataset.n_rows(), dataset.n_vars()),
    );
    let results = screen(&dataset, &plan, RngStream::new(plan.seed)).context("screening")?;
    let format: OutputFormat = a.format.parse().map_err(anyhow::Error::from)?;
    persist_results(&results, &plan, &a.output, format).context("writing results")?;
    write_sidecar(&a.output, &plan, &[a.output.clone()], started)?;
    // machine-readable output path on stdout, progress on stderr only
    println!("{}", a.output.display());
    let failures = results.iter().filter(|r| r.has_failure()).count();
    if failures > 0 {
        progress(&a.common, &format!("{failures} pairs flagged with failures"));
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cells(a: &SimulateArgs) -> Result<(Vec<PowerCell>, usize, usize)> {
    let (n, reps) = match a.preset.as_deref() {
        Some("paper-4.2-quick") => (100, 20),
        Some("paper-4.2-full") => (250, 50),
        _ => (a.n, a.reps),
    };
    let cells = if a.preset.is_some() {
        full_grid(n, reps, 0)
    } else {
        let kind = a
            .scenario
            .ok_or_else(|| anyhow::anyhow!("either --preset or --scenario is required"))?;
        let params: &[f64] = if kind == ScenarioKind::Normal { &a.rho } else { &a.phi };
        params
            .iter()
            .map(|&p| PowerCell {
                scenario: ScenarioConfig {
                    kind,
                    rho: if kind == ScenarioKind::Normal { p } else { 0.0 },
                    phi: if kind == ScenarioKind::Normal { 0.0 } else { p },
                    n,
                    reps,
                    seed: 0,
                },
                plan: None,
            })
            .collect()
    };
    Ok((cells, n, reps))
}

fn run_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let plan = build_plan(&a.priors, &a.common, &a.methods, 10);
    plan.validate().context("invalid plan")?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let (cells, n, reps) = simulate_cells(&a)?;
    progress(
        &a.common,
        &format!("{} cells x {} methods, n={n}, reps={reps}", cells.len(), a.methods.len()),
    );
    let mut all_rows = Vec::new();
    for method in &a.methods {
        progress(&a.common, &format!("running {method}"));
        let rows = power_study(*method, &cells, &plan, RngStream::new(plan.seed))
            .with_context(|| format!("power study for {method}"))?;
        all_rows.extend(rows);
    }
    let scores = a.out_dir.join("scores.tsv");
    let summary = a.out_dir.join("summary.tsv");
    let roc = a.out_dir.join("roc.tsv");
    write_cell_tsv(&all_rows, &scores)?;
    write_summary_tsv(&all_rows, &summary)?;
    write_roc_tsv(&all_rows, &roc)?;
    let outputs = vec![scores, summary.clone(), roc];
    write_sidecar(&a.out_dir.join("run"), &plan, &outputs, started)?;
    println!("{}", summary.display());
    Ok(ExitCode::SUCCESS)
}

fn run_sensitivity(a: SensitivityArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let base_plan = build_plan(&a.priors, &a.common, &[Method::Ctbf, Method::Mixmod], 10);
    base_plan.validate().context("invalid plan")?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;

    let cells: Vec<PowerCell> = a
        .phi
        .iter()
        .map(|&phi| PowerCell {
            scenario: ScenarioConfig {
                kind: ScenarioKind::Sinusoidal,
                rho: 0.0,
                phi,
                n: a.n,
                reps: a.reps,
                seed: 0,
            },
            plan: None,
        })
        .collect();

    let mut out = String::new();
    match a.target.as_str() {
        "ctbf" => {
            out.push_str("a\tc0\tscenario\tphi\tauc\n");
            for &mass in &a.a_values {
                for &c0 in &a.c0_values {
                    let mut plan = base_plan.clone();
                    plan.ctbf_config = depscreen::ctbf::CtbfConfig::constant_alpha(mass);
                    plan.ctbf_dpm.concentration =
                        depscreen::dpm::ConcentrationSpec::Fixed(c0);
                    progress(&a.common, &format!("ctbf sweep a={mass} c0={c0}"));
                    let rows =
                        power_study(Method::Ctbf, &cells, &plan, RngStream::new(plan.seed))?;
                    for row in rows {
                        out.push_str(&format!(
                            "{mass}\t{c0}\tsinusoidal\t{}\t{}\n",
                            row.parameter, row.auc
                        ));
                    }
                }
            }
        }
        "mixmod" => {
            out.push_str("a0\tb0\tscenario\tphi\tauc\n");
            for &(a0, b0) in &a.beta_priors {
                let mut plan = base_plan.clone();
                plan.ensemble.a0 = a0;
                plan.ensemble.b0 = b0;
                progress(&a.common, &format!("mixmod sweep a0={a0} b0={b0}"));
                let rows =
                    power_study(Method::Mixmod, &cells, &plan, RngStream::new(plan.seed))?;
                for row in rows {
                    out.push_str(&format!(
                        "{a0}\t{b0}\tsinusoidal\t{}\t{}\n",
                        row.parameter, row.auc
                    ));
                }
            }
        }
        other => anyhow::bail!("unknown sensitivity target: {other}"),
    }
    let summary = a.out_dir.join("sensitivity.tsv");
    std::fs::write(&summary, out).with_context(|| format!("writing {}", summary.display()))?;
    write_sidecar(&a.out_dir.join("run"), &base_plan, &[summary.clone()], started)?;
    println!("{}", summary.display());
    Ok(ExitCode::SUCCESS)
}
