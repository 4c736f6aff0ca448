//! Command-line front end: single-point runs (JSON), parameter sweeps (CSV)
//! and the built-in verification suite.
//!
//! Exit codes: 0 success; 2 invalid configuration or arguments; 3 a
//! computation failed to converge or a verification criterion failed (partial
//! results are still written).

mod config;
mod verify;

use clap::{Parser, Subcommand};
use config::{RunConfig, SweepConfig};
use fermi_causality::scenarios::{
    causality_diagnostics, scenario1_disorder, scenario1_free, scenario2_disorder, scenario2_free,
    scenario3_disorder, scenario3_free, CausalityDiagnostics, ScenarioResult,
};
use fermi_causality::{QuadratureSpec, Regularization, SystemParams};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "fermi-causality", version, about = "Two-qubit causality engine for disordered media")]
struct Cli {
    /// Worker threads for sweeps (overrides FERMI_THREADS; default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and write a JSON document
    Single {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a parameter grid and write a CSV table
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in verification suite and write a JSON report
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("FERMI_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    match cli.command {
        Command::Single { config, out } => run_single(&config, &out),
        Command::Sweep { config, out } => run_sweep(&config, &out, threads),
        Command::Verify { suite, report } => verify::run(&suite, &report),
    }
}

fn fail_config(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn evaluate(
    scenario: u8,
    params: &SystemParams,
    reg: &Regularization,
    qspec: &QuadratureSpec,
) -> fermi_causality::Result<ScenarioResult> {
    let disorder = params.sigma2 > 0.0;
    match (scenario, disorder) {
        (1, false) => scenario1_free(params, qspec),
        (1, true) => scenario1_disorder(params, reg, qspec),
        (2, false) => scenario2_free(params, qspec),
        (2, true) => scenario2_disorder(params, reg, qspec),
        (3, false) => scenario3_free(params, qspec),
        (3, true) => scenario3_disorder(params, reg, qspec),
        _ => unreachable!("scenario validated earlier"),
    }
}

#[derive(Serialize)]
struct Dimensionless {
    omega0_dtau: f64,
    omega0_r: f64,
    omega0_tau0: f64,
    sigma2_omega0_cubed: f64,
}

#[derive(Serialize)]
struct SingleDocument {
    engine_version: &'static str,
    params: SystemParams,
    dimensionless: Dimensionless,
    regularization: Regularization,
    quadrature: QuadratureSpec,
    results: Vec<ScenarioResult>,
    diagnostics: Option<CausalityDiagnostics>,
}

fn run_single(config_path: &Path, out: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("cannot read {}: {e}", config_path.display())),
    };
    let cfg: RunConfig = match toml::from_str(&text) {
        Ok(c) => c,
        Err(e) => return fail_config(&format!("invalid config: {e}")),
    };
    if let Err(e) = cfg.validate() {
        return fail_config(&e);
    }
    let reg = cfg.regularization();
    let qspec = cfg.quadrature();

    let mut results = Vec::new();
    for &s in &cfg.scenarios {
        match evaluate(s, &cfg.params, &reg, &qspec) {
            Ok(mut r) => {
                if !cfg.include_r_independent {
                    r.breakdown.entries.retain(|e| e.label != "r_independent");
                }
                results.push(r);
            }
            Err(e) => return fail_config(&format!("scenario {s} failed: {e}")),
        }
    }
    let diagnostics = results
        .first()
        .and_then(|r| causality_diagnostics(r, &qspec).ok());
    let converged = results.iter().all(|r| r.converged);

    let doc = SingleDocument {
        engine_version: env!("CARGO_PKG_VERSION"),
        params: cfg.params,
        dimensionless: Dimensionless {
            omega0_dtau: cfg.params.omega0 * cfg.params.dtau(),
            omega0_r: cfg.params.omega0 * cfg.params.r,
            omega0_tau0: cfg.params.omega0 * cfg.params.tau0,
            sigma2_omega0_cubed: cfg.params.sigma2 * cfg.params.omega0.powi(3),
        },
        regularization: reg,
        quadrature: qspec,
        results,
        diagnostics,
    };
    let json = serde_json::to_string_pretty(&doc).expect("document serialization");
    if let Err(e) = std::fs::write(out, json + "\n") {
        return fail_config(&format!("cannot write {}: {e}", out.display()));
    }
    if converged {
        ExitCode::SUCCESS
    } else {
        eprintln!("warning: some integrals did not converge; results are flagged");
        ExitCode::from(EXIT_UNCONVERGED)
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_sweep(config_path: &Path, out: &Path, threads: Option<usize>) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("cannot read {}: {e}", config_path.display())),
    };
    let cfg: SweepConfig = match toml::from_str(&text) {
        Ok(c) => c,
        Err(e) => return fail_config(&format!("invalid config: {e}")),
    };
    let grid = match cfg.grid() {
        Ok(g) => g,
        Err(e) => return fail_config(&e),
    };
    let threads = cfg.threads.or(threads);
    let reg = cfg.regularization();
    let qspec = cfg.quadrature();

    let work = |params: &SystemParams| -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for &s in &cfg.scenarios {
            match evaluate(s, params, &reg, &qspec) {
                Ok(r) => {
                    let status = if r.converged { "ok" } else { "unconverged" };
                    for e in &r.breakdown.entries {
                        rows.push(vec![
                            fmt17(params.omega0),
                            fmt17(params.r),
                            fmt17(params.sigma2),
                            fmt17(params.dtau()),
                            r.scenario.to_string(),
                            e.label.clone(),
                            fmt17(e.value.re),
                            fmt17(e.value.im),
                            fmt17(e.err_est),
                            r.regime.to_string(),
                            status.to_string(),
                        ]);
                    }
                }
                Err(e) => rows.push(vec![
                    fmt17(params.omega0),
                    fmt17(params.r),
                    fmt17(params.sigma2),
                    fmt17(params.dtau()),
                    s.to_string(),
                    "error".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {e}"),
                ]),
            }
        }
        rows
    };

    // evaluate in parallel, emit in grid order regardless of scheduling
    let run_all = || -> Vec<(usize, Vec<Vec<String>>)> {
        grid.par_iter().enumerate().map(|(i, p)| (i, work(p))).collect()
    };
    let mut indexed = match threads {
        Some(n) if n >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
            match pool {
                Ok(pool) => pool.install(run_all),
                Err(e) => return fail_config(&format!("thread pool: {e}")),
            }
        }
        _ => run_all(),
    };
    indexed.sort_by_key(|(i, _)| *i);

    let mut wtr = match csv::Writer::from_path(out) {
        Ok(w) => w,
        Err(e) => return fail_config(&format!("cannot write {}: {e}", out.display())),
    };
    let header = [
        "omega0", "r", "sigma2", "dtau", "scenario", "term", "re", "im", "err_est", "regime",
        "status",
    ];
    if wtr.write_record(header).is_err() {
        return fail_config("csv write failed");
    }
    for (_, rows) in indexed {
        for row in rows {
            if wtr.write_record(&row).is_err() {
                return fail_config("csv write failed");
            }
        }
    }
    if wtr.flush().is_err() {
        return fail_config("csv flush failed");
    }
    ExitCode::SUCCESS
}
