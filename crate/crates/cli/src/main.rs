use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mflab_cli::config::ExperimentConfig;
use mflab_cli::plot::{plot_run_dir, plot_sweep_dir};
use mflab_cli::report::{RunReport, SweepReport, SWEEP_FILE};
use mflab_cli::runner::{check_report_dir, run_to_dir, sweep_to_dir};

#[derive(Parser)]
#[command(
    name = "mflab",
    about = "Coupled N-boson / Hartree runs with counting-functional bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonRunArgs {
    /// Configuration file (TOML).
    config: PathBuf,
    /// Override the RNG seed recorded in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and persist report, series and config echo.
    Run(CommonRunArgs),
    /// Run the configured particle sweep.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Parallel run count.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run the bound checks against a persisted report directory.
    Check {
        report_dir: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Emit SVG plots for a persisted report or sweep directory.
    Plot {
        report_dir: PathBuf,
        /// Output directory for the plots (defaults to the report directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let record = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{record}");
    ExitCode::from(1)
}

fn load_config(args: &CommonRunArgs) -> Result<ExperimentConfig, ExitCode> {
    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return Err(fail("config-parse", &e.to_string())),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.directory = out.display().to_string();
    }
    if let Err(e) = config.validate() {
        return Err(fail("config-invalid", &e.to_string()));
    }
    Ok(config)
}

fn report_verdict(report: &RunReport, strict: bool) -> bool {
    report.passed && (!strict || report.warnings.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = match load_config(&args) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let particles = config.particles.list();
            if particles.len() != 1 {
                return fail(
                    "config-invalid",
                    "run expects a single particle count; use `sweep` for lists",
                );
            }
            let dir = PathBuf::from(&config.output.directory);
            match run_to_dir(&config, particles[0], &dir) {
                Ok(report) => {
                    for check in &report.checks {
                        if check.enabled {
                            println!(
                                "{} {}: worst margin {:.3e} over {} samples",
                                if check.passed { "PASS" } else { "FAIL" },
                                check.name,
                                check.worst_margin,
                                check.samples
                            );
                        }
                    }
                    if let Some(d) = &report.derivative {
                        println!(
                            "{} derivative: residual ratio {:.3} (coarse {:.3e}, fine {:.3e})",
                            if d.passed { "PASS" } else { "FAIL" },
                            d.ratio,
                            d.coarse_max_residual,
                            d.fine_max_residual
                        );
                    }
                    for w in &report.warnings {
                        println!("WARN {w}");
                    }
                    println!(
                        "report: {} (alpha0 {:.3e}, max alpha {:.6e})",
                        dir.display(),
                        report.alpha0,
                        report.max_alpha
                    );
                    if report_verdict(&report, args.strict) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail("run", &e.to_string()),
            }
        }
        Command::Sweep { common, jobs } => {
            let config = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let dir = PathBuf::from(&config.output.directory);
            match sweep_to_dir(&config, &dir, jobs.max(1)) {
                Ok(sweep) => {
                    for e in &sweep.entries {
                        match &e.error {
                            None => println!(
                                "{} N={}: max alpha {:.6e}, envelope {:.6e}",
                                if e.passed && e.within_envelope { "PASS" } else { "FAIL" },
                                e.particles,
                                e.max_alpha,
                                e.envelope_final
                            ),
                            Some(err) => println!("FAIL N={}: {err}", e.particles),
                        }
                    }
                    println!(
                        "slope of ln(max alpha) vs ln(N): {:.4} (band {:.4}..{:.4})",
                        sweep.slope, sweep.slope_confidence.0, sweep.slope_confidence.1
                    );
                    println!("sweep report: {}", dir.join(SWEEP_FILE).display());
                    if sweep.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail("sweep", &e.to_string()),
            }
        }
        Command::Check { report_dir, strict } => match check_report_dir(&report_dir) {
            Ok(summaries) => {
                let mut all = true;
                for s in &summaries {
                    println!(
                        "{} {}: {} violations over {} samples (worst margin {:.3e})",
                        if s.passed { "PASS" } else { "FAIL" },
                        s.name,
                        s.violations,
                        s.samples,
                        s.worst_margin
                    );
                    all &= s.passed;
                }
                let warnings_ok = if strict {
                    RunReport::load(&report_dir)
                        .map(|r| r.warnings.is_empty())
                        .unwrap_or(true)
                } else {
                    true
                };
                if all && warnings_ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => fail("check", &e.to_string()),
        },
        Command::Plot { report_dir, out } => {
            let out_dir = out.unwrap_or_else(|| report_dir.clone());
            let is_sweep = report_dir.join(SWEEP_FILE).exists();
            let result: anyhow::Result<Vec<PathBuf>> = if is_sweep {
                let sweep = SweepReport::load(&report_dir);
                match sweep {
                    Ok(s) => {
                        let mut files = Vec::new();
                        for entry in s.entries.iter().filter(|e| e.error.is_none()) {
                            let sub = report_dir.join(&entry.directory);
                            match plot_run_dir(&sub, &out_dir.join(&entry.directory)) {
                                Ok(mut f) => files.append(&mut f),
                                Err(e) => return fail("plot", &e.to_string()),
                            }
                        }
                        match plot_sweep_dir(&report_dir, &out_dir) {
                            Ok(f) => {
                                files.push(f);
                                Ok(files)
                            }
                            Err(e) => Err(e),
                        }
                    }
                    Err(e) => Err(e),
                }
            } else {
                plot_run_dir(&report_dir, &out_dir)
            };
            match result {
                Ok(files) => {
                    for f in &files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail("plot", &e.to_string()),
            }
        }
    }
}
