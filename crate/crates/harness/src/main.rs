use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gaussian_tomo::config::{ExperimentConfig, ShotOverride};
use gaussian_tomo::instance::{random_unitary, write_json, InstanceFile};
use gaussian_tomo::run::{experiment_plan, run_experiment, RunOptions};
use gaussian_tomo::suites::{verify_suite, SuiteReport, SUITES};
use gaussian_tomo::tables::{emit_tables, TableFormat};
use gaussian_tomo::{HarnessError, Result};
use gaussian_tomo_core::tomography::Accounting;

#[derive(Parser)]
#[command(name = "gaussian-tomo", version, about = "Gaussian unitary tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccountingArg {
    Paper,
    Strict,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides the energy accounting mode.
    #[arg(long, value_enum)]
    accounting: Option<AccountingArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the query plan for a config.
    Plan {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Force the shot counts (`N_S,N_r`) instead of the planned ones.
        #[arg(long, value_parser = parse_shots)]
        shots: Option<ShotOverride>,
    },
    /// Run all trials of a config.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_shots)]
        shots: Option<ShotOverride>,
    },
    /// Run verification suites.
    Verify {
        /// Suite name or `all`.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Write the reports here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export per-trial and summary tables from a run directory.
    Tables {
        /// Run directory containing `summary.json` and `reports/`.
        run_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Output directory; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance file.
    GenInstance {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1.0)]
        r_scale: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_shots(s: &str) -> std::result::Result<ShotOverride, String> {
    let (a, b) = s.split_once(',').ok_or("expected N_S,N_r")?;
    let n_s = a.trim().parse::<u64>().map_err(|e| e.to_string())?;
    let n_r = b.trim().parse::<u64>().map_err(|e| e.to_string())?;
    Ok(ShotOverride { n_s, n_r })
}

fn load_config(args: &ConfigArgs, shots: Option<ShotOverride>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(a) = args.accounting {
        cfg.accounting = match a {
            AccountingArg::Paper => Accounting::Paper,
            AccountingArg::Strict => Accounting::Strict,
        };
    }
    if shots.is_some() {
        cfg.shots = shots;
    }
    cfg.validate().map_err(HarnessError::Config)?;
    Ok(cfg)
}

fn table_format(f: FormatArg) -> TableFormat {
    match f {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Json => TableFormat::Json,
    }
}

fn suite_csv(reports: &[SuiteReport]) -> String {
    let mut out = String::from("suite,criterion,check,measured,relation,limit,passed\n");
    for r in reports {
        for c in &r.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.suite,
                r.criterion,
                c.name,
                c.measured,
                c.relation.symbol(),
                c.limit,
                c.passed
            ));
        }
    }
    out
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => gaussian_tomo::instance::write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(suite: &str, seed: u64, format: FormatArg, out: Option<&Path>) -> Result<bool> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.iter().map(|s| s.0).collect()
    } else {
        vec![suite]
    };
    let mut reports = Vec::new();
    for name in names {
        let report = verify_suite(name, seed)?;
        eprintln!(
            "[{}] criterion {} {} ({:.2}s)",
            if report.passed { "PASS" } else { "FAIL" },
            report.criterion,
            report.suite,
            report.elapsed_s
        );
        reports.push(report);
    }
    let text = match format {
        FormatArg::Csv => suite_csv(&reports),
        FormatArg::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
    };
    emit(&text, out)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Plan { cfg, shots } => {
            let cfg = load_config(&cfg, shots)?;
            let plan = experiment_plan(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&plan).expect("plan serializes"));
            Ok(true)
        }
        Command::Run {
            cfg,
            threads,
            out,
            shots,
        } => {
            let cfg = load_config(&cfg, shots)?;
            let output = run_experiment(&cfg, &RunOptions { threads, out_dir: out })?;
            let s = &output.summary;
            println!(
                "{} / {} trials succeeded (rate {:.4}, 95% CI [{:.4}, {:.4}], threshold {:.4}); {} queries",
                s.successes, s.trials, s.success_rate, s.ci_low, s.ci_high, s.threshold, s.total_queries
            );
            Ok(s.passed)
        }
        Command::Verify {
            suite,
            seed,
            threads,
            format,
            out,
        } => match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?
                .install(|| verify(&suite, seed, format, out.as_deref())),
            None => verify(&suite, seed, format, out.as_deref()),
        },
        Command::Tables { run_dir, format, out } => {
            let out = out.unwrap_or_else(|| run_dir.clone());
            for path in emit_tables(&run_dir, &out, table_format(format))? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::GenInstance {
            m,
            z,
            r_scale,
            seed,
            out,
        } => {
            if m == 0 || !(z >= 1.0) {
                return Err(HarnessError::Config("need m >= 1 and z >= 1".into()));
            }
            let g = random_unitary(m, z, r_scale, true, seed)?;
            write_json(&out, &InstanceFile::from_unitary(&g, z, Some(seed)))?;
            println!("{}", out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
