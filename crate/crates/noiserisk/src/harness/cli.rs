//! Command-line interface: generate, inject-noise, run, matrix, report.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime
//! failure (a run that aborted, unreadable results, IO trouble).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::data::{dump_csv, generate_synthetic, ingest_csv, inject_symmetric_noise, NoiseSpec, SplitTag};
use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::persist::{load_results, persist_results};
use super::report::{emit_method_table, emit_noise_impact_report, emit_tradeoff_data};
use super::run::{run_matrix, run_single};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "noiserisk",
    about = "Noise-robust training strategies under asymmetric risk metrics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured synthetic splits to <out>/{train,val,test}.csv.
    Generate {
        /// TOML experiment config with a [data.synthetic] section.
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Override the generator seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Flip labels in a training CSV with symmetric noise; the output
    /// keeps the originals in a true_label column plus a flip marker.
    InjectNoise {
        /// Input CSV (treated as the train split, assumed clean).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Flip probability in [0, 1].
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Execute one experiment and append its record to a JSONL file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Results file (one JSON line).
        #[arg(long)]
        out: PathBuf,
        /// Override the run seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute the [matrix] sweep of a config and write sorted JSONL.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the base seed (cells still derive their own).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Render a report from a results file.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: ReportKind,
        /// Table/noise-impact: optional copy of the text; trade-off: CSV
        /// path, with the SVG written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Risk scenario for the trade-off report.
        #[arg(long, default_value = "risk_II")]
        scenario: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    /// Method comparison table across noise rates.
    Table,
    /// Accuracy/risk trade-off CSV and scatter.
    Tradeoff,
    /// Per-noise FN/FP and risk decomposition for one method.
    NoiseImpact,
}

/// Parse argv and execute; returns the process exit code.
pub fn cli<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Entry point for the binary: argv from the environment.
pub fn cli_from_env() -> u8 {
    cli(std::env::args_os())
}

/// Configuration-class errors exit 1; everything else is runtime, exit 2.
fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::SingleClass
        | Error::CleanSplitViolation(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_toml_path(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Generate { config, out, seed } => {
            let config = load_config(&config, None)?;
            let Some(mut spec) = config.data.synthetic.clone() else {
                return Err(Error::Config(
                    "generate needs a [data.synthetic] section".into(),
                ));
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let (train, val, test) = generate_synthetic(&spec)?;
            std::fs::create_dir_all(&out)?;
            for (split, name) in [(&train, "train.csv"), (&val, "val.csv"), (&test, "test.csv")] {
                dump_csv(split, out.join(name), "label")?;
            }
            println!(
                "wrote {} ({} train / {} val / {} test samples)",
                out.display(),
                train.n_samples(),
                val.n_samples(),
                test.n_samples()
            );
            Ok(EXIT_OK)
        }
        Command::InjectNoise {
            input,
            out,
            rate,
            seed,
            label_column,
        } => {
            let dataset = ingest_csv(&input, &label_column, None, SplitTag::Train)?;
            let noised = inject_symmetric_noise(&dataset, &NoiseSpec { rate, seed })?;
            dump_csv(&noised, &out, &label_column)?;
            let flips = noised
                .flip_mask
                .as_ref()
                .map(|m| m.iter().filter(|&&f| f).count())
                .unwrap_or(0);
            println!(
                "wrote {} ({} of {} labels flipped)",
                out.display(),
                flips,
                noised.n_samples()
            );
            Ok(EXIT_OK)
        }
        Command::Run { config, out, seed } => {
            let config = load_config(&config, seed)?;
            let result = run_single(&config)?;
            persist_results(std::slice::from_ref(&result), &out)?;
            match &result.error {
                Some(message) => {
                    eprintln!("run failed: {message}");
                    Ok(EXIT_RUNTIME)
                }
                None => {
                    let bac = result
                        .metrics
                        .as_ref()
                        .and_then(|m| m.bac)
                        .map(|v| format!("{v:.3}"))
                        .unwrap_or_else(|| "n/a".into());
                    println!(
                        "{} cs={} noise={:.2} seed={}: test BAC {} -> {}",
                        result.method.name(),
                        result.cost_sensitive,
                        result.noise_rate,
                        result.seed,
                        bac,
                        out.display()
                    );
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Matrix {
            config,
            out,
            seed,
            parallel,
        } => {
            let config = load_config(&config, seed)?;
            let results = run_matrix(&config, parallel)?;
            persist_results(&results, &out)?;
            let failed = results.iter().filter(|r| r.is_failed()).count();
            println!(
                "wrote {} ({} runs, {} failed)",
                out.display(),
                results.len(),
                failed
            );
            Ok(EXIT_OK)
        }
        Command::Report {
            input,
            kind,
            out,
            scenario,
        } => {
            let results = load_results(&input)?;
            match kind {
                ReportKind::Table => {
                    let table = emit_method_table(&results)?;
                    print!("{table}");
                    if let Some(out) = out {
                        std::fs::write(out, table)?;
                    }
                }
                ReportKind::NoiseImpact => {
                    let report = emit_noise_impact_report(&results)?;
                    print!("{}", report.text);
                    if let Some(out) = out {
                        std::fs::write(out, report.csv)?;
                    }
                }
                ReportKind::Tradeoff => {
                    let data = emit_tradeoff_data(&results, &scenario)?;
                    match &out {
                        Some(out) => {
                            std::fs::write(out, &data.csv)?;
                            if let Some(svg) = &data.svg {
                                let svg_path = out.with_extension("svg");
                                std::fs::write(&svg_path, svg)?;
                                println!(
                                    "wrote {} and {}",
                                    out.display(),
                                    svg_path.display()
                                );
                            } else {
                                println!("wrote {}", out.display());
                            }
                        }
                        None => print!("{}", data.csv),
                    }
                    if let Some(notice) = &data.notice {
                        eprintln!("note: {notice}");
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}
