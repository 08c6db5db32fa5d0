use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use clusterlab::config::{ConfigFile, OutputFormat, RunConfig, RunKind};
use clusterlab::verify::{
    render, run_bound_suite, run_contour_suite, run_limit_scan, run_verify_partition, write_csv, FullReport,
};
use clusterlab::Result;

#[derive(Parser)]
#[command(name = "clusterlab", version, about = "Exact and asymptotic checks for the cluster partition function")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (a directory for `all --format csv`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Working precision in bits for floating evaluations.
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// Maximum number of occupations enumerated directly.
    #[arg(long, global = true)]
    term_cap: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Chunk tree, exact partition identity, and the random instance suite.
    VerifyPartition,
    /// ln Z / N over the N grid with extrapolation and ordering checks.
    LimitScan,
    /// Sum-to-contour identity, stationary points, and contour shifts.
    ContourSuite,
    /// Seeded random checks of every inequality in the bound chain.
    BoundSuite,
    /// Everything above.
    All,
}

impl Cli {
    fn run_config(&self, kind: RunKind) -> Result<RunConfig> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        file.seed = self.seed.or(file.seed);
        file.precision = self.precision.or(file.precision);
        file.term_cap = self.term_cap.or(file.term_cap);
        file.format = self.format.clone().or(file.format);
        file.output = self.out.clone().or(file.output);
        RunConfig::resolve(kind, &file)
    }
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn status(name: &str, passed: bool) {
    eprintln!("{name}: {}", if passed { "PASS" } else { "FAIL" });
}

fn run(cli: &Cli) -> Result<bool> {
    match cli.command {
        Command::VerifyPartition => {
            let config = cli.run_config(RunKind::Partition)?;
            let report = run_verify_partition(&config)?;
            emit(&render(&report, config.format)?, config.output.as_deref())?;
            status("verify-partition", report.passed());
            Ok(report.passed())
        }
        Command::LimitScan => {
            let config = cli.run_config(RunKind::Limit)?;
            let report = run_limit_scan(&config)?;
            emit(&render(&report, config.format)?, config.output.as_deref())?;
            status("limit-scan", report.passed());
            Ok(report.passed())
        }
        Command::ContourSuite => {
            let config = cli.run_config(RunKind::Contour)?;
            let report = run_contour_suite(&config)?;
            emit(&render(&report, config.format)?, config.output.as_deref())?;
            status("contour-suite", report.passed());
            Ok(report.passed())
        }
        Command::BoundSuite => {
            let config = cli.run_config(RunKind::Bounds)?;
            let report = run_bound_suite(&config)?;
            emit(&render(&report, config.format)?, config.output.as_deref())?;
            status("bound-suite", report.passed());
            Ok(report.passed())
        }
        Command::All => {
            let partition_config = cli.run_config(RunKind::Partition)?;
            let report = FullReport {
                partition: run_verify_partition(&partition_config)?,
                limit: run_limit_scan(&cli.run_config(RunKind::Limit)?)?,
                contour: run_contour_suite(&cli.run_config(RunKind::Contour)?)?,
                bounds: run_bound_suite(&cli.run_config(RunKind::Bounds)?)?,
            };
            status("verify-partition", report.partition.passed());
            status("limit-scan", report.limit.passed());
            status("contour-suite", report.contour.passed());
            status("bound-suite", report.bounds.passed());
            match partition_config.format {
                OutputFormat::Json => {
                    let mut bytes = serde_json::to_vec_pretty(&report)?;
                    bytes.push(b'\n');
                    emit(&bytes, partition_config.output.as_deref())?;
                }
                OutputFormat::Csv => {
                    let dir = partition_config.output.unwrap_or_else(|| PathBuf::from("."));
                    fs::create_dir_all(&dir)?;
                    write_csv(&report.partition, fs::File::create(dir.join("partition.csv"))?)?;
                    write_csv(&report.limit, fs::File::create(dir.join("limit.csv"))?)?;
                    write_csv(&report.contour, fs::File::create(dir.join("contour.csv"))?)?;
                    write_csv(&report.bounds, fs::File::create(dir.join("bounds.csv"))?)?;
                }
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
