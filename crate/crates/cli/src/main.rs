use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use invariant_gof::{FamilySpec, ParamPair, StatisticKind};
use invariant_gof_cli::{
    cmd_fit, cmd_table, cmd_test, parse_alphas, parse_sizes, render_table, CliError, CliResult,
    OutputFormat, TableOptions, TableSource, TestOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "invgof",
    version,
    about = "Invariant goodness-of-fit tests for scale-shape families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Weibull,
    Pareto1,
    Frechet,
    Burr12,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Out {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "weibull")]
    family: Family,
    /// Burr XII second shape, held fixed.
    #[arg(long)]
    xi: Option<f64>,
}

impl FamilyArgs {
    fn spec(&self) -> CliResult<FamilySpec> {
        let name = match self.family {
            Family::Weibull => "weibull",
            Family::Pareto1 => "pareto1",
            Family::Frechet => "frechet",
            Family::Burr12 => "burr12",
        };
        Ok(FamilySpec::from_name(name, self.xi)?)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-likelihood fit of (c, kappa).
    Fit {
        file: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Fit, standardize and run AD/HM/RB/KS against critical values.
    /// Exit code 0: nothing rejects at the smallest alpha; 1: something
    /// rejects; 2: error.
    Test {
        file: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        /// Table file written by `invgof table`, or `simulate`.
        #[arg(long, default_value = "simulate")]
        table: String,
        /// Comma-separated significance levels.
        #[arg(long)]
        alphas: Option<String>,
        /// Monte Carlo iterations when simulating.
        #[arg(long = "M", default_value_t = 20_000)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Interpolate critical values linearly in n between tabulated sizes.
        #[arg(long)]
        interp_n: bool,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Simulate a critical-value table.
    Table {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Comma-separated sample sizes.
        #[arg(long, default_value = "50,100,150,200")]
        n: String,
        #[arg(long = "M", default_value_t = 100_000)]
        iterations: usize,
        #[arg(long, default_value = "0.1,0.05,0.01")]
        alphas: String,
        /// Comma-separated subset of AD,HM,RB,KS.
        #[arg(long, default_value = "AD,HM,RB,KS")]
        statistics: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output table file.
        #[arg(long)]
        out_path: PathBuf,
        /// Also write the cells as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn format_of(out: Out) -> OutputFormat {
    match out {
        Out::Text => OutputFormat::Text,
        Out::Json => OutputFormat::Json,
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Fit { file, family, out } => {
            let report = cmd_fit(&file, family.spec()?)?;
            match format_of(out) {
                OutputFormat::Text => print!("{}", report.render_text()),
                OutputFormat::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("report serializes")
                    )
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Test {
            file,
            family,
            table,
            alphas,
            iterations,
            seed,
            workers,
            interp_n,
            out,
        } => {
            let table = if table == "simulate" {
                TableSource::Simulate {
                    iterations,
                    seed,
                    workers,
                }
            } else {
                TableSource::File(PathBuf::from(table))
            };
            let opts = TestOptions {
                family: family.spec()?,
                table,
                alphas: alphas.as_deref().map(parse_alphas).transpose()?,
                interpolate_n: interp_n,
            };
            let report = cmd_test(&file, &opts)?;
            if report.results.iter().any(|r| r.interpolated) {
                eprintln!("warning: critical values interpolated in n={}", report.n);
            }
            match format_of(out) {
                OutputFormat::Text => print!("{}", report.render_text()),
                OutputFormat::Json => println!("{}", report.render_json()),
            }
            Ok(if report.any_rejection() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Table {
            family,
            c,
            kappa,
            n,
            iterations,
            alphas,
            statistics,
            seed,
            workers,
            out_path,
            csv,
        } => {
            let statistics = statistics
                .split(',')
                .map(|s| s.parse::<StatisticKind>())
                .collect::<Result<Vec<_>, _>>()?;
            let opts = TableOptions {
                family: family.spec()?,
                params: ParamPair::new(c, kappa)?,
                sizes: parse_sizes(&n)?,
                iterations,
                alphas: parse_alphas(&alphas)?,
                seed,
                workers,
                statistics,
            };
            let table = cmd_table(&opts, &out_path, csv.as_deref())?;
            print!("{}", render_table(&table));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if let CliError::Gof(invariant_gof::GofError::MissingCell { .. }) = err {
                eprintln!("hint: pass --interp-n to interpolate between tabulated sizes");
            }
            ExitCode::from(2)
        }
    }
}
