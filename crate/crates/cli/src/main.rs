use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcem_dsp::inference::BankSource;
use mcem_dsp_cli::adapter::{Engine, McemEstimator};
use mcem_dsp_cli::commands::{self, FitArgs, PowerArgs, ScanArgs, SimulateArgs, TestArgs};
use mcem_dsp_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "mcem-dsp", version, about = "Imprinting and maternal-effect analysis of discordant sib-pair families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum EngineArg {
    Mcem,
    McemIs,
}

#[derive(Copy, Clone, ValueEnum)]
enum BankArg {
    Shared,
    Own,
}

#[derive(Args)]
struct EmArgs {
    #[arg(long, value_enum, default_value = "mcem")]
    engine: EngineArg,
    #[arg(long, default_value_t = 10_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    #[arg(long, default_value_t = 10)]
    is_switch_iter: usize,
    /// Burn-in sweeps discarded before each Monte Carlo sample.
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    /// Average each test term over the Full fit's draws (shared) or over each fit's own draws.
    #[arg(long, value_enum, default_value = "shared")]
    lrt_bank: BankArg,
}

impl EmArgs {
    fn estimator(&self) -> CliResult<McemEstimator> {
        Ok(McemEstimator {
            engine: match self.engine {
                EngineArg::Mcem => Engine::Mcem,
                EngineArg::McemIs => Engine::McemIs,
            },
            config: commands::em_config(self.mc_samples, self.max_iter, self.rel_tol, self.is_switch_iter, self.burnin)?,
            bank: match self.lrt_bank {
                BankArg::Shared => BankSource::SharedFull,
                BankArg::Own => BankSource::OwnPosterior,
            },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a family file from a disease model and scenario.
    Simulate {
        #[arg(long)]
        model: usize,
        #[arg(long)]
        scenario: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ds_plus: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one model variant.
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "full")]
        variant: String,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit all four variants and run the association, imprinting and maternal tests.
    Test {
        input: PathBuf,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test every SNP of a long-format genotype file.
    Scan {
        scan: PathBuf,
        #[arg(long)]
        pedigree: PathBuf,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Minimum fraction of pedigree families genotyped at a SNP.
        #[arg(long, default_value_t = 1.0)]
        min_coverage: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rejection rates and relative bias over simulated replicates.
    Power {
        #[arg(long = "model", value_delimiter = ',', required = true)]
        models: Vec<usize>,
        #[arg(long = "scenario", value_delimiter = ',', required = true)]
        scenarios: Vec<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ds_plus: bool,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(hide = true)]
    Verify {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            model,
            scenario,
            n,
            ds_plus,
            seed,
            out,
        } => {
            commands::simulate(&SimulateArgs {
                model,
                scenario,
                n_families: n,
                ds_plus,
                seed,
                out,
            })?;
        }
        Command::Fit {
            input,
            variant,
            em,
            seed,
            out,
        } => {
            let variant = commands::parse_variant(&variant)?;
            commands::fit(&FitArgs { input, variant, seed, out }, &em.estimator()?)?;
        }
        Command::Test {
            input,
            em,
            seed,
            alpha,
            out,
        } => {
            commands::test(&TestArgs { input, seed, alpha, out }, &em.estimator()?)?;
        }
        Command::Scan {
            scan,
            pedigree,
            em,
            seed,
            alpha,
            jobs,
            min_coverage,
            out,
        } => {
            let args = ScanArgs {
                scan,
                pedigree,
                out,
                seed,
                jobs,
                alpha,
                min_coverage,
            };
            commands::scan(&args, &em.estimator()?)?;
        }
        Command::Power {
            models,
            scenarios,
            n,
            ds_plus,
            replicates,
            em,
            seed,
            alpha,
            jobs,
            out,
        } => {
            let args = PowerArgs {
                models,
                scenarios,
                n_families: n,
                ds_plus,
                replicates,
                base_seed: seed,
                alpha,
                jobs,
                out,
            };
            let cells = commands::power(&args, &em.estimator()?)?;
            if args.out.is_none() {
                for c in &cells {
                    let r = c.rejection_rates(alpha);
                    println!("{}\t{}\t{}\t{}\t{}", c.model, c.scenario, r[0], r[1], r[2]);
                }
            }
        }
        Command::Verify { draws, seed } => {
            let checks = commands::verify(draws, seed);
            for c in &checks {
                println!("{}\t{}\t{}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(CliError::Numerical("verification failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
