use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quapi::analysis::Observable;
use quapi::cli::{self, CliError, CliResult, RunConfig};
use quapi::Strategy;

/// QUAPI/ITM and Bloch-equation decoherence of a Josephson charge qubit.
#[derive(Parser)]
#[command(name = "quapi", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    /// Run loops on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

/// Config file plus per-key overrides (flags win over the file).
#[derive(Args)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    e_j_uev: Option<String>,
    #[arg(long, global = true)]
    e_c_uev: Option<String>,
    #[arg(long, global = true)]
    n_g: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    omega_c_per_ps: Option<String>,
    #[arg(long, global = true)]
    temperature_mk: Option<String>,
    #[arg(long, global = true)]
    dt_ps: Option<String>,
    #[arg(long, global = true)]
    dk_max: Option<String>,
    #[arg(long, global = true)]
    t_max_ps: Option<String>,
    #[arg(long, global = true)]
    sample_every: Option<String>,
    #[arg(long, global = true)]
    initial_state: Option<String>,
    #[arg(long, short, global = true)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Bath response function γ(t) as CSV.
    Response {
        /// Time window in ps.
        #[arg(long, default_value_t = 50.0)]
        span: f64,
        /// Number of grid intervals.
        #[arg(long, default_value_t = 500)]
        points: usize,
    },
    /// Reduced density matrix trajectory as CSV.
    Evolve,
    /// Markovian τ₁, τ₂.
    Bloch {
        /// Drop the exponential cutoff factor from J(ω₀).
        #[arg(long)]
        no_cutoff: bool,
    },
    /// Bloch vs ITM decoherence time.
    Compare {
        #[arg(long, default_value = "abs_rho01")]
        observable: String,
    },
    /// ITM with full memory against the exact path sum.
    Oracle {
        #[arg(long, default_value_t = 6)]
        steps: usize,
    },
    /// Influence coefficients as CSV.
    Eta,
    /// One comparison row per config file, run concurrently.
    Sweep {
        #[arg(long, default_value = "abs_rho01")]
        observable: String,
        configs: Vec<PathBuf>,
    },
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 12] {
        [
            ("e_j_ueV", &self.e_j_uev),
            ("e_c_ueV", &self.e_c_uev),
            ("n_g", &self.n_g),
            ("alpha", &self.alpha),
            ("omega_c_per_ps", &self.omega_c_per_ps),
            ("temperature_mK", &self.temperature_mk),
            ("dt_ps", &self.dt_ps),
            ("dk_max", &self.dk_max),
            ("t_max_ps", &self.t_max_ps),
            ("sample_every", &self.sample_every),
            ("initial_state", &self.initial_state),
            ("output", &self.output),
        ]
    }

    fn apply(&self, mut config: RunConfig) -> CliResult<RunConfig> {
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }

    fn load(&self) -> CliResult<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        self.apply(base)
    }
}

fn emit(config: &RunConfig, text: &str) -> CliResult<()> {
    match &config.output {
        Some(path) => cli::write_output(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn parse_observable(s: &str) -> CliResult<Observable> {
    s.parse()
        .map_err(|e: quapi::Error| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    let strategy = if cli.sequential {
        Strategy::Sequential
    } else {
        Strategy::Parallel
    };
    match cli.command {
        Command::Sweep {
            observable,
            configs,
        } => {
            let observable = parse_observable(&observable)?;
            let runs = configs
                .iter()
                .map(|p| cli.overrides.apply(RunConfig::from_file(p)?))
                .collect::<CliResult<Vec<_>>>()?;
            let csv = cli::cmd_sweep(&runs, observable, strategy)?;
            let sink = RunConfig {
                output: cli.overrides.output.as_ref().map(PathBuf::from),
                ..RunConfig::default()
            };
            emit(&sink, &csv)
        }
        command => {
            let config = cli.overrides.load()?;
            match command {
                Command::Response { span, points } => emit(
                    &config,
                    &cli::cmd_response(&config, span, points, strategy)?,
                ),
                Command::Evolve => emit(&config, &cli::cmd_evolve(&config, strategy)?),
                Command::Bloch { no_cutoff } => {
                    print!("{}", cli::cmd_bloch(&config, !no_cutoff)?);
                    Ok(())
                }
                Command::Compare { observable } => {
                    let (text, csv) =
                        cli::cmd_compare(&config, parse_observable(&observable)?, strategy)?;
                    print!("{text}");
                    match &config.output {
                        Some(path) => cli::write_output(path, &csv),
                        None => {
                            print!("{csv}");
                            Ok(())
                        }
                    }
                }
                Command::Oracle { steps } => {
                    print!("{}", cli::cmd_oracle(&config, steps, strategy)?.1);
                    Ok(())
                }
                Command::Eta => emit(&config, &cli::cmd_eta(&config, strategy)?),
                Command::Sweep { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quapi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
