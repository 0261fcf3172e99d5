use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmodes::cli::{self, RunConfig};
use qmodes::Error;

#[derive(Parser)]
#[command(
    name = "qmodes",
    about = "Closed-form transition probabilities for quadratic bosonic mode coupling, with an exact truncated-Fock oracle",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed form and the oracle at a single time
    Probe(CommonArgs),
    /// Closed form vs oracle over a time grid
    Sweep(CommonArgs),
    /// Disentangling coefficients at a single time
    Decompose(CommonArgs),
    /// Run the validation suite
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Model: fc | pa | raman | su3
    #[arg(long)]
    model: Option<String>,
    /// Two-mode coupling
    #[arg(long)]
    k: Option<f64>,
    /// Two-mode effective detuning
    #[arg(long)]
    delta: Option<f64>,
    /// Raman Stokes coupling
    #[arg(long)]
    gs: Option<f64>,
    /// Raman anti-Stokes coupling
    #[arg(long)]
    ga: Option<f64>,
    /// Raman Stokes detuning
    #[arg(long)]
    ks: Option<f64>,
    /// Raman anti-Stokes detuning
    #[arg(long)]
    ka: Option<f64>,
    /// su3 couplings
    #[arg(long)]
    g1: Option<f64>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    g3: Option<f64>,
    /// Initial occupations, comma separated (e.g. 1,0)
    #[arg(long, value_delimiter = ',')]
    initial: Option<Vec<usize>>,
    /// Final occupations, comma separated
    #[arg(long = "final", value_delimiter = ',')]
    final_state: Option<Vec<usize>>,
    /// Single evaluation time (probe, decompose)
    #[arg(long)]
    t: Option<f64>,
    /// Sweep grid start
    #[arg(long)]
    t0: Option<f64>,
    /// Sweep grid end
    #[arg(long)]
    t1: Option<f64>,
    /// Sweep grid steps (rows = steps + 1)
    #[arg(long)]
    steps: Option<usize>,
    /// Oracle per-mode truncation cap (0 = per-model default)
    #[arg(long)]
    nmax: Option<usize>,
    /// Time-ordered stepper step size
    #[arg(long)]
    dt: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// List criterion names without running them
    #[arg(long)]
    list: bool,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        if let Some(v) = &self.model {
            config.model = v.clone();
        }
        for (slot, value) in [
            (&mut config.k, self.k),
            (&mut config.delta, self.delta),
            (&mut config.gs, self.gs),
            (&mut config.ga, self.ga),
            (&mut config.ks, self.ks),
            (&mut config.ka, self.ka),
            (&mut config.g1, self.g1),
            (&mut config.g2, self.g2),
            (&mut config.g3, self.g3),
            (&mut config.t, self.t),
            (&mut config.t0, self.t0),
            (&mut config.t1, self.t1),
            (&mut config.dt, self.dt),
        ] {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(v) = &self.initial {
            config.initial = v.clone();
        }
        if let Some(v) = &self.final_state {
            config.final_state = v.clone();
        }
        if let Some(v) = self.steps {
            config.steps = v;
        }
        if let Some(v) = self.nmax {
            config.nmax = v;
        }
        if let Some(v) = &self.out {
            config.out = Some(v.clone());
        }
        Ok(config)
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Singular(_) | Error::Degenerate { .. } | Error::Backend(_) => 4,
        _ => 2,
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), Error> {
    if let Some(stdout_text) = cli::deliver(config, text)? {
        print!("{stdout_text}");
    }
    Ok(())
}

fn run() -> Result<u8, Error> {
    let parsed = Cli::parse();
    match parsed.command {
        Command::Probe(args) | Command::Sweep(args) | Command::Decompose(args)
            if args.dump_config =>
        {
            let config = args.resolve()?;
            print!("{}", config.dump());
            Ok(0)
        }
        Command::Probe(args) => {
            let config = args.resolve()?;
            let csv = cli::probe(&config)?;
            emit(&config, &csv)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let config = args.resolve()?;
            let csv = cli::sweep(&config)?;
            emit(&config, &csv)?;
            Ok(0)
        }
        Command::Decompose(args) => {
            let config = args.resolve()?;
            let csv = cli::decompose(&config)?;
            emit(&config, &csv)?;
            Ok(0)
        }
        Command::Validate(args) => {
            if args.common.dump_config {
                let config = args.common.resolve()?;
                print!("{}", config.dump());
                return Ok(0);
            }
            let config = args.common.resolve()?;
            let (report, all_ok) = cli::validate(&config, args.list)?;
            emit(&config, &report)?;
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
