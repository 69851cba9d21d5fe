//! Command-line front end: closed forms, sample dumps and verification suites.

mod closed;
mod config;
mod error;
mod sample;
mod suites;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use closed::{Formula, FormulaArgs, Which};
use config::RunConfig;
use error::CliError;
use sample::{Kind, SampleArgs};
use suites::{Suite, VerifyArgs};

#[derive(Debug, Parser)]
#[command(name = "switchheat", version, about = "Heat flow under randomly switching boundary conditions")]
struct Cli {
    /// JSON config naming every key; defaults are used without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for Monte Carlo batches (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// `--key value` for every config key.
#[derive(Debug, Args)]
struct Overrides {
    #[arg(long, global = true)]
    example: Option<String>,
    #[arg(long, global = true)]
    r0: Option<String>,
    #[arg(long, global = true)]
    r1: Option<String>,
    #[arg(long = "D", global = true)]
    diffusivity: Option<String>,
    #[arg(long = "L", global = true)]
    length: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long = "K", visible_alias = "modes", global = true)]
    modes: Option<String>,
    #[arg(long = "N", visible_alias = "samples", global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long = "G", visible_alias = "grid", global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    output: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let pairs = [
            ("example", &self.example),
            ("r0", &self.r0),
            ("r1", &self.r1),
            ("D", &self.diffusivity),
            ("L", &self.length),
            ("b", &self.b),
            ("K", &self.modes),
            ("N", &self.samples),
            ("seed", &self.seed),
            ("G", &self.grid),
            ("tol", &self.tol),
        ];
        for (key, value) in pairs {
            if let Some(raw) = value {
                cfg.set(key, raw)?;
            }
        }
        if let Some(path) = &self.output {
            cfg.output = PathBuf::from(path);
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the effective config as JSON.
    Config,
    /// Evaluate a closed-form expression; prints {name, params, value}.
    ClosedForm {
        name: Formula,
        /// Position for dd-mean.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        /// Mode for beta-marginal; first mode for joint-moment.
        #[arg(long)]
        k: Option<usize>,
        /// Second mode for joint-moment.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        target: Option<Which>,
    },
    /// Draw a process path or a batch of pullback/stationary fields into `output`.
    Sample {
        kind: Kind,
        /// Snapshot times for path.
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value = "y1")]
        target: Which,
        /// DD mode followed by the scalar example.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Run a verification suite; prints one JSON report per line.
    Verify {
        suite: Suite,
        /// Modes for the marginals and invariance suites.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        k: Vec<usize>,
    },
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;

    match cli.command {
        Command::Config => print(&cfg.to_json()),
        Command::ClosedForm { name, x, k, m, target } => {
            let args = FormulaArgs { x, k, m, target };
            print(&closed::run(name, &cfg.model(), &args)?)
        }
        Command::Sample { kind, times, target, k } => {
            let args = SampleArgs { times, target, k };
            print(&sample::run(&cfg, kind, &args)?)
        }
        Command::Verify { suite, k } => {
            let records = suites::run(suite, &cfg, &VerifyArgs { modes: k })?;
            for r in &records {
                print(&serde_json::to_string(r).expect("record serializes"))?;
            }
            if suites::failed(&records) {
                let n = records.iter().filter(|r| !r.pass).count();
                return Err(CliError::Statistical(format!("{n} statistical check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("switchheat: {e}");
            e.exit_code()
        }
    }
}
