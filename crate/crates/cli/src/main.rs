use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linkcons::BoundProfile;
use linkcons_cli::scenario::TopologyDoc;
use linkcons_cli::{commands, exit, CliError};

#[derive(Parser)]
#[command(name = "linkcons", version, about = "Consensus over networks with failing links")]
struct Cli {
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, writing its trace and a metrics document.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Trace output; metrics go to `<out>.metrics.json`.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a recorded trace against the consensus contract and a bound.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        bound_profile: Profile,
    },
    /// Run a grid of scenarios and write one CSV row per run.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Print a generated topology as an edge list.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// clique, path, cycle, star, cycle-multi, regular-parts, join or random-connected
    generator: String,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    leaves: Option<u32>,
    #[arg(long)]
    x: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    extra: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Fast,
    Sm,
    Lm,
    Es,
    Ol,
}

impl From<Profile> for BoundProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Fast => BoundProfile::Fast,
            Profile::Sm => BoundProfile::Sm,
            Profile::Lm => BoundProfile::Lm,
            Profile::Es => BoundProfile::Es,
            Profile::Ol => BoundProfile::Ol,
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { scenario, out, seed } => commands::simulate(&scenario, &out, seed),
        Command::Verify { trace, bound_profile } => {
            commands::verify_trace(&trace, bound_profile.into(), &mut std::io::stdout())
        }
        Command::Sweep {
            scenario,
            out,
            parallel,
        } => commands::sweep(&scenario, &out, parallel),
        Command::Generate(a) => {
            let doc = TopologyDoc {
                generator: Some(a.generator),
                n: a.n,
                m: a.m,
                leaves: a.leaves,
                x: a.x,
                d: a.d,
                extra: a.extra,
                seed: Some(a.seed),
                edges: None,
            };
            let text = commands::generate(&doc, a.seed)?;
            match a.out {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(path, e))?,
                None => print!("{text}"),
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
