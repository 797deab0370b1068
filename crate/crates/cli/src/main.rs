use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use atomchip::scenario::{run_text, Artifact, Command, Format, RunOptions, ScenarioError, Units};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const IO_EXIT: u8 = 1;

/// Atom-chip trap and surface-loss scenarios.
#[derive(Parser, Debug)]
#[command(name = "atomchip", version)]
struct Cli {
    /// Scenario file (TOML with unit-suffixed quantities).
    #[arg(long, global = true, default_value = "configs/paper.cfg")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, global = true, env = "ATOMCHIP_OUT", default_value = ".")]
    out: PathBuf,
    /// Root seed; overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per integral; overrides `run.mc_budget`.
    #[arg(long, global = true)]
    mc_budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, global = true, value_enum, default_value_t = UnitsArg::Si)]
    units: UnitsArg,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Field over a grid in a plane of constant z.
    FieldMap,
    /// Locate and characterize the trap minimum.
    Trap,
    /// Follow the trap through a linear current/bias ramp.
    Ramp,
    /// Lifetime against height for each spin-flip frequency.
    LifetimeScan,
    /// Axial density profile of a cloud in a corrugated potential.
    Fragments,
    /// Simulate a decay curve and/or fit one.
    Decay {
        /// Fit the simulated (or `--input`) data.
        #[arg(long)]
        fit: bool,
        /// Existing `t_s,N,sigma_N` CSV to fit instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fix the lifetime-law normalization from the quasi-static integral.
    Calibrate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitsArg {
    Si,
    Lab,
}

enum Failure {
    Scenario(ScenarioError),
    Io { path: PathBuf, error: std::io::Error },
}

impl Failure {
    fn report(&self) -> (u8, serde_json::Value) {
        match self {
            Failure::Scenario(e) => (
                e.exit_code() as u8,
                json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exitCode": e.exit_code() } }),
            ),
            Failure::Io { path, error } => (
                IO_EXIT,
                json!({ "error": { "kind": "io", "message": format!("{}: {error}", path.display()), "exitCode": IO_EXIT } }),
            ),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|error| Failure::Io { path: path.to_owned(), error })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
fn write_atomic(dir: &Path, artifact: &Artifact) -> Result<PathBuf, Failure> {
    let target = dir.join(&artifact.name);
    let io = |error| Failure::Io { path: target.clone(), error };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(artifact.contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, Failure> {
    let config_text = read(&cli.config)?;
    let (command, decay_input) = match &cli.command {
        Sub::FieldMap => (Command::FieldMap, None),
        Sub::Trap => (Command::Trap, None),
        Sub::Ramp => (Command::Ramp, None),
        Sub::LifetimeScan => (Command::LifetimeScan, None),
        Sub::Fragments => (Command::Fragments, None),
        Sub::Decay { fit, input } => (Command::Decay { fit: *fit }, input.as_deref().map(read).transpose()?),
        Sub::Calibrate => (Command::Calibrate, None),
    };
    let options = RunOptions {
        seed: cli.seed,
        mc_budget: cli.mc_budget,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        units: match cli.units {
            UnitsArg::Si => Units::Si,
            UnitsArg::Lab => Units::Lab,
        },
        decay_input,
    };
    log::info!("running {} with {}", command.name(), cli.config.display());
    let artifacts = run_text(command, &config_text, &options).map_err(Failure::Scenario)?;
    fs::create_dir_all(&cli.out).map_err(|error| Failure::Io { path: cli.out.clone(), error })?;
    artifacts.iter().map(|a| write_atomic(&cli.out, a)).collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let (code, report) = failure.report();
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}
