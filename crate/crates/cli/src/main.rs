use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use squashed::catalog;
use squashed::classical::intrinsic_information;
use squashed::io;
use squashed::optimizer::bounds_report;
use squashed::propcheck::{check_bound_chain, check_ssa_tripartite, run_suite, SUITES};
use squashed::{Density, Error, OptimizerConfig};

#[derive(Parser)]
#[command(name = "squash", version, about = "Bounds on squashed entanglement and entropy-inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hashing, squashed and EoF bounds for a state file.
    Compute {
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        d_env: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and print JSON lines.
    Verify {
        #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Also check a state file: the bound chain for two subsystems,
        /// strong subadditivity for three.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Upper bound on the intrinsic information of a joint-distribution file.
    Intrinsic {
        joint: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the example catalog or write one entry to a file.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    Emit { name: String, path: PathBuf },
}

enum Failure {
    Error(Error),
    ChecksFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::UnknownExample(_) => 4,
        _ => 3,
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Domain(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialise");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute {
            state,
            d_env,
            restarts,
            seed,
            max_iters,
            out,
        } => {
            let rho: Density = io::read_state(&read_file(&state)?)?;
            let cfg = OptimizerConfig {
                d_env,
                restarts,
                max_iters,
                seed,
                ..OptimizerConfig::default()
            };
            log::info!("computing bounds for {} with {cfg:?}", state.display());
            let rep = bounds_report(&rho, &cfg)?;
            write_output(out.as_deref(), &pretty(&io::report_json(&rep)))?;
        }
        Command::Verify { suite, seed, n, state } => {
            let extra = match &state {
                Some(path) => {
                    let rho: Density = io::read_state(&read_file(path)?)?;
                    let r = match rho.layout().len() {
                        2 => check_bound_chain(&rho, &OptimizerConfig { seed, ..OptimizerConfig::default() })?,
                        3 => check_ssa_tripartite(&rho)?,
                        k => {
                            return Err(Error::Shape(format!("--state needs two or three subsystems, got {k}")).into())
                        }
                    };
                    Some(r)
                }
                None => None,
            };
            let (manifest, mut results) = run_suite(&suite, seed, n)?;
            results.extend(extra);
            println!("{}", serde_json::to_string(&manifest).expect("manifest serialises"));
            for r in &results {
                println!("{}", r.to_json_line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            log::info!("{} checks, {failed} failed", results.len());
            if failed > 0 {
                return Err(Failure::ChecksFailed(failed));
            }
        }
        Command::Intrinsic { joint, restarts, seed } => {
            let p = io::read_joint::<f64>(&read_file(&joint)?)?;
            let cfg = OptimizerConfig {
                restarts,
                seed,
                ..OptimizerConfig::default()
            };
            let res = intrinsic_information(&p, &cfg)?;
            print!("{}", pretty(&io::intrinsic_json(&res)));
        }
        Command::Examples { action } => match action {
            ExamplesAction::List => {
                let entries: Vec<_> = catalog::entries()
                    .iter()
                    .map(|e| json!({"name": e.name, "description": e.description, "known": e.known}))
                    .collect();
                let not_computed: Vec<_> = catalog::NOT_COMPUTED
                    .iter()
                    .map(|(q, why)| json!({"quantity": q, "reason": why}))
                    .collect();
                print!("{}", pretty(&json!({"examples": entries, "not_computed": not_computed})));
            }
            ExamplesAction::Emit { name, path } => {
                let entry = catalog::lookup(&name)?;
                std::fs::write(&path, entry.file_contents())
                    .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?;
                println!("{}", json!({"name": name, "path": path}));
            }
        },
    }
    Ok(())
}

fn init_logging() {
    let level = match std::env::var("SQUASH_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed(k)) => {
            log::error!("{k} checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
