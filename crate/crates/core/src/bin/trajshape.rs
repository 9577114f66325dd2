use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trajshape::config::{Config, InterpreterKind};
use trajshape::dataset::SampleKind;
use trajshape::pipeline::{self, CommandSource, PipelineError, EXIT_INPUT};

#[derive(Parser)]
#[command(version, about = "Reshape robot trajectories with geometric potential fields")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the interpreter selected in the config.
    #[arg(long, global = true, value_enum)]
    interpreter: Option<InterpreterKind>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit primitives to labelled point clouds and write a scene file.
    Register {
        /// Directory of cloud files, each with a `<stem>.json` descriptor.
        #[arg(long)]
        clouds: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reshape a trajectory according to a command or constraint file.
    Reshape {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, conflicts_with = "constraints", required_unless_present = "constraints")]
        command: Option<String>,
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Output trajectory; the report goes to `<stem>.report.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Success rates of every agent over a dataset directory.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// Writes `<out>.json` and `<out>.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "single")]
        kind: SampleKind,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

fn run(cli: Cli) -> Result<i32, PipelineError> {
    let mut config = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_INPUT);
        }
    };
    if let Some(kind) = cli.interpreter {
        config.interpreter.kind = kind;
    }
    match cli.command {
        Command::Register { clouds, out } => {
            let result = pipeline::run_register(&clouds, &config.registration, &out)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "registered {} object(s), {} warning(s) -> {}",
                result.scene.objects.len(),
                result.warnings.len(),
                out.display()
            );
        }
        Command::Reshape {
            scene,
            trajectory,
            command,
            constraints,
            out,
        } => {
            let source = match (command, constraints) {
                (Some(text), _) => CommandSource::Text(text),
                (None, Some(path)) => CommandSource::Document(
                    std::fs::read_to_string(&path).map_err(|e| trajshape::io::InputError::new(&path, e))?,
                ),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let code = pipeline::run_reshape(&scene, &trajectory, &source, &config, &out)?;
            let verdict = if code == 0 { "all checks passed" } else { "best effort, some checks failed" };
            println!("{verdict} -> {}", out.display());
            return Ok(code);
        }
        Command::Evaluate { dataset, out } => {
            let evaluation = pipeline::run_evaluate(&dataset, &config, out.as_deref())?;
            print!("{}", evaluation.to_table());
        }
        Command::Generate { out, seed, count, kind } => {
            let manifest = pipeline::cmd_generate(&out, seed, count, kind)?;
            println!("wrote {} sample(s) to {}", manifest.samples.len(), out.display());
        }
        Command::Serve { addr } => {
            let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
            if let Err(e) = runtime.block_on(trajshape::service::serve(config, addr)) {
                eprintln!("error: {e}");
                return Ok(EXIT_INPUT);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
