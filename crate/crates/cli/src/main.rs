use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;

use indextwo_cli::{
    emit_model_file, emit_report, fixture_file_name, fixture_model, parse_model_file, run_command, Command, Flags,
    Format, Model, ModelFile, Which, FIXTURE_NAMES,
};

/// Finite-dimensional index-2 inclusions, basic constructions and involutive bimodules.
///
/// Every command prints a report (json or text) and exits 0 iff all checks pass.
/// `fixture` instead prints a model file (or writes the whole catalog with --all --out DIR).
#[derive(Parser, Debug)]
#[command(name = "indextwo", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Model file to load.
    #[arg(long, value_name = "PATH", conflicts_with = "fixture")]
    model_file: Option<PathBuf>,
    /// Shipped fixture: A, B, C, D, E or C3.
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,
    /// Overrides both absolute and relative tolerances of the model file (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized checks and for fixture D (default: the model file's seed; 0 for fixture D).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Basic-construction model for `basic`.
    #[arg(long, value_enum, default_value = "crossed")]
    model: Model,
    /// Bimodule for `bimodule`.
    #[arg(long, value_enum, default_value = "XB")]
    which: Which,
    /// With `fixture`: every fixture in the catalog.
    #[arg(long)]
    all: bool,
    /// With `fixture --all`: directory to write the model files into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn load(cli: &Cli) -> anyhow::Result<ModelFile> {
    match (&cli.model_file, &cli.fixture) {
        (Some(path), _) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_model_file(&bytes).with_context(|| format!("loading {}", path.display()))?)
        }
        (None, Some(name)) => Ok(fixture_model(name, cli.seed.unwrap_or(0))?),
        (None, None) => bail!("one of --model-file or --fixture is required"),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if cli.command == Command::Fixture {
        if cli.all {
            let Some(dir) = &cli.out else {
                bail!("fixture --all needs --out DIR");
            };
            std::fs::create_dir_all(dir)?;
            for name in FIXTURE_NAMES {
                let m = fixture_model(name, cli.seed.unwrap_or(0))?;
                let path = dir.join(fixture_file_name(name));
                std::fs::write(&path, emit_model_file(&m)).with_context(|| format!("writing {}", path.display()))?;
            }
            return Ok(true);
        }
        print!("{}", emit_model_file(&load(&cli)?));
        return Ok(true);
    }
    let model = load(&cli)?;
    let flags = Flags {
        tol: cli.tol,
        seed: cli.seed,
        model: cli.model,
        which: cli.which,
    };
    let report = run_command(cli.command, &model, &flags);
    print!("{}", emit_report(&report, cli.format));
    Ok(report.pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
