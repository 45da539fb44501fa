use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use incoherence::nonuniform_ft::InverseMethod;
use incoherence_cli::{run, validate, Overrides};

#[derive(Parser)]
#[command(name = "incoherence", version, about = "Incoherent-channel tomography and spectral profile recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write artifacts plus manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        method: Option<InverseMethod>,
        /// CP tolerance for qpt_demo/rud_build, pairing match tolerance for recover_profile.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out,
            method,
            tol,
            seed,
        } => run(&config, &out, &Overrides { method, tol, seed }).map(|m| {
            for f in &m.files {
                println!("{}  {}  {}", f.sha256, f.role, out.join(&f.path).display());
            }
        }),
        Command::Validate { config } => validate(&config, &Overrides::default()).map(|plan| {
            println!("ok: {}", plan.describe());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
