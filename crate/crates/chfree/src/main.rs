use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chfree::{execute, load_config, CheckOutcome, Pipeline, RunError};

#[derive(Parser)]
#[command(name = "chfree", version = chfree::pipeline::VERSION, about = "Optimal control of a Cahn-Hilliard tumour-growth model with free terminal time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline selected in the configuration.
    Run(RunArgs),
    /// Run the verification oracles only.
    Verify(RunArgs),
    /// Solve the state equation for the initial control only.
    Simulate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for the verification oracles (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn print_checks(outcomes: &[CheckOutcome]) {
    for c in outcomes {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.check, c.detail);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, pipeline) = match cli.command {
        Command::Run(a) => (a, None),
        Command::Verify(a) => (a, Some(Pipeline::Verify)),
        Command::Simulate(a) => (a, Some(Pipeline::Simulate)),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not configure threads: {e}");
        }
    }
    let result = load_config(&args.config, pipeline, args.seed, args.out_dir)
        .map_err(RunError::from)
        .and_then(|cfg| execute(&cfg));
    match result {
        Ok(summary) => {
            print_checks(&summary.verify);
            if let Some(o) = &summary.optimize {
                println!(
                    "optimize: {} after {} iterations, J = {:.6e}, tau = {:.6}, case {}",
                    o.termination, o.iterations, o.cost, o.tau_opt, o.time_case
                );
            }
            if let Some(s) = &summary.simulate {
                println!("simulate: J(tau0) = {:.6e}, mass residual {:.2e}", s.cost_at_tau0, s.max_mass_residual);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let RunError::Verification(outcomes) = &e {
                print_checks(outcomes);
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
