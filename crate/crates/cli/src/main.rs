use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellbal::commands::{self, EXIT_INVALID};

/// Simulator and verifier for a selection-switch cell-to-cell equalizer.
#[derive(Debug, Parser)]
#[command(name = "cellbal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario; writes telemetry.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "CELLBAL_OUT_DIR", default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        verbose: bool,
    },
    /// Check every cell pair against the selection network wiring.
    VerifyNetwork {
        #[arg(long)]
        n: Option<usize>,
        /// Netlist text file to check instead of the built-in wiring.
        #[arg(long)]
        netlist: Option<PathBuf>,
        /// Check the classic 2n-DPDT network instead.
        #[arg(long)]
        baseline: bool,
        /// Print every pair, not just violations.
        #[arg(long)]
        verbose: bool,
    },
    /// Print component counts of all modelled equalizers at n cells.
    Compare {
        #[arg(long)]
        n: usize,
    },
    /// Run a parameter grid over a scenario.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid file; defaults to the [grid] table of the scenario.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, env = "CELLBAL_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Print the built-in proposed network as netlist text.
    ExportNetlist {
        #[arg(long)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Simulate {
            config,
            out: dir,
            verbose,
        } => commands::simulate(config, dir, *verbose, &mut out),
        Command::VerifyNetwork {
            n,
            netlist,
            baseline,
            verbose,
        } => commands::verify_network(*n, netlist.as_deref(), *baseline, *verbose, &mut out),
        Command::Compare { n } => commands::compare(*n, &mut out),
        Command::Sweep {
            config,
            grid,
            out: dir,
        } => commands::sweep(config, grid.as_deref(), dir, &mut out),
        Command::ExportNetlist { n } => commands::export_netlist(*n, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
