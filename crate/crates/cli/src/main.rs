use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvqode::commands::{cmd_estimate_cost, cmd_evaluate, cmd_selftest, cmd_train, CostArgs};
use cvqode::EXIT_CONFIG;

#[derive(Parser)]
#[command(name = "cvqode", version, about = "Train continuous-variable variational circuits on initial value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train from a TOML config file or a preset name (linear, riccati, stiff).
    Train {
        config: PathBuf,
        /// Directory for the run's files. Defaults to `output.dir` from the
        /// config, else `$CVQODE_OUTPUT_DIR/<problem>`, else `runs/<problem>`.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        /// Suppress per-step progress on stderr.
        #[arg(short, long)]
        quiet: bool,
    },
    /// Hardware wall-clock estimate in units of the measurement time T_m.
    EstimateCost {
        #[arg(long, default_value_t = 2)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        layers: u64,
        #[arg(long, default_value_t = 20)]
        points: u64,
        /// Measurements per expectation value.
        #[arg(long, default_value_t = 100)]
        shots: u64,
        #[arg(long, default_value_t = 400)]
        steps: u64,
        /// Hypothetical T_m in seconds; may be repeated.
        #[arg(long)]
        tm: Vec<f64>,
    },
    /// Gate algebra and gradient consistency checks.
    Selftest,
    /// Evaluate a trained network from a run.json.
    Evaluate {
        run: PathBuf,
        /// Input points; may be repeated.
        #[arg(long = "at", required = true, allow_negative_numbers = true)]
        at: Vec<f64>,
        /// Use the lowest-loss parameters instead of the final ones.
        #[arg(long)]
        best: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Train {
            config,
            output_dir,
            quiet,
        } => cmd_train(&config, output_dir.as_deref(), quiet, &mut stdout),
        Command::EstimateCost {
            n,
            layers,
            points,
            shots,
            steps,
            tm,
        } => cmd_estimate_cost(
            &CostArgs {
                modes: n,
                layers,
                points,
                shots,
                steps,
                tm,
            },
            &mut stdout,
        ),
        Command::Selftest => cmd_selftest(&mut stdout),
        Command::Evaluate { run, at, best } => cmd_evaluate(&run, &at, best, &mut stdout),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("cvqode: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
