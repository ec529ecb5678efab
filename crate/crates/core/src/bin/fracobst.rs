use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frac_obstacle::config::{parse_config, RunConfig};
use frac_obstacle::experiment::{
    run_decay, run_single, run_stationary, run_sweep, ExecOptions, DEFAULT_STEP_BUDGET, EXIT_FATAL,
};

/// Time-fractional obstacle problem experiments.
#[derive(Parser, Debug)]
#[command(name = "fracobst", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One (alpha, N, gamma) combination, trajectory written by default.
    Run(Common),
    /// Every combination of the config.
    Sweep(Common),
    /// Stationary reference, per-alpha errors and the fitted decay constant.
    Decay(Common),
    /// Stationary reference only.
    Stationary(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Config file (flat key=value or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent runs.
    #[arg(long)]
    workers: Option<usize>,
    /// Disable memory truncation in S1/S2.
    #[arg(long)]
    no_truncate: bool,
    /// Write every k-th step of each trajectory.
    #[arg(long, value_name = "K")]
    traj_every: Option<usize>,
    /// Step cap per run.
    #[arg(long, value_name = "STEPS", default_value_t = DEFAULT_STEP_BUDGET)]
    budget: usize,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, ExecOptions), String> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|e| format!("{}: {e}", self.config.display()))?;
        let config = parse_config(&text).map_err(|e| format!("{}: {e}", self.config.display()))?;
        let out = self
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        if self.budget == 0 {
            return Err("--budget must be positive".into());
        }
        if self.traj_every == Some(0) {
            return Err("--traj-every must be positive".into());
        }
        let exec = ExecOptions {
            out_dir: out,
            workers: self.workers,
            traj_every: self.traj_every,
            budget: self.budget,
            no_truncate: self.no_truncate,
        };
        Ok((config, exec))
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    let code = match cli.command {
        Command::Run(c) => {
            let (config, mut exec) = c.load()?;
            exec.traj_every.get_or_insert(1);
            run_single(&config, &exec).map(|r| r.exit_code)
        }
        Command::Sweep(c) => {
            let (config, exec) = c.load()?;
            run_sweep(&config, &exec).map(|r| r.exit_code)
        }
        Command::Decay(c) => {
            let (config, exec) = c.load()?;
            run_decay(&config, &exec).map(|(_, code)| code)
        }
        Command::Stationary(c) => {
            let (config, exec) = c.load()?;
            run_stationary(&config, &exec)
        }
    };
    code.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FATAL as u8)
        }
    }
}
