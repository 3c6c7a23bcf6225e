use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use eit_memory::config::Config;
use eit_memory::experiments::{self, parse_grid};
use eit_memory::io::{envelope_table, read_envelope, schedule_table, write_json};
use eit_memory::{matched_schedule, Error, Result};

const THREADS_VAR: &str = "EITMEM_THREADS";

#[derive(Parser)]
#[command(name = "eitmem", version, about = "Photon storage in a driven Lambda-ensemble cavity")]
struct Cli {
    /// JSON configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Impedance-matched control schedule for a pulse.
    Match(MatchArgs),
    /// Capture, hold and release trace.
    Fig2a,
    /// Storage fidelity of Fock and squeezed states against hold time.
    Fig2b,
    /// One memory cycle of the configured input state.
    Cycle,
    /// Fidelity sweep over hold times for the configured input state.
    Sweep,
    /// Compare the adiabatic model with the bath-resolved integrators.
    OracleCheck,
}

#[derive(Args)]
struct MatchArgs {
    /// Built-in sech pulse: time constant and center.
    #[arg(long, num_args = 2, value_names = ["T", "T_C"], conflicts_with = "envelope")]
    sech: Option<Vec<f64>>,

    /// Output window start:dt:stop.
    #[arg(long)]
    grid: Option<String>,

    /// Envelope CSV with columns t,re[,im].
    #[arg(long)]
    envelope: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infeasible() { 2 } else { 1 })
        }
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR}={value} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if cli.dump_defaults {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::InvalidParameter(
            "no command given (try --help)".into(),
        ));
    };
    std::fs::create_dir_all(&cfg.output.dir)?;
    let started = Instant::now();
    let dir = cfg.output.dir.clone();

    let (name, written) = match command {
        Command::Match(args) => ("match", cmd_match(&cfg, &args)?),
        Command::Fig2a => {
            let fig = experiments::fig2a(&cfg)?;
            let path = dir.join("fig2a.csv");
            fig.table.save(&path)?;
            eprintln!(
                "t_d = {}  mirror error = {:.3e}  energy ratio = {:.6} (exp(-gamma_0 t_s) = {:.6})",
                fig.t_d,
                fig.mirror_error,
                fig.energy_ratio(),
                (-cfg.system.gamma_0 * fig.t_s).exp()
            );
            ("fig2a", vec![path])
        }
        Command::Fig2b => {
            let path = dir.join("fig2b.csv");
            experiments::fig2b(&cfg)?.save(&path)?;
            ("fig2b", vec![path])
        }
        Command::Cycle => {
            let result = experiments::cycle(&cfg)?;
            let json_path = dir.join("cycle.json");
            write_json(&json_path, &result.report())?;
            let env_path = dir.join("released.csv");
            envelope_table(&result.released_envelope).save(&env_path)?;
            ("cycle", vec![json_path, env_path])
        }
        Command::Sweep => {
            let path = dir.join("sweep.csv");
            experiments::sweep_table(&experiments::sweep(&cfg)?).save(&path)?;
            ("sweep", vec![path])
        }
        Command::OracleCheck => {
            let run = experiments::oracle_check(&cfg)?;
            let json_path = dir.join("oracle_check.json");
            write_json(&json_path, &run.report)?;
            let modes = dir.join("oracle_modes.csv");
            experiments::mode_trajectory_table(&run.modes).save(&modes)?;
            let lambda = dir.join("oracle_lambda.csv");
            experiments::lambda_trajectory_table(&run.lambda, &run.lambda_dark).save(&lambda)?;
            eprintln!("verdict: {}", run.report.verdict);
            ("oracle-check", vec![json_path, modes, lambda])
        }
    };
    for path in &written {
        write_meta(path, name, started)?;
    }
    Ok(())
}

fn cmd_match(cfg: &Config, args: &MatchArgs) -> Result<Vec<PathBuf>> {
    let params = cfg.system;
    params.validate()?;
    let window = match &args.grid {
        Some(spec) => Some(parse_grid(spec)?),
        None => None,
    };
    let schedule = if let Some(v) = &args.sech {
        let window = match window {
            Some(w) => w,
            None => cfg.grid.time_grid()?,
        };
        experiments::sech_schedule(v[0], v[1], &window, &params)?
    } else {
        let h = match &args.envelope {
            Some(path) => read_envelope(path)?.normalized()?,
            None => cfg.pulse.envelope(&cfg.grid)?,
        };
        matched_schedule(&h, &params)?
    };
    let path = cfg.output.dir.join("schedule.csv");
    schedule_table(&schedule, &params).save(&path)?;
    Ok(vec![path])
}

/// Run metadata goes next to each artifact so the artifact bytes stay reproducible.
fn write_meta(artifact: &Path, command: &str, started: Instant) -> Result<()> {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".meta.json");
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    write_json(
        Path::new(&name),
        &json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "finished_unix": now,
            "elapsed_s": started.elapsed().as_secs_f64(),
        }),
    )
}
