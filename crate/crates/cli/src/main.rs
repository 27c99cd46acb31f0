//! `icluster` command-line front end.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use icluster::{Error, Result};
use serde_json::json;

use commands::Outcome;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "icluster", version, about = "Ideal cluster points of sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify candidate points as limit points, ideal cluster points or Lambda points.
    Analyze(Common),
    /// Witness interval sequences.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Build a subsequence or rearrangement that preserves or adds cluster points.
    #[command(subcommand)]
    Preserve(PreserveCmd),
    /// Escape games against a seeded adversary.
    #[command(subcommand)]
    Game(GameCmd),
    /// Frequency of cluster preservation over random maps (heuristic).
    Sample(Common),
    /// Registered ideals.
    #[command(subcommand)]
    Ideals(IdealsCmd),
}

#[derive(Subcommand)]
enum WitnessCmd {
    Build(Common),
    Verify(Common),
}

#[derive(Subcommand)]
enum PreserveCmd {
    Sigma(Common),
    Pi(Common),
}

#[derive(Subcommand)]
enum GameCmd {
    Run(Common),
}

#[derive(Subcommand)]
enum IdealsCmd {
    List(Common),
}

/// Flags override values read from `--config`.
#[derive(Args, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seq: Option<String>,
    #[arg(long)]
    ideal: Option<String>,
    /// Ideal parameters as inline JSON.
    #[arg(long)]
    ideal_params: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Number of dyadic radii, or a comma list of decreasing radii.
    #[arg(long)]
    schedule: Option<String>,
    /// Grid pitch, e.g. `1/64` or `2^-6`.
    #[arg(long)]
    pitch: Option<String>,
    /// Comma list of thresholds.
    #[arg(long)]
    q_grid: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for reports.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    /// sigma or pi.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    witness_q: Option<String>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
}

impl Common {
    fn resolve(&self, command: &str) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        c.command = command.to_string();
        if let Some(v) = &self.seq {
            c.sequence = v.clone();
        }
        if let Some(v) = &self.ideal {
            c.ideal = v.clone();
        }
        if let Some(v) = &self.ideal_params {
            c.ideal_params = Some(serde_json::from_str(v)?);
        }
        if let Some(v) = self.horizon {
            c.horizon = v;
        }
        if let Some(v) = &self.schedule {
            c.schedule = config::parse_schedule(v)?;
        }
        if let Some(v) = &self.pitch {
            c.pitch = config::parse_pitch(v)?;
        }
        if let Some(v) = &self.q_grid {
            c.q_grid = config::parse_q_grid(v)?;
        }
        if let Some(v) = &self.theta {
            c.theta = icluster::rational::parse_q(v)?;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out_dir {
            c.out_dir = v.clone();
        }
        if let Some(v) = &self.witness_q {
            c.witness_q = icluster::rational::parse_q(v)?;
        }
        if let Some(v) = self.rounds {
            c.rounds = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        for (slot, v) in [(&mut c.mode, &self.mode), (&mut c.kind, &self.kind), (&mut c.q, &self.q), (&mut c.ell, &self.ell)] {
            if v.is_some() {
                *slot = v.clone();
            }
        }
        Ok(c)
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

/// Primary files first, then one sidecar carrying everything time-dependent.
fn write(cfg: &RunConfig, out: &Outcome, started: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| io_err(&cfg.out_dir, e))?;
    let mut written = Vec::new();
    for (name, body) in &out.files {
        let p = cfg.out_dir.join(name);
        std::fs::write(&p, body).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    let meta = json!({
        "command": cfg.command,
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": started,
        "finished_unix": now(),
        "argv": std::env::args().collect::<Vec<_>>(),
        "exit_code": out.code,
    });
    let p = cfg.out_dir.join(format!("{}.meta.json", cfg.command.replace(' ', "-")));
    std::fs::write(&p, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| io_err(&p, e))?;
    Ok(written)
}

fn fail(e: &Error, code: i32) -> ExitCode {
    eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code }));
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "Usage", "message": e.to_string(), "exit_code": 1 }));
            return ExitCode::from(1);
        }
    };
    let (name, common, run): (&str, &Common, fn(&RunConfig) -> Result<Outcome>) = match &cli.command {
        Command::Analyze(c) => ("analyze", c, commands::analyze_cmd),
        Command::Witness(WitnessCmd::Build(c)) => ("witness build", c, commands::witness_build),
        Command::Witness(WitnessCmd::Verify(c)) => ("witness verify", c, commands::witness_verify),
        Command::Preserve(PreserveCmd::Sigma(c)) => ("preserve sigma", c, commands::preserve),
        Command::Preserve(PreserveCmd::Pi(c)) => ("preserve pi", c, commands::preserve),
        Command::Game(GameCmd::Run(c)) => ("game run", c, commands::game),
        Command::Sample(c) => ("sample", c, commands::sample),
        Command::Ideals(IdealsCmd::List(c)) => ("ideals list", c, commands::ideals),
    };
    let started = now();
    let cfg = match common.resolve(name) {
        Ok(mut c) => {
            if let Command::Preserve(p) = &cli.command {
                c.kind = Some(if matches!(p, PreserveCmd::Sigma(_)) { "sigma" } else { "pi" }.into());
            }
            c
        }
        Err(e) => return fail(&e, 1),
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let code = commands::exit_code(&e);
            return fail(&e, code);
        }
    };
    let written = match write(&cfg, &out, started) {
        Ok(w) => w,
        Err(e) => return fail(&e, 1),
    };
    println!(
        "{}",
        json!({ "command": name, "exit_code": out.code, "outputs": written, "summary": out.summary })
    );
    ExitCode::from(out.code as u8)
}
