//! The `manyarm` command line.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors, 1 on runtime
//! failures.

pub mod config;

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{ConfigError, RawConfig};

use crate::harness::{self, ExperimentConfig, HarnessError};
use crate::theory::{self, ComplexityContext, TheoryError};

pub const THREADS_ENV: &str = "MANYARM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "manyarm", version, about = "Bandits with more arms than budget", after_help = config::key_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every policy section for N trials and write raw.jsonl and agg.csv.
    #[command(after_help = config::key_help())]
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override a config key: key=value or label.key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads (default: config `threads`, then MANYARM_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress progress on standard error.
        #[arg(long)]
        quiet: bool,
    },
    /// Print significant ranks and complexities as CSV.
    #[command(after_help = config::key_help())]
    Theory {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Table::Rank)]
        table: Table,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Time single-threaded trials of every policy.
    #[command(after_help = config::key_help())]
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Trials per policy (default: config N).
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Table {
    /// t, eta_star, eta_tilde and the closed-form bounds at each t of t_grid.
    Rank,
    /// S and S~ on the rank grid.
    Complexity,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(format!("config error: {e}"))
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(m) => Failure::Usage(format!("config error: {m}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<TheoryError> for Failure {
    fn from(e: TheoryError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure::Runtime(format!("write failed: {e}"))
}

/// Runs the command line with `args` (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Runtime(m)) = &f;
            let _ = writeln!(err, "manyarm: {m}");
            f.code()
        }
    }
}

fn load(path: &Path, set: &[String]) -> Result<RawConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut raw = RawConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    for s in set {
        raw.apply_override(s)?;
    }
    Ok(raw)
}

fn env_threads() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { config, out: dir, set, threads, seed, quiet } => {
            let mut cfg = load(&config, &set)?.experiment()?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.threads = match threads {
                Some(n) => Some(n),
                None => cfg.threads.map_or_else(env_threads, |n| Ok(Some(n)))?,
            };
            if cfg.threads == Some(0) {
                return Err(Failure::Usage("threads must be positive".into()));
            }
            cfg.progress = !quiet;
            simulate(&cfg, &dir, out, err)
        }
        Command::Theory { config, table, set } => {
            let (ctx, ts) = load(&config, &set)?.theory()?;
            match table {
                Table::Rank => rank_table(&ctx, &ts, out),
                Table::Complexity => complexity_table(&ctx, out),
            }
        }
        Command::Bench { config, trials, set } => {
            let mut cfg = load(&config, &set)?.experiment()?;
            if let Some(m) = trials {
                if m == 0 {
                    return Err(Failure::Usage("--trials must be positive".into()));
                }
                cfg.trials = m;
            }
            bench(&cfg, out)
        }
    }
}

fn simulate(cfg: &ExperimentConfig, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let start = Instant::now();
    let res = harness::run_experiment(cfg)?;
    harness::export(&res.traces, &res.aggregate, dir)?;
    if cfg.progress {
        let _ = writeln!(err, "wrote {} and {}", dir.join("raw.jsonl").display(), dir.join("agg.csv").display());
    }
    let t = cfg.t_max;
    writeln!(out, "t = {t}, {} trials per policy, {:.2} s", cfg.trials, start.elapsed().as_secs_f64()).map_err(io_fail)?;
    let mut header = format!("{:<16} {:<18}", "policy", "beta");
    for m in &cfg.metrics {
        header.push_str(&format!(" {:>14}", m.name()));
    }
    writeln!(out, "{header}").map_err(io_fail)?;
    for p in &cfg.policies {
        let mut line = format!("{:<16} {:<18}", p.label, p.beta_label());
        for &m in &cfg.metrics {
            let v = res.aggregate.get(&p.label, t, m).map_or(f64::NAN, |r| r.median);
            line.push_str(&format!(" {:>14}", fmt_num(v)));
        }
        writeln!(out, "{line}").map_err(io_fail)?;
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

fn csv_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn csv_line(out: &mut dyn Write, fields: &[&dyn Display]) -> Result<(), Failure> {
    let line = fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",");
    writeln!(out, "{line}").map_err(io_fail)
}

fn rank_table(ctx: &ComplexityContext, ts: &[f64], out: &mut dyn Write) -> Result<(), Failure> {
    csv_line(out, &[&"t", &"eta_star", &"eta_tilde", &"closed_form_rank", &"closed_form_reward"])?;
    for &t in ts {
        let (rank, reward) = match theory::closed_form_bound(ctx, t) {
            Ok(b) => (csv_num(b.rank_bound), csv_num(b.reward_bound)),
            Err(TheoryError::Unsupported(_)) => ("na".into(), "na".into()),
            Err(e) => return Err(e.into()),
        };
        let exact = csv_num(theory::eta_star(ctx, t, false));
        let relaxed = csv_num(theory::eta_star(ctx, t, true));
        csv_line(out, &[&csv_num(t), &exact, &relaxed, &rank, &reward])?;
    }
    Ok(())
}

fn complexity_table(ctx: &ComplexityContext, out: &mut dyn Write) -> Result<(), Failure> {
    csv_line(out, &[&"eta", &"S", &"S_relaxed"])?;
    let relaxed = ctx.relaxed_table();
    for (k, (&eta, &s)) in ctx.grid().iter().zip(ctx.exact_table()).enumerate() {
        if eta >= 1.0 {
            break;
        }
        let r = relaxed.get(k).map_or_else(|| "na".to_string(), |&v| csv_num(v));
        csv_line(out, &[&csv_num(eta), &csv_num(s), &r])?;
    }
    Ok(())
}

fn bench(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), Failure> {
    cfg.validate()?;
    csv_line(out, &[&"policy", &"trials", &"mean_ms", &"min_ms", &"max_ms"])?;
    for (p, entry) in cfg.policies.iter().enumerate() {
        let mut ms = Vec::with_capacity(cfg.trials as usize);
        for i in 0..cfg.trials {
            let start = Instant::now();
            harness::run_trial(cfg, p, i)?;
            ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let mean = ms.iter().sum::<f64>() / ms.len() as f64;
        let min = ms.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ms.iter().copied().fold(0.0, f64::max);
        csv_line(out, &[&entry.label, &cfg.trials, &format!("{mean:.3}"), &format!("{min:.3}"), &format!("{max:.3}")])?;
    }
    Ok(())
}
