//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::check::run_checks;
use crate::config::{BenchConfig, EnvSpec};
use crate::error::{BenchError, Result};
use crate::suite::{run_learning_suite, run_planning_suite, summary_path, write_report};

#[derive(Debug, Parser)]
#[command(name = "rankone", version, about = "Benchmarks for tabular MDP planners and learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterations-to-threshold sweep over the planners.
    Plan(SweepArgs),
    /// Fixed-budget sweep over the learners.
    Learn(SweepArgs),
    /// Write one generated model as JSON.
    Gen {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Instance index to emit.
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
    /// Run the invariant checks on generated models.
    Check,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// garnet, graph, gridworld (terminal) or absorbing-gridworld.
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated discount factors.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Learning rounds; for `plan`, the iteration cap.
    #[arg(long)]
    iters: Option<usize>,
    /// Learning rows are written every this many rounds.
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Also record the error of the greedy policy's value.
    #[arg(long)]
    policy_value: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Plan,
    Learn,
    Gen,
}

impl SweepArgs {
    fn resolve(self, mode: Mode) -> Result<BenchConfig> {
        let mut cfg = match &self.config {
            Some(path) => BenchConfig::from_file(path)?,
            None => BenchConfig::default(),
        };
        if let Some(env) = &self.env {
            cfg.env = EnvSpec::from_name(env)?;
        }
        if let Some(g) = self.gamma {
            cfg.gammas = g;
        }
        if let Some(v) = self.instances {
            cfg.instances = v;
        }
        if let Some(v) = self.seeds {
            cfg.seeds = v;
        }
        if let Some(a) = self.algos {
            cfg.algos = a;
        }
        if let Some(v) = self.iters {
            match mode {
                Mode::Plan => cfg.max_iters = v,
                _ => cfg.iters = v,
            }
        }
        if let Some(v) = self.eval_every {
            cfg.eval_every = v;
        }
        if let Some(v) = self.out {
            cfg.out = Some(v);
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = self.master_seed {
            cfg.master_seed = v;
        }
        cfg.policy_value |= self.policy_value;
        if cfg.out.is_none() {
            return Err(BenchError::Config("--out is required".into()));
        }
        if mode == Mode::Gen && cfg.algos.is_empty() {
            // Algorithms are irrelevant when only writing a model.
            cfg.algos.push("vi".into());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(command: Command) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Plan(args) => {
            let cfg = args.resolve(Mode::Plan)?;
            let report = run_planning_suite(&cfg)?;
            let out = cfg.out.as_ref().unwrap();
            write_report(out, &report.rows, &report.summary)?;
            for s in &report.summary {
                writeln!(
                    stdout,
                    "{} γ={} {:<10} {:<7} median {} (q1 {}, q3 {}), unreachable {}/{}",
                    s.env, s.gamma, s.algo, s.metric, s.median, s.q1, s.q3, s.unreachable, s.runs
                )?;
            }
            writeln!(stdout, "wrote {} and {}", out.display(), summary_path(out).display())?;
        }
        Command::Learn(args) => {
            let cfg = args.resolve(Mode::Learn)?;
            let report = run_learning_suite(&cfg)?;
            let out = cfg.out.as_ref().unwrap();
            write_report(out, &report.rows, &report.summary)?;
            for s in &report.summary {
                writeln!(
                    stdout,
                    "{} γ={} {:<7} final value error median {:e} (q1 {:e}, q3 {:e}), diverged {}/{}",
                    s.env, s.gamma, s.algo, s.value_median, s.value_q1, s.value_q3, s.diverged, s.runs
                )?;
            }
            writeln!(stdout, "wrote {} and {}", out.display(), summary_path(out).display())?;
        }
        Command::Gen { sweep, instance } => {
            let cfg = sweep.resolve(Mode::Gen)?;
            let mdp = cfg.env.build(cfg.master_seed, instance, cfg.gammas[0])?;
            let out = cfg.out.as_ref().unwrap();
            std::fs::write(out, mdp.to_json())?;
            writeln!(stdout, "wrote {} ({} states, {} actions)", out.display(), mdp.n(), mdp.m())?;
        }
        Command::Check => {
            let results = run_checks()?;
            let mut failed = 0;
            for c in &results {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(stdout, "{tag} {}: {}", c.name, c.detail)?;
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(BenchError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
