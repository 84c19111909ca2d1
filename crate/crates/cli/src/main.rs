use std::path::PathBuf;
use std::process::ExitCode;

use beckner_cli::emit::{emit, Format};
use beckner_cli::fixtures::{fixture, FIXTURE_NAMES};
use beckner_cli::{run, ConfigError, ExperimentConfig, RunReport, Task};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beckner", version, about = "Functional inequalities and transport for detailed-balance quantum Markov semigroups")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true, conflicts_with = "fixture")]
    config: Option<PathBuf>,
    /// Named built-in config (see `beckner fixtures`).
    #[arg(long, global = true)]
    fixture: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv", "plotdata"])]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks listed in the config.
    Run,
    /// Estimate Poincaré, Beckner, MLSI, LSI and dual Beckner constants.
    Constants,
    /// Divergence decay against the certified exponential bound.
    Decay,
    /// Empirical mixing times against the Beckner-based bound.
    Mixing,
    /// Solve for W_{2,p} geodesics between sampled state pairs.
    Transport {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Curvature estimate and the inequalities it implies.
    Ricci {
        #[arg(long, num_args = 1..)]
        p: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Invariant suite; prints a failure table.
    Verify,
    /// List fixtures, or print one as JSON.
    Fixtures { name: Option<String> },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.fixture) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => fixture(name)?,
        (None, None) => ExperimentConfig::default().materialize()?,
    };
    if let Some(s) = cli.seed {
        cfg.seeds.constants = s;
        cfg.seeds.states = s;
        cfg.seeds.ricci = s;
    }
    let single = |t: Task| vec![t];
    match &cli.command {
        Command::Run | Command::Fixtures { .. } => {}
        Command::Constants => cfg.tasks = single(Task::Constants),
        Command::Decay => cfg.tasks = single(Task::Decay),
        Command::Mixing => cfg.tasks = single(Task::Mixing),
        Command::Verify => cfg.tasks = single(Task::Verify),
        Command::Transport { p, steps, tol } => {
            let t = &mut cfg.settings.transport;
            t.p = p.unwrap_or(t.p);
            t.steps = steps.unwrap_or(t.steps);
            t.tol = tol.unwrap_or(t.tol);
            cfg.tasks = single(Task::Transport);
        }
        Command::Ricci { p, samples } => {
            let r = &mut cfg.settings.ricci;
            if let Some(p) = p {
                r.p = p.clone();
            }
            r.samples = samples.unwrap_or(r.samples);
            cfg.tasks = single(Task::Ricci);
        }
    }
    cfg.materialize()
}

fn print_failures(report: &RunReport) {
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        return;
    }
    eprintln!("{:<10} {:<36} {:>6} {:>14} {:>14} {:>14}  property", "task", "check", "kind", "lhs", "rhs", "slack");
    for c in failures {
        let kind = if c.hard { "hard" } else { "soft" };
        eprintln!("{:<10} {:<36} {:>6} {:>14.6e} {:>14.6e} {:>14.6e}  {}", c.task, c.name, kind, c.lhs, c.rhs, c.slack, c.property);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Fixtures { name: None } = &cli.command {
        for n in FIXTURE_NAMES {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    if let Command::Fixtures { name: Some(n) } = &cli.command {
        return match fixture(n) {
            Ok(cfg) => {
                println!("{}", cfg.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run(&cfg);
    let format: Format = cli.format.parse().expect("validated by clap");
    match emit(&report, format, &cli.out) {
        Ok(files) => files.iter().for_each(|f| println!("wrote {}", f.display())),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    for e in &report.errors {
        eprintln!("task {} failed: {}", e.task, e.message);
    }
    print_failures(&report);
    let s = &report.summary;
    println!(
        "{} checks, {} hard failures, {} soft failures, {} skipped, {} errors: {}",
        s.checks,
        s.hard_failures,
        s.soft_failures,
        s.skipped,
        s.errors,
        if s.pass { "PASS" } else { "FAIL" }
    );
    if s.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
