//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use testroll_core::DesignReport;

use crate::commands::{self, EvaluateOutput, PlanOutput, PriorsOutput, SimulateOutput, SweepRow};
use crate::config::{RunConfig, SweepInput, SweepParameter, DEFAULT_REPLICATES, DEFAULT_SEED};
use crate::error::{AppError, AppResult};
use crate::io;
use crate::simulate::SimOptions;

#[derive(Debug, Parser)]
#[command(name = "testroll", version, about = "Plan, evaluate and simulate profit-maximizing test & roll experiments")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for simulation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Per-replicate draws CSV (simulate only).
    #[arg(long, global = true)]
    pub draws: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Profit-maximizing design and its expected profit, error rate and regret.
    Plan,
    /// Closed-form report for given cell sizes.
    Evaluate {
        #[arg(long)]
        n1: Option<u64>,
        #[arg(long)]
        n2: Option<u64>,
    },
    /// Monte Carlo comparison of policies.
    Simulate,
    /// Optimal and hypothesis-test sample sizes across a parameter grid.
    Sweep(SweepArgs),
    /// Estimate symmetric priors from a CSV of past experiments.
    Priors {
        /// CSV with experiment_id, arm_id, n, mean and optionally sd.
        #[arg(long)]
        input: PathBuf,
        /// Response noise; defaults to the pooled arm sd.
        #[arg(long)]
        s: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub parameter: Option<SweepParameterArg>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameterArg {
    Population,
    S,
    Sigma,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> AppResult<RunConfig> {
    match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Err(AppError::config("--config", "this command needs a config file")),
    }
}

pub fn execute(cli: &Cli) -> AppResult<()> {
    let rendered = match &cli.command {
        Command::Plan => {
            let config = load_config(cli)?;
            let out = commands::plan(&config, &config.problem()?)?;
            render_plan(&out, cli.format)?
        }
        Command::Evaluate { n1, n2 } => {
            let config = load_config(cli)?;
            let problem = config.problem()?;
            let (n1, n2) = match (n1, n2, config.design) {
                (Some(a), Some(b), _) => (*a, *b),
                (None, None, Some(d)) => (d.n1, d.n2),
                _ => return Err(AppError::config("design", "give --n1 and --n2 or a design section")),
            };
            let out = commands::evaluate(&problem, n1, n2)?;
            render_evaluate(&out, cli.format)?
        }
        Command::Simulate => {
            let config = load_config(cli)?;
            let problem = config.problem()?;
            let sim = config.simulation();
            let opts = SimOptions {
                replicates: cli.replicates.or(sim.replicates).unwrap_or(DEFAULT_REPLICATES),
                seed: cli.seed.or(sim.seed).unwrap_or(DEFAULT_SEED),
                threads: cli.threads.or(sim.threads),
                thompson_budget: config.thompson_budget(),
            };
            if opts.replicates == 0 {
                return Err(AppError::config("replicates", "must be at least 1"));
            }
            if opts.threads == Some(0) {
                return Err(AppError::config("threads", "must be at least 1"));
            }
            let out = commands::simulate(&config, &problem, &opts)?;
            if let Some(path) = cli.draws.as_ref().or(sim.draws.as_ref()) {
                let file = create(path)?;
                io::write_draws(&out.results, std::io::BufWriter::new(file))?;
            }
            render_simulate(&out, cli.format)?
        }
        Command::Sweep(args) => {
            let config = load_config(cli)?;
            let problem = config.problem()?;
            let sweep = merge_sweep(config.sweep.clone(), args)?;
            let rows = commands::sweep(&config, &problem, &sweep)?;
            render_sweep(&rows, cli.format)?
        }
        Command::Priors { input, s } => {
            let out = commands::priors(input, *s)?;
            if out.estimation.sigma_truncated {
                eprintln!("warning: between-experiment variance estimate was negative; sigma set to 0");
            }
            render_priors(&out, cli.format)?
        }
    };
    emit(cli, &rendered)
}

fn create(path: &PathBuf) -> AppResult<std::fs::File> {
    std::fs::File::create(path).map_err(|source| AppError::Io {
        path: path.clone(),
        source,
    })
}

fn emit(cli: &Cli, bytes: &[u8]) -> AppResult<()> {
    match &cli.output {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(bytes)?;
        }
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn merge_sweep(file: Option<SweepInput>, args: &SweepArgs) -> AppResult<SweepInput> {
    let parameter = match (args.parameter, &file) {
        (Some(p), _) => match p {
            SweepParameterArg::Population => SweepParameter::Population,
            SweepParameterArg::S => SweepParameter::S,
            SweepParameterArg::Sigma => SweepParameter::Sigma,
        },
        (None, Some(f)) => f.parameter,
        (None, None) => return Err(AppError::config("sweep.parameter", "missing")),
    };
    let flags_grid = args.values.is_some() || args.from.is_some() || args.to.is_some() || args.steps.is_some();
    Ok(match (flags_grid, file) {
        (false, Some(f)) => SweepInput { parameter, ..f },
        _ => SweepInput {
            parameter,
            values: args.values.clone(),
            from: args.from,
            to: args.to,
            steps: args.steps,
            log: args.log,
        },
    })
}

fn json<T: Serialize>(value: &T) -> AppResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn pct(x: f64, decimals: usize) -> String {
    format!("{:.*}%", decimals, 100.0 * x)
}

fn report_fields(prefix: &str, r: &DesignReport) -> Vec<(String, String)> {
    let key = |k: &str| format!("{prefix}{k}");
    vec![
        (key("test_profit"), r.test_profit.to_string()),
        (key("roll_profit"), r.roll_profit.to_string()),
        (key("total_profit"), r.total_profit.to_string()),
        (key("error_rate"), r.error_rate.map_or_else(|| io::NA.into(), |e| e.to_string())),
        (key("pi_profit"), r.pi_profit.to_string()),
        (key("regret"), r.regret.to_string()),
        (key("relative_regret"), r.relative_regret.to_string()),
    ]
}

fn report_text(out: &mut String, r: &DesignReport) {
    use std::fmt::Write as _;
    let _ = writeln!(out, "test profit      {:.2}", r.test_profit);
    let _ = writeln!(out, "roll profit      {:.2}", r.roll_profit);
    let _ = writeln!(out, "total profit     {:.2}", r.total_profit);
    let _ = writeln!(out, "perfect info     {:.2}", r.pi_profit);
    let _ = writeln!(out, "regret           {:.2} ({})", r.regret, pct(r.relative_regret, 2));
    let _ = writeln!(out, "error rate       {}", r.error_rate.map_or_else(|| io::NA.into(), |e| pct(e, 1)));
}

fn render_plan(out: &PlanOutput, format: Format) -> AppResult<Vec<u8>> {
    use std::fmt::Write as _;
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut fields = vec![
                ("model".to_string(), out.model.to_string()),
                ("population".into(), out.design.population.to_string()),
                ("n1".into(), out.design.n1.to_string()),
                ("n2".into(), out.design.n2.to_string()),
                ("n_star".into(), out.n_star.map_or_else(|| io::NA.into(), |n| n.to_string())),
            ];
            fields.extend(report_fields("", &out.report));
            if let Some(ht) = &out.hypothesis_test {
                fields.push(("ht_d".into(), ht.d.to_string()));
                fields.push(("ht_n1".into(), ht.n1.to_string()));
                fields.push(("ht_n2".into(), ht.n2.to_string()));
                fields.push(("ht_n_fpc".into(), ht.n_fpc.map_or_else(|| io::NA.into(), |n| n.to_string())));
            }
            let mut buf = Vec::new();
            io::write_flat_row(&fields, &mut buf)?;
            Ok(buf)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "model            {}", out.model);
            let _ = writeln!(s, "population       {}", out.design.population);
            let _ = writeln!(s, "cells            n1 = {}, n2 = {}", out.design.n1, out.design.n2);
            if let Some(n) = out.n_star {
                let _ = writeln!(s, "n* (continuous)  {n:.2}");
            }
            report_text(&mut s, &out.report);
            if let Some(ht) = &out.hypothesis_test {
                let _ = writeln!(s, "\nhypothesis test  d = {}", ht.d);
                let _ = writeln!(s, "cells            n1 = {}, n2 = {}", ht.n1, ht.n2);
                if ht.exceeds_population {
                    let _ = writeln!(s, "                 (larger than the population)");
                }
                if let Some(r) = &ht.report {
                    report_text(&mut s, r);
                }
                if let Some(n) = ht.n_fpc {
                    let _ = writeln!(s, "\nwith FPC         n = {n}");
                    if let Some(r) = &ht.report_fpc {
                        report_text(&mut s, r);
                    }
                }
            }
            Ok(s.into_bytes())
        }
    }
}

fn render_evaluate(out: &EvaluateOutput, format: Format) -> AppResult<Vec<u8>> {
    use std::fmt::Write as _;
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut fields = vec![
                ("model".to_string(), out.model.to_string()),
                ("population".into(), out.design.population.to_string()),
                ("n1".into(), out.design.n1.to_string()),
                ("n2".into(), out.design.n2.to_string()),
            ];
            fields.extend(report_fields("", &out.report));
            let mut buf = Vec::new();
            io::write_flat_row(&fields, &mut buf)?;
            Ok(buf)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "model            {}", out.model);
            let _ = writeln!(s, "cells            n1 = {}, n2 = {}", out.design.n1, out.design.n2);
            report_text(&mut s, &out.report);
            Ok(s.into_bytes())
        }
    }
}

fn render_simulate(out: &SimulateOutput, format: Format) -> AppResult<Vec<u8>> {
    use std::fmt::Write as _;
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut buf = Vec::new();
            io::write_sim_summary(&out.results, &mut buf)?;
            Ok(buf)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} arms, N = {}, R = {}, seed = {}",
                out.arms, out.population, out.replicates, out.seed
            );
            if let Some(k) = &out.karm_search {
                let _ = writeln!(s, "simulated optimal n per arm: {}", k.n);
            }
            let _ = writeln!(
                s,
                "{:<24} {:>16} {:>12} {:>10} {:>8}",
                "policy", "mean profit", "SE", "regret", "error"
            );
            for r in &out.results {
                let _ = writeln!(
                    s,
                    "{:<24} {:>16.2} {:>12} {:>10} {:>8}{}",
                    r.policy,
                    r.mean_profit,
                    r.mc_standard_error.map_or_else(|| io::NA.into(), |e| format!("{e:.2}")),
                    pct(r.relative_regret, 2),
                    r.error_frequency.map_or_else(|| io::NA.into(), |e| pct(e, 1)),
                    if r.capped { "  (cells capped)" } else { "" }
                );
            }
            Ok(s.into_bytes())
        }
    }
}

fn render_sweep(rows: &[SweepRow], format: Format) -> AppResult<Vec<u8>> {
    match format {
        Format::Json => json(&rows),
        Format::Csv | Format::Text => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.value.to_string(), r.n_star.to_string(), r.n_ht.to_string(), r.n_fpc.to_string()])
                .collect();
            let mut buf = Vec::new();
            io::write_rows(&["value", "n_star", "n_ht", "n_fpc"], &body, &mut buf)?;
            Ok(buf)
        }
    }
}

fn render_priors(out: &PriorsOutput, format: Format) -> AppResult<Vec<u8>> {
    use std::fmt::Write as _;
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let e = &out.estimation;
            let fields = vec![
                ("mu".to_string(), e.mu.to_string()),
                ("sigma".into(), e.sigma.to_string()),
                ("s".into(), e.s.to_string()),
                ("sigma_truncated".into(), e.sigma_truncated.to_string()),
                ("experiments".into(), e.experiments.to_string()),
                ("pairs".into(), e.pairs.to_string()),
            ];
            let mut buf = Vec::new();
            io::write_flat_row(&fields, &mut buf)?;
            Ok(buf)
        }
        Format::Text => {
            let mut s = String::new();
            let e = &out.estimation;
            let _ = writeln!(s, "mu     {}", e.mu);
            let _ = writeln!(s, "sigma  {}{}", e.sigma, if e.sigma_truncated { " (truncated at 0)" } else { "" });
            let _ = writeln!(s, "s      {}", e.s);
            let _ = writeln!(s, "from {} experiments, {} arm pairs", e.experiments, e.pairs);
            Ok(s.into_bytes())
        }
    }
}
