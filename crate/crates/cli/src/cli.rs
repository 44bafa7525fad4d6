//! Command-line surface. Precedence: defaults, then `--config`, then flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fixdepth_core::models::{ModelName, ModelSpec};
use fixdepth_core::optimize::GradMode;

use crate::benchmark;
use crate::config::{benchmark_optimizer, Format, RunConfig};
use crate::failure::{FailureKind, Stage, StageError};
use crate::record::RunRecord;
use crate::run;
use crate::scaling::{self, ScalingSpec};
use crate::trace;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "fixdepth", version, about = "Fixed-depth compilation of spin-chain time evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose and optimize; writes record.json and the cost trace.
    Decompose(RunArgs),
    /// Decompose, then evaluate the error over [0, t_max].
    Curve(RunArgs),
    /// Normalized cost per iteration for several orders.
    CostTrace {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated orders.
        #[arg(long, default_value = "1,2,3,4")]
        orders: String,
    },
    /// Error at table_t for every model × order cell.
    Benchmark {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated model names; all six by default.
        #[arg(long, value_delimiter = ',')]
        models: Vec<ModelName>,
        #[arg(long, default_value = "1,2,3,4")]
        orders: String,
    },
    /// Truncation slopes and the Trotter sweep on a pair (A, B).
    Scaling {
        #[command(flatten)]
        run: RunArgs,
        /// A as `LABEL:COEFF,...`; defaults to X.
        #[arg(long, requires = "b")]
        a: Option<String>,
        #[arg(long, requires = "a")]
        b: Option<String>,
        /// Split the configured model instead: A = X-only terms, B = the rest.
        #[arg(long, conflicts_with = "a")]
        from_model: bool,
        #[arg(long, default_value = "1,2,3,4")]
        orders: String,
    },
    /// Re-evaluate a stored record from its own θ*.
    Verify { record: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradArg {
    Fd,
    Analytic,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<ModelName>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long)]
    pub table_t: Option<f64>,
    /// Gradient ∞-norm tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub grad: Option<GradArg>,
    #[arg(long)]
    pub multi_start: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Benchmark worker cap; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl RunArgs {
    /// `base` (or the `--config` file) with the flags applied, validated.
    pub fn resolve(&self, base: RunConfig) -> Result<RunConfig, StageError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => base,
        };
        if self.model.is_some() || self.qubits.is_some() {
            let name = self.model.unwrap_or(c.model.name);
            let n = self.qubits.unwrap_or(c.model.n);
            if name != c.model.name {
                c.model = ModelSpec::new(name, n);
            } else {
                c.model.n = n;
            }
        }
        if let Some(v) = self.order {
            c.order = v;
        }
        if let Some(v) = self.seed {
            c.optimizer.seed = v;
        }
        if let Some(v) = self.t_max {
            c.t_max = v;
        }
        if let Some(v) = self.t_points {
            c.t_points = v;
        }
        if let Some(v) = self.table_t {
            c.table_t = v;
        }
        if let Some(v) = self.tol {
            c.optimizer.tol_grad_inf = v;
        }
        if let Some(v) = self.max_iters {
            c.optimizer.max_iters = v;
        }
        if let Some(g) = self.grad {
            c.optimizer.grad_mode = match g {
                GradArg::Fd => GradMode::FiniteDifference,
                GradArg::Analytic => GradMode::Analytic,
            };
        }
        if let Some(v) = self.multi_start {
            c.optimizer.multi_start = v;
        }
        if let Some(v) = &self.output {
            c.output_dir = v.clone();
        }
        if !self.format.is_empty() {
            c.formats = self.format.clone();
        }
        c.validate()?;
        Ok(c)
    }

    fn workers(&self) -> Result<usize, StageError> {
        match self.workers {
            Some(0) => Err(StageError::new(Stage::Config, FailureKind::Config, "--workers must be at least 1")),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

/// Runs a parsed command, printing a short summary; returns the exit code.
pub fn dispatch(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32, StageError> {
    match command {
        Command::Decompose(args) => run_single(&args, false),
        Command::Curve(args) => run_single(&args, true),
        Command::CostTrace { run, orders } => {
            let config = run.resolve(RunConfig::default())?;
            let orders = trace::parse_orders(&orders)?;
            let traces = trace::run_cost_trace(&config, &orders)?;
            let dir = config.output_dir.join(format!("{}-cost-trace", &config.hash()[..12]));
            trace::write_outputs(&traces, &dir, &config.formats)?;
            for t in &traces {
                println!(
                    "order {}: converged={} iterations_to_tolerance={} plateau_iteration={} final_normalized_cost={:.12}",
                    t.order,
                    t.converged,
                    t.iterations_to_tolerance.map_or("-".into(), |i| i.to_string()),
                    t.plateau_iteration,
                    t.final_normalized_cost
                );
            }
            println!("{}", dir.display());
            Ok(if traces.iter().all(|t| t.converged) {
                0
            } else {
                FailureKind::Optimizer.exit_code()
            })
        }
        Command::Benchmark { run, models, orders } => {
            let base = run.resolve(RunConfig {
                optimizer: benchmark_optimizer(),
                ..RunConfig::default()
            })?;
            let orders = trace::parse_orders(&orders)?;
            let models = if models.is_empty() {
                ModelName::ALL.to_vec()
            } else {
                models
            };
            let table = benchmark::run_benchmark(&base, &models, &orders, run.workers()?, true)?;
            let dir = base.output_dir.join(format!("{}-benchmark", &base.hash()[..12]));
            benchmark::write_outputs(&table, &dir, &base.formats)?;
            for r in &table.rows {
                println!(
                    "{:<12} order {} n={} error_at_t={} converged={} trend={}",
                    r.model.as_str(),
                    r.order,
                    r.n,
                    r.error_at_t.map_or("-".into(), |e| format!("{e:.3e}")),
                    r.converged,
                    r.trend
                        .map_or("-".into(), |t| serde_json::to_string(&t).unwrap_or_default().replace('"', ""))
                );
                if let Some(f) = &r.failure {
                    println!("    {f}");
                }
            }
            println!("{}", dir.display());
            Ok(table.exit_code())
        }
        Command::Scaling {
            run,
            a,
            b,
            from_model,
            orders,
        } => {
            let config = run.resolve(RunConfig::default())?;
            let (a, b) = match (a, b) {
                (Some(a), Some(b)) => (scaling::parse_element(&a)?, scaling::parse_element(&b)?),
                _ if from_model => scaling::model_pair(&config.model)?,
                _ => (scaling::parse_element("X")?, scaling::parse_element("Z")?),
            };
            let mut spec = ScalingSpec::new(a, b);
            spec.orders = trace::parse_orders(&orders)?;
            spec.coefficients = config.coefficients;
            let report = scaling::run_scaling(&spec)?;
            let dir = config.output_dir.join("scaling");
            scaling::write_outputs(&report, &dir, &config.formats)?;
            for r in &report.truncation {
                println!(
                    "order {}: slope {}",
                    r.order,
                    r.slope.map_or("saturated".into(), |s| format!("{s:.3}"))
                );
            }
            for r in &report.trotter {
                println!(
                    "trotter corrected={}: slope {}",
                    r.corrected,
                    r.slope.map_or("saturated".into(), |s| format!("{s:.3}"))
                );
            }
            if let Some(c) = report.bound_constant {
                println!("order-2 bound constant C = {c:.4e}");
            }
            println!("{}", dir.display());
            Ok(0)
        }
        Command::Verify { record } => {
            let r = RunRecord::read(&record)?;
            let report = verify::verify_record(&r)?.into_result()?;
            println!(
                "verified: cost {:.1e}, h0 {:.1e}, residual {:.1e}, curve {}",
                report.cost_diff,
                report.h0_diff,
                report.residual_diff,
                report.curve_diff.map_or("-".into(), |d| format!("{d:.1e}"))
            );
            Ok(0)
        }
    }
}

fn run_single(args: &RunArgs, curve: bool) -> Result<i32, StageError> {
    let config = args.resolve(RunConfig::default())?;
    let mut outcome = run::execute(&config, curve);
    let path = run::persist(&mut outcome)?;
    let r = &outcome.record;
    if let Some(o) = &r.optimization {
        println!(
            "converged={} iterations={} final_cost={:.12} residual/|H|={:.3e}",
            o.converged,
            o.iterations,
            o.final_cost,
            r.residual_relative.unwrap_or(f64::NAN)
        );
    }
    if let Some(c) = &r.error_curve {
        println!("max error over [0, {}] = {:.3e}", config.t_max, c.max_error());
    }
    if let Some(e) = r.error_at_table_t {
        println!("error at t = {} is {e:.3e}", config.table_t);
    }
    if let Some(f) = &r.failure {
        eprintln!("error: {f}");
    }
    println!("{}", path.display());
    Ok(r.exit_code())
}
