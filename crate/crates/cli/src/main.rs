use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dwdg_core::harness::{emit_table, format_error, run_sweep, solve_level, ExampleId, ExampleSpec, SweepOptions, TableFormat};
use dwdg_core::ocp::{Bounds, ControlDegree};

/// Refinement studies for DWDG discretizations of box-constrained elliptic
/// optimal control on the unit square.
#[derive(Parser)]
#[command(name = "dwdg-ocp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep over penalties and mesh levels and print a convergence table.
    Run(RunArgs),
    /// Solve on one mesh level and print errors and iteration count.
    Solve(SolveArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Model problem: 1 (unconstrained) or 2 (control box [3, 15]).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    example: u8,
    /// Polynomial degree of the control space.
    #[arg(long = "control-degree", default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    control_degree: u8,
    /// Regularization weight; defaults to the example's value.
    #[arg(long)]
    beta: Option<f64>,
    /// Control bounds as `lo,hi` (use `inf`/`-inf` for no bound) or `inf` for none.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Relative stopping tolerance of the active set iteration.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap of the active set iteration.
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated penalty parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,5")]
    gamma: Vec<f64>,
    /// Comma-separated subdivisions N (h = 1/(2N)).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    levels: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    gamma: f64,
    /// Subdivisions N (h = 1/(2N)).
    #[arg(long)]
    level: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

fn parse_bound(s: &str) -> Result<Option<f64>> {
    match s.trim() {
        "inf" | "+inf" | "-inf" => Ok(None),
        v => Ok(Some(v.parse().with_context(|| format!("bad bound {v:?}"))?)),
    }
}

fn parse_bounds(s: &str) -> Result<Bounds> {
    if s.trim() == "inf" {
        return Ok(Bounds::unbounded());
    }
    let Some((lo, hi)) = s.split_once(',') else {
        bail!("bounds must be `lo,hi` or `inf`, got {s:?}");
    };
    Ok(Bounds::new(parse_bound(lo)?, parse_bound(hi)?)?)
}

impl ProblemArgs {
    fn setup(&self) -> Result<(ExampleSpec, ControlDegree)> {
        let mut example = ExampleSpec::new(ExampleId::from_number(self.example)?);
        example.self_check()?;
        if let Some(beta) = self.beta {
            example.beta = beta;
        }
        if let Some(b) = &self.bounds {
            example.bounds = parse_bounds(b)?;
        }
        Ok((example, ControlDegree::from_k(self.control_degree as usize)?))
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let (example, degree) = args.problem.setup()?;
    let opts = SweepOptions {
        gammas: args.gamma,
        levels: args.levels,
        tol: args.problem.tol,
        max_iter: args.problem.max_iter,
    };
    let records = run_sweep(&example, degree, &opts)?;
    let format = match args.format {
        Format::Csv => TableFormat::Csv,
        Format::Md => TableFormat::Markdown,
    };
    let text = emit_table(&records, format);
    match args.out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(records.iter().all(|r| r.converged))
}

fn solve(args: SolveArgs) -> Result<bool> {
    let (example, degree) = args.problem.setup()?;
    let opts = SweepOptions {
        gammas: vec![args.gamma],
        levels: vec![args.level],
        tol: args.problem.tol,
        max_iter: args.problem.max_iter,
    };
    let result = solve_level(&example, degree, args.gamma, args.level, &opts)?;
    let r = &result.record;
    println!("example {} k={} gamma={} N={} h=1/{}", r.example, r.k, r.gamma, r.n, 2 * r.n);
    println!("dof_state {} dof_control {}", r.dof_state, r.dof_control);
    println!("err_y_energy {}", format_error(r.err_y_energy));
    println!("err_p_energy {}", format_error(r.err_p_energy));
    println!("err_u_l2 {}", format_error(r.err_u_l2));
    println!("pdas_iters {} kkt_residual {:.3e}", r.pdas_iters, result.solution.kkt_residual);
    Ok(result.solution.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Solve(args) => solve(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: active set iteration did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
