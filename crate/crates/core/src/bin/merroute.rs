//! Command-line front end. All logic lives in `mer_routing::cli`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mer_routing::cli::{
    run_coeffs, run_oracle, run_sizes, run_solve, run_validate, sizes_csv, CliError, SizesRequest,
    SolveOptions, EXIT_INPUT,
};
use mer_routing::solver::{Backend, SolveConfig, DEFAULT_MIP_GAP};

#[derive(Parser)]
#[command(name = "merroute", version, about = "Route mobile energy resources for service restoration")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build, solve, decode and validate the restoration program.
    Solve {
        scenario: PathBuf,
        /// Override the span length in minutes.
        #[arg(long)]
        span: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_MIP_GAP)]
        mip_gap: f64,
        /// Time limit in seconds for the external solver.
        #[arg(long)]
        time_limit: Option<f64>,
        /// `external` or `exact-enumeration`.
        #[arg(long, default_value = "external")]
        backend: Backend,
        /// External solver command (overrides MER_SOLVER_CMD).
        #[arg(long)]
        solver_cmd: Option<String>,
        /// Directory for report.txt, solution.csv, itineraries.csv, sizes.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the model (`.lp` extension for LP, MPS otherwise).
        #[arg(long)]
        write_model: Option<PathBuf>,
    },
    /// Exhaustive best itinerary for a small scenario.
    Oracle {
        scenario: PathBuf,
        #[arg(long)]
        span: Option<u32>,
    },
    /// Model-size table (CSV) for the proposed model and the baselines.
    Sizes {
        #[arg(long)]
        nodes: Option<u64>,
        #[arg(long)]
        mers: Option<u64>,
        #[arg(long)]
        spans: Option<u64>,
        /// Take N, M, D and travel times from a scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        span: Option<u32>,
        /// Write sizes.csv into this directory instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show and check the transition coefficients.
    Coeffs,
    /// Validate a `var,value` solution file against a scenario.
    Validate {
        scenario: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        span: Option<u32>,
    },
}

fn run(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::Solve {
            scenario,
            span,
            mip_gap,
            time_limit,
            backend,
            solver_cmd,
            out,
            write_model,
        } => {
            let backend = match (backend, solver_cmd) {
                (Backend::External { .. }, Some(cmd)) => Backend::External { command: Some(cmd) },
                (b, _) => b,
            };
            let options = SolveOptions {
                span,
                config: SolveConfig {
                    mip_gap,
                    time_limit_s: time_limit,
                    backend,
                },
                out_dir: out,
                model_path: write_model,
            };
            let report = run_solve(&scenario, &options)?;
            print!("{}", report.render());
            println!("solve time: {:.3} s", report.wall_time.as_secs_f64());
            Ok(report.exit_code())
        }
        Cmd::Oracle { scenario, span } => {
            print!("{}", run_oracle(&scenario, span)?.render());
            Ok(0)
        }
        Cmd::Sizes {
            nodes,
            mers,
            spans,
            scenario,
            span,
            out,
        } => {
            let reports = run_sizes(&SizesRequest {
                nodes,
                mers,
                spans,
                scenario,
                span,
            })?;
            let text = sizes_csv(&reports);
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .and_then(|_| std::fs::write(dir.join("sizes.csv"), text))
                        .map_err(|e| CliError::Input(e.to_string()))?;
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Cmd::Coeffs => {
            let (text, ok) = run_coeffs();
            print!("{text}");
            Ok(if ok { 0 } else { EXIT_INPUT })
        }
        Cmd::Validate {
            scenario,
            solution,
            span,
        } => {
            let report = run_validate(&scenario, &solution, span)?;
            print!("{report}");
            Ok(if report.is_valid() { 0 } else { mer_routing::cli::EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // usage errors are input errors; --help and --version are not errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
