use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use roa_core::cli::{check_sweep, cmd_certify, cmd_convergence, cmd_oracle, cmd_solve, cmd_sweep, SweepSummary};
use roa_core::config::RunConfig;
use roa_core::oracle::ConvergenceTime;
use roa_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CHECK: u8 = 3;

/// Region-of-attraction estimation for a node of a load-balancing network.
#[derive(Parser)]
#[command(name = "roa", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration; the default experiment pack when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run on a single thread.
    #[arg(long, global = true)]
    serial: bool,
    /// Exit with status 3 when a checked property fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Gershgorin stability certificate of the linear network Jacobian.
    Certify,
    /// Level-set ROA estimates for every experiment and w.
    Solve,
    /// Oracle basins by direct integration.
    Oracle,
    /// Level sets, oracle basins and their comparison.
    Sweep,
    /// Time for the tracked node to settle, per w.
    Convergence,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn report_pack(s: &SweepSummary, check: bool) -> u8 {
    print!("{}", roa_core::cli::summary_table(s));
    let violations = check_sweep(s);
    if check && !violations.is_empty() {
        for v in &violations {
            eprintln!("check failed: {v}");
        }
        return EXIT_CHECK;
    }
    if s.failures > 0 {
        EXIT_NUMERICAL
    } else {
        0
    }
}

fn run(args: &Args, cfg: &RunConfig, out: &Path) -> Result<u8, Error> {
    Ok(match args.command {
        Cmd::Certify => {
            let r = cmd_certify(cfg, out)?;
            println!("n = {}  beta = {}  gamma = {}", r.n, r.beta, r.gamma);
            println!("certified: {}  margin: {}", r.certified, r.margin);
            if r.certified {
                0
            } else {
                EXIT_CHECK
            }
        }
        Cmd::Solve => report_pack(&cmd_solve(cfg, out)?, args.check),
        Cmd::Oracle => report_pack(&cmd_oracle(cfg, out)?, args.check),
        Cmd::Sweep => report_pack(&cmd_sweep(cfg, out)?, args.check),
        Cmd::Convergence => {
            let tables = cmd_convergence(cfg, out)?;
            let mut code = 0;
            for t in &tables {
                println!("{}", t.experiment);
                for &(w, c) in &t.rows {
                    let time = match c {
                        ConvergenceTime::Reached(t) => format!("{t:.3}"),
                        ConvergenceTime::Timeout => "timeout".into(),
                        ConvergenceTime::Diverged => "diverged".into(),
                    };
                    println!("  w = {w:<6} {time}");
                }
                if args.check && !t.strictly_decreasing() {
                    eprintln!("check failed: {}: times do not strictly decrease with w", t.experiment);
                    code = EXIT_CHECK;
                }
            }
            code
        }
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.serial {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(1).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    let cfg = match &args.config {
        Some(path) => RunConfig::from_path(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    match run(&args, &cfg, &out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
