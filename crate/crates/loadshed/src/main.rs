//! Thin command-line wrapper over [`loadshed::runner`].

use clap::Parser;
use loadshed::caseio::Rebalance;
use loadshed::palm::SolverConfig;
use loadshed::runner::{self, RunManifest};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "loadshed",
    about = "Worst-case transmission-line outage screening for lossless AC networks"
)]
struct Cli {
    /// Bundled case name (ieee14, ieee118, toy2bus, synth4) or a path to a
    /// MATPOWER .m / JSON case file
    #[arg(long)]
    case: String,

    /// Lines to remove: a single K or an inclusive range like `1..5`
    #[arg(long, default_value = "1")]
    k: String,

    /// Penalty weight on the power-flow defect
    #[arg(long)]
    rho: Option<f64>,

    /// Stepsize safety factor for the gamma block (must exceed 1)
    #[arg(long)]
    r1: Option<f64>,

    /// Stepsize safety factor for the z block (must exceed 1)
    #[arg(long)]
    r2: Option<f64>,

    /// Stepsize safety factor for the theta block (must exceed 1)
    #[arg(long)]
    r3: Option<f64>,

    #[arg(long)]
    max_iters: Option<usize>,

    /// Stop early once the primal residual falls below this (0 disables)
    #[arg(long)]
    primal_tol: Option<f64>,

    /// Stop early once all dual residuals fall below this (0 disables)
    #[arg(long)]
    dual_tol: Option<f64>,

    /// KKT tolerance of the inner angle projection
    #[arg(long)]
    inner_tol: Option<f64>,

    /// Injection rebalancing policy: proportional | slack
    #[arg(long, default_value = "proportional")]
    rebalance: Rebalance,

    /// Output directory for traces, reports, and the summary table
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Keep every Nth trace row (the final row is always kept)
    #[arg(long)]
    trace_every: Option<usize>,

    /// Parse and check the case instead of solving
    #[arg(long)]
    validate: bool,
}

fn parse_k_range(text: &str) -> Result<(usize, usize), String> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| format!("bad K `{lo}`"))?;
        let hi: usize = hi.trim().parse().map_err(|_| format!("bad K `{hi}`"))?;
        Ok((lo, hi))
    } else {
        let k: usize = text.trim().parse().map_err(|_| format!("bad K `{text}`"))?;
        Ok((k, k))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.validate {
        return match runner::validate(&cli.case, cli.rebalance) {
            Ok(report) => {
                print!("{report}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }

    let (k_min, k_max) = match parse_k_range(&cli.k) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    let mut config = SolverConfig {
        rebalance: cli.rebalance,
        ..SolverConfig::default()
    };
    if let Some(v) = cli.rho {
        config.rho = v;
    }
    if let Some(v) = cli.r1 {
        config.r1 = v;
    }
    if let Some(v) = cli.r2 {
        config.r2 = v;
    }
    if let Some(v) = cli.r3 {
        config.r3 = v;
    }
    if let Some(v) = cli.max_iters {
        config.max_iters = v;
    }
    if let Some(v) = cli.primal_tol {
        config.primal_tol = v;
    }
    if let Some(v) = cli.dual_tol {
        config.dual_tol = v;
    }
    if let Some(v) = cli.inner_tol {
        config.inner_tol = v;
    }
    if let Some(v) = cli.trace_every {
        config.trace_every = v;
    }

    let manifest = RunManifest {
        case: cli.case,
        k_min,
        k_max,
        config,
        out_dir: cli.out,
    };

    match runner::run(&manifest) {
        Ok(summary) => {
            for row in &summary.rows {
                let pct = row
                    .shed_pct
                    .map(|p| format!("{p:.1}%"))
                    .unwrap_or_else(|| "n/a".to_string());
                let lines = row
                    .removed_lines
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                println!(
                    "K={}: shed {:.1} MW ({pct}), removed [{lines}], prim_res {:.3e}, {} iterations",
                    row.k, row.shed_mw, row.primal_residual, row.iterations
                );
            }
            println!("table: {}", summary.table_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
