//! Exhaustive check on a small case: enumerate every outage set, solve the
//! continuous inner problem for each, and compare against the solver.
//!
//! Usage: cargo run --release --example brute_force_gap [case] [K]

use loadshed::caseio::Rebalance;
use loadshed::palm::{self, SolverConfig};
use loadshed::runner;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("synth4");
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);

    let net = runner::load_network(case, Rebalance::Proportional).expect("case loads");
    if net.n_lines() > palm::BRUTE_FORCE_MAX_LINES {
        eprintln!(
            "case has {} lines; enumeration is only attached up to {}",
            net.n_lines(),
            palm::BRUTE_FORCE_MAX_LINES
        );
        std::process::exit(1);
    }

    let config = SolverConfig {
        k,
        rho: 1e4,
        max_iters: 20_000,
        ..SolverConfig::default()
    };
    let report = palm::solve(&net, &config).expect("solve");
    let bf = report.brute_force.as_ref().expect("enumeration attached");

    println!("case {case}, K={k}");
    println!(
        "solver:      objective {:+.6}, removed {:?}, shed {:.1} MW",
        report.objective, report.removed_lines, report.shed_mw
    );
    println!(
        "enumeration: objective {:+.6}, removed {:?}",
        bf.best_objective, bf.best_removed
    );
    println!("gap (solver - best): {:+.3e}", bf.objective_gap);

    let residual =
        palm::critical_point_residual(&net, &report.final_state, config.rho).expect("residual");
    println!("critical-point residual at the solver state: {residual:.3e}");
}
