//! Solve a single case for one K and print the trace shape plus the report.
//!
//! Usage: cargo run --release --example solve_one [case] [K] [max_iters] [rho]

use loadshed::caseio::Rebalance;
use loadshed::palm::{self, SolverConfig};
use loadshed::runner;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("ieee14");
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5);
    let max_iters: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let rho: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1e5);

    let net = runner::load_network(case, Rebalance::Proportional).expect("case loads");
    let config = SolverConfig {
        k,
        rho,
        max_iters,
        ..SolverConfig::default()
    };

    let t0 = std::time::Instant::now();
    let report = palm::solve(&net, &config).expect("solve succeeds");
    let elapsed = t0.elapsed();

    println!("case {case}, K={k}, rho={rho:.0e}, {max_iters} iterations in {elapsed:.2?}");
    println!("removed lines: {:?}", report.removed_lines);
    println!(
        "shed: {:.1} MW ({})",
        report.shed_mw,
        report
            .shed_pct
            .map(|p| format!("{p:.1}%"))
            .unwrap_or_else(|| "n/a".into())
    );
    println!("objective: {:.6}", report.objective);
    println!("primal residual: {:.3e}", report.primal_residual);
    println!("feasibility: {}", report.feasibility);
    for probe in [1, 2, 5, 10, 50, 100, 200, 500, 1000, 2000] {
        if let Some(r) = report.trace.iter().find(|r| r.iter == probe) {
            println!(
                "  iter {:>5}: obj {:>14.6} theta_res {:.3e} z_res {:.3e} gam_res {:.3e} prim_res {:.3e}",
                r.iter, r.obj, r.theta_res, r.z_res, r.gam_res, r.prim_res
            );
        }
    }
    if let Some(last) = report.trace.last() {
        println!(
            "  final {:>5}: obj {:>14.6} theta_res {:.3e} z_res {:.3e} gam_res {:.3e} prim_res {:.3e}",
            last.iter, last.obj, last.theta_res, last.z_res, last.gam_res, last.prim_res
        );
    }
    if let Some(bf) = &report.brute_force {
        println!(
            "brute force: best obj {:.6} at {:?}, gap {:.3e}",
            bf.best_objective, bf.best_removed, bf.objective_gap
        );
    }
}
