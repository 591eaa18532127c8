//! Compare penalty weights: a larger rho tightens the power-flow defect but
//! slows the dual residuals, so the useful band is roughly 1e4 to 1e6.
//!
//! Usage: cargo run --release --example sweep_rho [case] [K] [max_iters]

use loadshed::caseio::Rebalance;
use loadshed::palm::{self, SolverConfig};
use loadshed::runner;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("ieee14");
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5);
    let max_iters: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1000);

    let net = runner::load_network(case, Rebalance::Proportional).expect("case loads");

    println!("case {case}, K={k}, {max_iters} iterations");
    println!("rho      | objective      | prim_res  | max dual res | shed");
    for rho in [1e4, 1e5, 1e6] {
        let config = SolverConfig {
            k,
            rho,
            max_iters,
            ..SolverConfig::default()
        };
        let report = palm::solve(&net, &config).expect("solve");
        let last = report.trace.last().expect("trace");
        let dual = last.theta_res.max(last.z_res).max(last.gam_res);
        println!(
            "{rho:<8.0e} | {:<14.6} | {:<9.3e} | {:<12.3e} | {:.1} MW",
            report.objective, report.primal_residual, dual, report.shed_mw
        );
    }
}
