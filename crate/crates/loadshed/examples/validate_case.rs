//! Parse a case, build the network, and print the diagnostics.
//!
//! Usage: cargo run --example validate_case [case] [proportional|slack]

use loadshed::caseio::Rebalance;
use loadshed::runner;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("ieee14");
    let rebalance: Rebalance = args
        .get(2)
        .map(|s| s.parse().expect("policy"))
        .unwrap_or_default();

    match runner::validate(case, rebalance) {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("validation failed: {e}");
            std::process::exit(1);
        }
    }
}
