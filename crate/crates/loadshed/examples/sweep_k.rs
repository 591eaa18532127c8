//! Sweep the outage budget K and write traces, reports, and the summary
//! table, mirroring the batch interface of the `loadshed` binary.
//!
//! Usage: cargo run --release --example sweep_k [case] [k_min] [k_max] [out_dir]

use loadshed::palm::SolverConfig;
use loadshed::runner::{self, RunManifest};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("ieee14");
    let k_min: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let k_max: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5);
    let out_dir = args.get(4).map(String::as_str).unwrap_or("sweep_out");

    let manifest = RunManifest {
        case: case.to_string(),
        k_min,
        k_max,
        config: SolverConfig::default(),
        out_dir: out_dir.into(),
    };

    match runner::run(&manifest) {
        Ok(summary) => {
            println!("case {}: K = {k_min}..{k_max}", summary.case_name);
            for row in &summary.rows {
                let pct = row
                    .shed_pct
                    .map(|p| format!("{p:.1}%"))
                    .unwrap_or_else(|| "n/a".into());
                println!(
                    "  K={}: shed {:.1} MW ({pct}), removed {:?}",
                    row.k, row.shed_mw, row.removed_lines
                );
            }
            println!("artifacts in {out_dir}/ (traces, JSON reports, summary table)");
        }
        Err(e) => {
            eprintln!("sweep failed: {e}");
            std::process::exit(1);
        }
    }
}
