//! Read a trace file back and summarize its columns; the written format
//! round-trips exactly, so this is also the entry point for custom plotting.
//!
//! Usage: cargo run --example read_trace <trace.txt>

use loadshed::runner;

fn main() {
    let path = match std::env::args().nth(1) {
        Some(p) => p,
        None => {
            eprintln!("usage: read_trace <trace.txt>");
            std::process::exit(2);
        }
    };
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        eprintln!("cannot read {path}: {e}");
        std::process::exit(1);
    });
    let records = runner::parse_trace(&text).unwrap_or_else(|e| {
        eprintln!("cannot parse {path}: {e}");
        std::process::exit(1);
    });

    let Some(first) = records.first() else {
        println!("{path}: empty trace");
        return;
    };
    let last = records.last().unwrap();
    println!("{path}: {} records, iterations {}..{}", records.len(), first.iter, last.iter);
    println!("  objective : {:>14.6} -> {:>14.6}", first.obj, last.obj);
    println!("  prim_res  : {:>14.3e} -> {:>14.3e}", first.prim_res, last.prim_res);
    println!(
        "  dual res  : theta {:.3e}, z {:.3e}, gamma {:.3e} (final)",
        last.theta_res, last.z_res, last.gam_res
    );

    let monotone = records
        .windows(2)
        .all(|p| p[1].obj <= p[0].obj + 1e-9 * (1.0 + p[0].obj.abs()));
    println!("  objective nonincreasing: {monotone}");
}
