//! Cross-format consistency: a real MATPOWER-formatted `.m` file must build
//! the same network as the bundled JSON mirror.

use loadshed::caseio::{self, Rebalance};
use loadshed::runner;

#[test]
fn ieee14_m_file_matches_json_mirror() {
    let text = include_str!("data/ieee14.m");
    let raw_m = caseio::parse_case(text).expect("m-file parses");
    let net_m = caseio::build_network(&raw_m, Rebalance::Proportional).expect("m-file builds");
    let net_j = runner::load_network("ieee14", Rebalance::Proportional).expect("json builds");

    assert_eq!(net_m.n_buses(), net_j.n_buses());
    assert_eq!(net_m.n_lines(), net_j.n_lines());
    assert_eq!(net_m.lines(), net_j.lines());
    for (a, b) in net_m.admittance().iter().zip(net_j.admittance()) {
        assert_eq!(a, b);
    }
    for (a, b) in net_m.injection().iter().zip(net_j.injection()) {
        assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
    }
    assert_eq!(net_m.load_buses(), net_j.load_buses());
    assert_eq!(net_m.base_mva(), net_j.base_mva());
}

#[test]
fn ieee14_m_file_summary_counts() {
    let text = include_str!("data/ieee14.m");
    let raw = caseio::parse_case(text).expect("m-file parses");
    let s = raw.summary();
    assert_eq!(s.buses, 14);
    assert_eq!(s.branches_in_service, 20);
    assert_eq!(s.gen_buses, 5);
    assert_eq!(s.load_buses, 9);
    assert!((s.total_load_mw - 259.0).abs() < 1e-9);
}
