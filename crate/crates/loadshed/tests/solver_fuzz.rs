//! Whole-pipeline fuzz: random small networks through the full solver.
//!
//! The driver aborts if the objective ever increases beyond roundoff slack,
//! so a clean run certifies the descent property end to end; on top of that
//! every final state must be feasible and the enumeration bound (attached
//! automatically on small networks) must never be beaten.

use loadshed::netmodel::{is_feasible, DecisionState, Line, PowerNetwork};
use loadshed::palm::{self, InitPolicy, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_network(rng: &mut ChaCha8Rng) -> PowerNetwork {
    let n = rng.gen_range(3..=7);
    // Spanning tree keeps it connected; extra chords make meshes.
    let mut lines: Vec<Line> = (1..n)
        .map(|i| Line {
            from: rng.gen_range(0..i),
            to: i,
        })
        .collect();
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            lines.push(Line { from: a, to: b });
        }
    }
    let admittance: Vec<f64> = (0..lines.len()).map(|_| rng.gen_range(0.2..5.0)).collect();
    let mut injection: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = injection.iter().sum::<f64>() / n as f64;
    for p in injection.iter_mut() {
        *p -= mean;
    }
    // Guarantee some load exists.
    if injection.iter().all(|&p| p >= 0.0) {
        injection[0] -= 0.5;
        injection[n - 1] += 0.5;
    }
    PowerNetwork::new(lines, admittance, injection, 100.0).expect("random network valid")
}

#[test]
fn random_networks_solve_cleanly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf22);
    for trial in 0..30 {
        let net = random_network(&mut rng);
        let k = rng.gen_range(0..=net.n_lines().min(3));
        let rho = [1e3, 1e4, 1e5][trial % 3];
        let config = SolverConfig {
            k,
            rho,
            max_iters: 120,
            trace_every: 1,
            ..SolverConfig::default()
        };
        let report = palm::solve(&net, &config)
            .unwrap_or_else(|e| panic!("trial {trial} (n={}, k={k}): {e}", net.n_buses()));

        assert!(
            report.feasibility.feasible,
            "trial {trial}: final state infeasible: {}",
            report.feasibility
        );
        assert_eq!(report.removed_lines.len(), k, "trial {trial}");
        for pair in report.trace.windows(2) {
            assert!(
                pair[1].obj <= pair[0].obj + 1e-9 * (1.0 + pair[0].obj.abs()),
                "trial {trial}: descent violated in trace"
            );
        }
        // The enumeration's inner solves share the iteration budget, so the
        // bound is only accurate up to their own truncation error.
        if let Some(bf) = &report.brute_force {
            assert!(
                report.objective >= bf.best_objective - 1e-3,
                "trial {trial}: solver beat the exhaustive bound: {} < {}",
                report.objective,
                bf.best_objective
            );
        }
    }
}

#[test]
fn custom_init_states_are_accepted() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let net = random_network(&mut rng);
    let m = net.n_lines();
    let mut gamma = vec![1.0; m];
    gamma[0] = 0.0;
    let init = DecisionState {
        gamma,
        z: vec![0.0; net.n_buses()],
        theta: vec![0.0; net.n_buses()],
    };
    let config = SolverConfig {
        k: 1,
        max_iters: 60,
        init: InitPolicy::State(init),
        ..SolverConfig::default()
    };
    let report = palm::solve(&net, &config).expect("solve from custom init");
    assert!(report.feasibility.feasible);
}

#[test]
fn degenerate_lineless_network_is_handled() {
    let net = PowerNetwork::new(vec![], vec![], vec![0.0, 0.0], 100.0).expect("builds");
    let config = SolverConfig {
        k: 0,
        max_iters: 3,
        ..SolverConfig::default()
    };
    let report = palm::solve(&net, &config).expect("solves");
    assert!(report.removed_lines.is_empty());
    assert_eq!(report.shed_mw, 0.0);
    assert_eq!(report.shed_pct, None);
    let state = DecisionState::flat_start(&net);
    assert!(is_feasible(&net, &state, 0, 1e-12).feasible);
}
