//! Validate the three block gradients against central finite differences of
//! the objective at random feasible states.
//!
//! Usage: cargo run --release --example gradient_check [case] [points]

use loadshed::caseio::Rebalance;
use loadshed::netmodel::DecisionState;
use loadshed::objective::{eval_h, grad_gamma, grad_theta, grad_z};
use loadshed::projections::project_z;
use loadshed::runner;

const H: f64 = 1e-6;

/// xorshift-style generator; keeps the example free of extra dependencies.
struct Rng(u64);
impl Rng {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn sym(&mut self) -> f64 {
        2.0 * self.next() - 1.0
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let case = args.get(1).map(String::as_str).unwrap_or("toy2bus");
    let points: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);

    let net = runner::load_network(case, Rebalance::Proportional).expect("case loads");
    let rho = 1e5;
    let mut rng = Rng(0x5eed_1234_abcd_ef01);
    let mut worst = [0.0_f64; 3];

    for _ in 0..points {
        let state = random_feasible(&net, &mut rng);
        let checks = [
            (
                "gamma",
                grad_gamma(&net, &state, rho).unwrap(),
                Block::Gamma,
            ),
            ("z", grad_z(&net, &state, rho).unwrap(), Block::Z),
            (
                "theta",
                grad_theta(&net, &state, rho).unwrap(),
                Block::Theta,
            ),
        ];
        for (i, (_, analytic, block)) in checks.into_iter().enumerate() {
            let fd = finite_difference(&net, &state, rho, block);
            let err = relative_error(&fd, &analytic);
            if err > worst[i] {
                worst[i] = err;
            }
        }
    }

    println!("case {case}, {points} random feasible states, central differences h = {H:.0e}");
    for (name, err) in ["gamma", "z", "theta"].iter().zip(worst) {
        let verdict = if err <= 1e-6 { "ok" } else { "MISMATCH" };
        println!("  grad_{name:<5}: worst relative error {err:.3e}  {verdict}");
    }
}

enum Block {
    Gamma,
    Z,
    Theta,
}

fn random_feasible(net: &loadshed::PowerNetwork, rng: &mut Rng) -> DecisionState {
    let m = net.n_lines();
    let k = (rng.next() * (m + 1) as f64) as usize % (m + 1);
    let mut gamma = vec![1.0; m];
    let mut removed = 0;
    while removed < k {
        let i = (rng.next() * m as f64) as usize % m;
        if gamma[i] == 1.0 {
            gamma[i] = 0.0;
            removed += 1;
        }
    }
    let v: Vec<f64> = (0..net.n_buses()).map(|_| rng.sym() * 0.5).collect();
    let z = project_z(&v, net.z_lower(), net.z_upper()).unwrap();
    let theta: Vec<f64> = (0..net.n_buses())
        .map(|_| rng.sym() * std::f64::consts::FRAC_PI_4)
        .collect();
    DecisionState { gamma, z, theta }
}

fn finite_difference(
    net: &loadshed::PowerNetwork,
    state: &DecisionState,
    rho: f64,
    block: Block,
) -> Vec<f64> {
    let dim = match block {
        Block::Gamma => net.n_lines(),
        _ => net.n_buses(),
    };
    (0..dim)
        .map(|i| {
            let mut plus = state.clone();
            let mut minus = state.clone();
            match block {
                Block::Gamma => {
                    plus.gamma[i] += H;
                    minus.gamma[i] -= H;
                }
                Block::Z => {
                    plus.z[i] += H;
                    minus.z[i] -= H;
                }
                Block::Theta => {
                    plus.theta[i] += H;
                    minus.theta[i] -= H;
                }
            }
            (eval_h(net, &plus, rho).unwrap() - eval_h(net, &minus, rho).unwrap()) / (2.0 * H)
        })
        .collect()
}

fn relative_error(fd: &[f64], analytic: &[f64]) -> f64 {
    let diff: f64 = fd
        .iter()
        .zip(analytic)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = analytic.iter().map(|g| g * g).sum::<f64>().sqrt();
    diff / scale.max(1.0)
}
