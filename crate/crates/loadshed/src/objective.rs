//! The penalized objective, its block gradients, and per-block Lipschitz
//! constants.
//!
//! With `c(gamma, z, theta) = E D diag(gamma) sin(E' theta) - (P + z)`, the
//! objective is
//!
//! ```text
//! H_rho = -1' z_d + (rho / 2) ||c||^2
//! ```
//!
//! Minimizing `H_rho` trades maximum load shed against violation of the
//! power-flow equation; `rho` controls the trade. All three block gradients
//! reduce to one pass over the lines; the matrix expressions they come from
//! are kept in the tests as a cross-check.

use crate::error::{ModelError, SolverError};
use crate::netmodel::{flow_residual, DecisionState, PowerNetwork};
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Penalty weight for the power-flow defect. Strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub rho: f64,
}

impl PenaltyParams {
    pub fn new(rho: f64) -> Result<Self, ModelError> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        Ok(Self { rho })
    }
}

/// Relative floor applied to Lipschitz estimates so the PALM stepsizes stay
/// finite when a block gradient degenerates (e.g. `theta = 0` makes L1 = 0).
pub const LIPSCHITZ_FLOOR: f64 = 1e-8;

/// Per-block Lipschitz constants at the current iterate plus their uniform
/// upper bounds over the feasible set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LipschitzEstimates {
    /// Gamma block, depends on (z, theta); floored below by `1e-8 * rho`.
    pub l1: f64,
    /// z block: exactly `rho`.
    pub l2: f64,
    /// Theta block, depends on (gamma, z); floored below by `1e-8 * rho`.
    pub l3: f64,
    /// Uniform bound `rho * m * ||ED||^2 >= L1`.
    pub s1: f64,
    /// Uniform bound `rho >= L2`.
    pub s2: f64,
    /// Uniform bound `rho * ||E||^2 * ||ED||^2 * (2 + ||P||) >= L3`.
    pub s3: f64,
}

/// Evaluates `H_rho`. `gamma` may take any real values here, which keeps the
/// function usable as the finite-difference oracle for the gamma gradient.
pub fn eval_h(net: &PowerNetwork, state: &DecisionState, rho: f64) -> Result<f64, ModelError> {
    let c = flow_residual(net, state)?;
    let shed: f64 = net.load_buses().iter().map(|&i| state.z[i]).sum();
    Ok(-shed + 0.5 * rho * spectral::dot(&c, &c))
}

/// Gradient of `H_rho` in the line-status block:
/// `rho * d_l * sin(delta_l) * (c_i - c_j)` for line `l = (i, j)`.
pub fn grad_gamma(
    net: &PowerNetwork,
    state: &DecisionState,
    rho: f64,
) -> Result<Vec<f64>, ModelError> {
    let c = flow_residual(net, state)?;
    Ok(net
        .lines()
        .iter()
        .enumerate()
        .map(|(l, line)| {
            let delta = state.theta[line.from] - state.theta[line.to];
            rho * net.admittance()[l] * delta.sin() * (c[line.from] - c[line.to])
        })
        .collect())
}

/// Gradient of `H_rho` in the adjustment block: `-e_d - rho * c`, where
/// `e_d` indicates the load buses.
pub fn grad_z(net: &PowerNetwork, state: &DecisionState, rho: f64) -> Result<Vec<f64>, ModelError> {
    let c = flow_residual(net, state)?;
    Ok((0..net.n_buses())
        .map(|i| {
            let e_d = if net.is_load_bus(i) { 1.0 } else { 0.0 };
            -e_d - rho * c[i]
        })
        .collect())
}

/// Gradient of `H_rho` in the angle block:
/// `rho * E diag(cos(E' theta)) Gamma D E' c`.
pub fn grad_theta(
    net: &PowerNetwork,
    state: &DecisionState,
    rho: f64,
) -> Result<Vec<f64>, ModelError> {
    let c = flow_residual(net, state)?;
    let per_line: Vec<f64> = net
        .lines()
        .iter()
        .enumerate()
        .map(|(l, line)| {
            let delta = state.theta[line.from] - state.theta[line.to];
            rho * delta.cos() * state.gamma[l] * net.admittance()[l] * (c[line.from] - c[line.to])
        })
        .collect();
    Ok(net.scatter(&per_line))
}

/// Lipschitz constant of the gamma gradient at fixed angles:
/// `L1 = rho * || (D E'E D) o (s s') || = rho * ||E diag(d o s)||^2` with
/// `s = sin(E' theta)`. Floored at `1e-8 * rho` since stepsizes divide by it.
pub fn lipschitz_l1(net: &PowerNetwork, theta: &[f64], rho: f64) -> Result<f64, SolverError> {
    let sin_weights: Vec<f64> = net
        .lines()
        .iter()
        .enumerate()
        .map(|(l, line)| net.admittance()[l] * (theta[line.from] - theta[line.to]).sin())
        .collect();
    let sigma = net.weighted_incidence_norm(Some(&sin_weights))?;
    Ok((rho * sigma * sigma).max(LIPSCHITZ_FLOOR * rho))
}

/// Lipschitz constant of the theta gradient at fixed line statuses and
/// adjustments: `L3 = rho * ||E||^2 (2 ||Q|| + ||R||)` with
/// `Q = Gamma D E'E D Gamma` and `R = Gamma D E' (P + z)`. Floored like L1.
pub fn lipschitz_l3(
    net: &PowerNetwork,
    gamma: &[f64],
    z: &[f64],
    rho: f64,
) -> Result<f64, SolverError> {
    let gamma_weights: Vec<f64> = net
        .admittance()
        .iter()
        .zip(gamma.iter())
        .map(|(d, g)| d * g)
        .collect();
    let sigma_edg = net.weighted_incidence_norm(Some(&gamma_weights))?;
    let norm_q = sigma_edg * sigma_edg;

    let p_plus_z: Vec<f64> = net
        .injection()
        .iter()
        .zip(z.iter())
        .map(|(p, zi)| p + zi)
        .collect();
    let r: Vec<f64> = net
        .lines()
        .iter()
        .enumerate()
        .map(|(l, line)| gamma_weights[l] * (p_plus_z[line.from] - p_plus_z[line.to]))
        .collect();
    let norm_r = spectral::norm(&r);

    let e2 = net.norm_e() * net.norm_e();
    Ok((rho * e2 * (2.0 * norm_q + norm_r)).max(LIPSCHITZ_FLOOR * rho))
}

/// Computes all three block Lipschitz constants at the current iterate plus
/// the uniform bounds they must respect (`L2` is exactly `rho`).
pub fn lipschitz(
    net: &PowerNetwork,
    state: &DecisionState,
    rho: f64,
) -> Result<LipschitzEstimates, SolverError> {
    state.check_dims(net)?;
    let e2 = net.norm_e() * net.norm_e();
    let ed2 = net.norm_ed() * net.norm_ed();
    Ok(LipschitzEstimates {
        l1: lipschitz_l1(net, &state.theta, rho)?,
        l2: rho,
        l3: lipschitz_l3(net, &state.gamma, &state.z, rho)?,
        s1: rho * net.n_lines() as f64 * ed2,
        s2: rho,
        s3: rho * e2 * ed2 * (2.0 + net.norm_p()),
    })
}
