//! Gauss-Seidel proximal alternating linearized minimization.
//!
//! One sweep updates the three blocks in order, each through a projection of
//! a gradient step whose length comes from the block Lipschitz constant:
//!
//! ```text
//! a_k = r1 * L1(z^k, theta^k)        gamma^{k+1} = P_gamma(gamma^k - grad_gamma / a_k)
//! b_k = r2 * L2                      z^{k+1}     = P_z(z^k - grad_z / b_k)
//! c_k = r3 * L3(gamma^{k+1}, z^{k+1})theta^{k+1} = P_theta(theta^k - grad_theta / c_k)
//! ```
//!
//! The staging is strict: the z gradient is taken at the updated gamma, the
//! theta gradient at the updated gamma and z. With `r_i > 1` the objective is
//! nonincreasing along the iterates; the driver enforces that as a hard
//! runtime check, since a violation can only mean an implementation bug.

use crate::caseio::Rebalance;
use crate::error::SolverError;
use crate::netmodel::{
    flow_residual, is_feasible, load_shed_mw, DecisionState, FeasibilityReport, PowerNetwork,
};
use crate::objective::{
    eval_h, grad_gamma, grad_theta, grad_z, lipschitz, lipschitz_l1, lipschitz_l3,
};
use crate::projections::{
    project_gamma, project_theta_warm, project_z, ProxInputs, ThetaWorkspace,
};
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Starting point policy.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// All lines in service, zero adjustment, flat angles. The first sweep
    /// lands the iterate on the constraint set.
    #[default]
    FlatStart,
    /// Explicit starting state.
    State(DecisionState),
}

/// Solver knobs. Defaults follow the reference experiments: `rho = 1e5`,
/// `r_i = 1.1`, 1000 iterations, tolerance stopping disabled (tolerances 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of lines to remove.
    pub k: usize,
    /// Penalty weight on the power-flow defect.
    pub rho: f64,
    /// Stepsize safety factors, each strictly greater than 1.
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub max_iters: usize,
    /// Stop once `prim_res <= primal_tol` and all dual residuals are below
    /// `dual_tol`. Zero disables tolerance stopping.
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// KKT tolerance of the inner angle projection.
    pub inner_tol: f64,
    pub init: InitPolicy,
    /// Echo of the injection rebalancing policy used to build the network;
    /// recorded in reports, not used by the solver itself.
    pub rebalance: Rebalance,
    /// Keep every `trace_every`-th iteration record (the final one is always
    /// kept).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 1,
            rho: 1e5,
            r1: 1.1,
            r2: 1.1,
            r3: 1.1,
            max_iters: 1000,
            primal_tol: 0.0,
            dual_tol: 0.0,
            inner_tol: 1e-10,
            init: InitPolicy::FlatStart,
            rebalance: Rebalance::Proportional,
            trace_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        for (name, r) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3)] {
            if !r.is_finite() || r <= 1.0 {
                return Err(SolverError::InvalidConfig(format!(
                    "{name} must be greater than 1, got {r}"
                )));
            }
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if !self.inner_tol.is_finite() || self.inner_tol <= 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "inner_tol must be positive, got {}",
                self.inner_tol
            )));
        }
        if self.primal_tol < 0.0 || self.dual_tol < 0.0 {
            return Err(SolverError::InvalidConfig(
                "tolerances must be nonnegative".into(),
            ));
        }
        if self.trace_every == 0 {
            return Err(SolverError::InvalidConfig(
                "trace_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Objective value `H_rho` after the sweep.
    pub obj: f64,
    /// Dual residual `||theta^{k+1} - theta^k||`.
    pub theta_res: f64,
    /// Dual residual `||z^{k+1} - z^k||`.
    pub z_res: f64,
    /// Dual residual `||gamma^{k+1} - gamma^k||`.
    pub gam_res: f64,
    /// Primal residual `||c(gamma, z, theta)||`.
    pub prim_res: f64,
}

/// Outcome of comparing the solver against exhaustive outage enumeration
/// (only attempted on small networks).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteForceComparison {
    /// Best objective over all outage sets, each with its own inner solve.
    pub best_objective: f64,
    /// 1-based removed-line indices attaining it.
    pub best_removed: Vec<usize>,
    pub solver_objective: f64,
    /// `solver_objective - best_objective`; may be positive because the
    /// solver finds critical points, not global optima.
    pub objective_gap: f64,
}

/// Full solve outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// 1-based indices of the removed lines, sorted ascending.
    pub removed_lines: Vec<usize>,
    pub shed_mw: f64,
    /// Shed as a percentage of total load; absent when the case carries none.
    pub shed_pct: Option<f64>,
    /// Final objective value `H_rho`.
    pub objective: f64,
    pub primal_residual: f64,
    pub iterations: usize,
    /// True when the primal/dual tolerances triggered the stop.
    pub converged_by_tolerance: bool,
    pub final_state: DecisionState,
    pub feasibility: FeasibilityReport,
    pub trace: Vec<IterationRecord>,
    pub config: SolverConfig,
    /// Present on networks with at most [`BRUTE_FORCE_MAX_LINES`] lines.
    pub brute_force: Option<BruteForceComparison>,
}

/// Exhaustive enumeration is attached to reports up to this many lines.
pub const BRUTE_FORCE_MAX_LINES: usize = 10;

/// Relative slack for the monotone-descent assertion.
const MONOTONE_SLACK: f64 = 1e-9;

/// Computes the staged linearization points `(u, v, w)` for fixed proximal
/// coefficients.
///
/// The evaluation is Gauss-Seidel: `u` at `(gamma, z, theta)`, `v` at the
/// projected `gamma`, `w` at the projected `gamma` and `z`. [`palm_step`] is
/// the production path and derives the coefficients itself; this entry point
/// exposes the staging for fixed coefficients.
pub fn linearization_points(
    net: &PowerNetwork,
    state: &DecisionState,
    rho: f64,
    k: usize,
    coeffs: (f64, f64, f64),
) -> Result<ProxInputs, SolverError> {
    let (a_k, b_k, c_k) = coeffs;
    for (name, v) in [("a_k", a_k), ("b_k", b_k), ("c_k", c_k)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    state.check_dims(net)?;

    let g_gamma = grad_gamma(net, state, rho)?;
    let u: Vec<f64> = state
        .gamma
        .iter()
        .zip(&g_gamma)
        .map(|(g, d)| g - d / a_k)
        .collect();
    let gamma_next = project_gamma(&u, k)?;

    let staged_gamma = DecisionState {
        gamma: gamma_next.clone(),
        z: state.z.clone(),
        theta: state.theta.clone(),
    };
    let g_z = grad_z(net, &staged_gamma, rho)?;
    let v: Vec<f64> = state.z.iter().zip(&g_z).map(|(z, d)| z - d / b_k).collect();
    let z_next = project_z(&v, net.z_lower(), net.z_upper())?;

    let staged_z = DecisionState {
        gamma: gamma_next,
        z: z_next,
        theta: state.theta.clone(),
    };
    let g_theta = grad_theta(net, &staged_z, rho)?;
    let w: Vec<f64> = state
        .theta
        .iter()
        .zip(&g_theta)
        .map(|(t, d)| t - d / c_k)
        .collect();

    Ok(ProxInputs {
        u,
        v,
        w,
        a_k,
        b_k,
        c_k,
    })
}

/// One full PALM sweep. Returns the next iterate and its trace record;
/// `iter` only labels the record.
pub fn palm_step(
    net: &PowerNetwork,
    state: &DecisionState,
    config: &SolverConfig,
    ws: &mut ThetaWorkspace,
    iter: usize,
) -> Result<(DecisionState, IterationRecord), SolverError> {
    state.check_dims(net)?;
    let rho = config.rho;

    // gamma-minimization: a_k from L1(z^k, theta^k).
    let a_k = config.r1 * lipschitz_l1(net, &state.theta, rho)?;
    let g_gamma = grad_gamma(net, state, rho)?;
    let u: Vec<f64> = state
        .gamma
        .iter()
        .zip(&g_gamma)
        .map(|(g, d)| g - d / a_k)
        .collect();
    let gamma_next = project_gamma(&u, config.k)?;

    // z-minimization at the updated gamma: b_k = r2 * rho.
    let b_k = config.r2 * rho;
    let staged_gamma = DecisionState {
        gamma: gamma_next,
        z: state.z.clone(),
        theta: state.theta.clone(),
    };
    let g_z = grad_z(net, &staged_gamma, rho)?;
    let v: Vec<f64> = state.z.iter().zip(&g_z).map(|(z, d)| z - d / b_k).collect();
    let z_next = project_z(&v, net.z_lower(), net.z_upper())?;

    // theta-minimization at the updated gamma and z: c_k from L3.
    let staged_z = DecisionState {
        gamma: staged_gamma.gamma,
        z: z_next,
        theta: state.theta.clone(),
    };
    let c_k = config.r3 * lipschitz_l3(net, &staged_z.gamma, &staged_z.z, rho)?;
    let g_theta = grad_theta(net, &staged_z, rho)?;
    let w: Vec<f64> = state
        .theta
        .iter()
        .zip(&g_theta)
        .map(|(t, d)| t - d / c_k)
        .collect();
    let projection = project_theta_warm(&w, net, config.inner_tol, ws)?;

    let next = DecisionState {
        gamma: staged_z.gamma,
        z: staged_z.z,
        theta: projection.theta,
    };

    let obj = eval_h(net, &next, rho)?;
    let c = flow_residual(net, &next)?;
    let record = IterationRecord {
        iter,
        obj,
        theta_res: norm_diff(&next.theta, &state.theta),
        z_res: norm_diff(&next.z, &state.z),
        gam_res: norm_diff(&next.gamma, &state.gamma),
        prim_res: spectral::norm(&c),
    };
    Ok((next, record))
}

/// Runs PALM to completion and assembles the report.
///
/// The objective is asserted nonincreasing at every iteration (relative
/// slack `1e-9 * (1 + |obj|)`); a violation aborts the solve since the
/// descent property is guaranteed by construction.
pub fn solve(net: &PowerNetwork, config: &SolverConfig) -> Result<SolveReport, SolverError> {
    config.validate()?;
    if config.k > net.n_lines() {
        return Err(SolverError::InvalidConfig(format!(
            "cannot remove {} of {} lines",
            config.k,
            net.n_lines()
        )));
    }

    let mut state = match &config.init {
        InitPolicy::FlatStart => DecisionState::flat_start(net),
        InitPolicy::State(s) => {
            s.check_dims(net)?;
            s.clone()
        }
    };

    let mut ws = ThetaWorkspace::new(net.n_lines());
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut prev_obj: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iters {
        let (next, record) = palm_step(net, &state, config, &mut ws, iter)?;
        if let Some(prev) = prev_obj {
            let slack = MONOTONE_SLACK * (1.0 + prev.abs());
            if record.obj > prev + slack {
                return Err(SolverError::NonMonotone {
                    iter,
                    prev,
                    curr: record.obj,
                    slack,
                });
            }
        }
        prev_obj = Some(record.obj);
        iterations = iter;
        state = next;

        // Tolerance stopping is disabled unless both tolerances are set;
        // the reference experiments run a fixed iteration count.
        let dual_max = record.theta_res.max(record.z_res).max(record.gam_res);
        let stop = config.primal_tol > 0.0
            && config.dual_tol > 0.0
            && record.prim_res <= config.primal_tol
            && dual_max <= config.dual_tol;
        if iter % config.trace_every == 0 || iter == config.max_iters || stop {
            trace.push(record);
        }
        if stop {
            converged = true;
            break;
        }
    }

    let removed_lines: Vec<usize> = state
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, &g)| g == 0.0)
        .map(|(l, _)| l + 1)
        .collect();
    let shed = load_shed_mw(net, &state)?;
    let c = flow_residual(net, &state)?;
    let objective = eval_h(net, &state, config.rho)?;
    let feasibility = is_feasible(net, &state, config.k, 1e-9);

    let brute_force = if net.n_lines() <= BRUTE_FORCE_MAX_LINES {
        Some(brute_force_comparison(net, config, objective)?)
    } else {
        None
    };

    Ok(SolveReport {
        removed_lines,
        shed_mw: shed.mw,
        shed_pct: shed.percent,
        objective,
        primal_residual: spectral::norm(&c),
        iterations,
        converged_by_tolerance: converged,
        final_state: state,
        feasibility,
        trace,
        config: config.clone(),
        brute_force,
    })
}

/// Prox fixed-point gap of a state, with stepsizes `1 / L_i` (the Lipschitz
/// estimates at unit safety factor).
///
/// Zero (up to the inner tolerance) exactly at critical points; the `K` in
/// the cardinality set is inferred from the state.
pub fn critical_point_residual(
    net: &PowerNetwork,
    state: &DecisionState,
    rho: f64,
) -> Result<f64, SolverError> {
    state.check_dims(net)?;
    let in_service: f64 = state.gamma.iter().sum();
    let k = (net.n_lines() as f64 - in_service).round() as usize;

    let est = lipschitz(net, state, rho)?;

    let g_gamma = grad_gamma(net, state, rho)?;
    let u: Vec<f64> = state
        .gamma
        .iter()
        .zip(&g_gamma)
        .map(|(g, d)| g - d / est.l1)
        .collect();
    let gamma_gap = norm_diff(&project_gamma(&u, k)?, &state.gamma);

    let g_z = grad_z(net, state, rho)?;
    let v: Vec<f64> = state
        .z
        .iter()
        .zip(&g_z)
        .map(|(z, d)| z - d / est.l2)
        .collect();
    let z_gap = norm_diff(&project_z(&v, net.z_lower(), net.z_upper())?, &state.z);

    let g_theta = grad_theta(net, state, rho)?;
    let w: Vec<f64> = state
        .theta
        .iter()
        .zip(&g_theta)
        .map(|(t, d)| t - d / est.l3)
        .collect();
    let proj = project_theta_warm(&w, net, 1e-12, &mut ThetaWorkspace::new(net.n_lines()))?;
    let theta_gap = norm_diff(&proj.theta, &state.theta);

    Ok(gamma_gap.max(z_gap).max(theta_gap))
}

/// Enumerates every outage set, solves the continuous inner problem for each
/// with gamma frozen, and reports the best objective found.
fn brute_force_comparison(
    net: &PowerNetwork,
    config: &SolverConfig,
    solver_objective: f64,
) -> Result<BruteForceComparison, SolverError> {
    let m = net.n_lines();
    let mut best = f64::INFINITY;
    let mut best_removed = Vec::new();
    enumerate_subsets(m, config.k, &mut |subset| {
        let mut gamma = vec![1.0; m];
        for &l in subset {
            gamma[l] = 0.0;
        }
        let (_, h) = solve_inner(net, gamma, config)?;
        if h < best {
            best = h;
            best_removed = subset.iter().map(|&l| l + 1).collect();
        }
        Ok(())
    })?;
    Ok(BruteForceComparison {
        best_objective: best,
        best_removed,
        solver_objective,
        objective_gap: solver_objective - best,
    })
}

fn enumerate_subsets<F>(m: usize, k: usize, f: &mut F) -> Result<(), SolverError>
where
    F: FnMut(&[usize]) -> Result<(), SolverError>,
{
    fn rec<F>(
        start: usize,
        m: usize,
        k: usize,
        prefix: &mut Vec<usize>,
        f: &mut F,
    ) -> Result<(), SolverError>
    where
        F: FnMut(&[usize]) -> Result<(), SolverError>,
    {
        if prefix.len() == k {
            return f(prefix);
        }
        for i in start..m {
            prefix.push(i);
            rec(i + 1, m, k, prefix, f)?;
            prefix.pop();
        }
        Ok(())
    }
    rec(0, m, k, &mut Vec::with_capacity(k), f)
}

/// PALM restricted to the convex blocks, with `gamma` frozen. Used by the
/// enumeration bound and by restart experiments.
pub fn solve_inner(
    net: &PowerNetwork,
    gamma: Vec<f64>,
    config: &SolverConfig,
) -> Result<(DecisionState, f64), SolverError> {
    let rho = config.rho;
    let mut state = DecisionState {
        gamma,
        z: vec![0.0; net.n_buses()],
        theta: vec![0.0; net.n_buses()],
    };
    let mut ws = ThetaWorkspace::new(net.n_lines());
    for _ in 0..config.max_iters {
        let b_k = config.r2 * rho;
        let g_z = grad_z(net, &state, rho)?;
        let v: Vec<f64> = state.z.iter().zip(&g_z).map(|(z, d)| z - d / b_k).collect();
        let z_next = project_z(&v, net.z_lower(), net.z_upper())?;

        let staged = DecisionState {
            gamma: state.gamma.clone(),
            z: z_next,
            theta: state.theta.clone(),
        };
        let c_k = config.r3 * lipschitz_l3(net, &staged.gamma, &staged.z, rho)?;
        let g_theta = grad_theta(net, &staged, rho)?;
        let w: Vec<f64> = state
            .theta
            .iter()
            .zip(&g_theta)
            .map(|(t, d)| t - d / c_k)
            .collect();
        let proj = project_theta_warm(&w, net, config.inner_tol, &mut ws)?;

        let z_step = norm_diff(&staged.z, &state.z);
        let theta_step = norm_diff(&proj.theta, &state.theta);
        state = DecisionState {
            gamma: staged.gamma,
            z: staged.z,
            theta: proj.theta,
        };
        if z_step.max(theta_step) <= 1e-12 {
            break;
        }
    }
    let h = eval_h(net, &state, rho)?;
    Ok((state, h))
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Line;

    fn two_bus() -> PowerNetwork {
        PowerNetwork::new(
            vec![Line { from: 0, to: 1 }],
            vec![1.0],
            vec![-0.5, 0.5],
            100.0,
        )
        .unwrap()
    }

    fn config(k: usize, max_iters: usize) -> SolverConfig {
        SolverConfig {
            k,
            max_iters,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn config_validation_rejects_bad_knobs() {
        let c = SolverConfig {
            r1: 1.0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SolverConfig {
            rho: 0.0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SolverConfig {
            trace_every: 0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_gradients_fix_the_linearization_points() {
        let net = two_bus();
        // z = -P makes c = 0 at theta = 0, so every gradient vanishes except
        // the shed drift in v.
        let state = DecisionState {
            gamma: vec![1.0],
            z: vec![0.5, -0.5],
            theta: vec![0.0, 0.0],
        };
        let p = linearization_points(&net, &state, 2.0, 0, (1.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.u, state.gamma);
        assert_eq!(p.w, state.theta);
        // v = z + e_d / b_k: the load coordinate still drifts upward, but it
        // is already at its bound.
        assert!((p.v[0] - 1.5).abs() < 1e-15);
        assert_eq!(p.v[1], -0.5);
    }

    #[test]
    fn staged_evaluation_differs_from_jacobi() {
        // Two lines, K = 1: the gamma update changes the flow pattern, so
        // the staged z gradient must differ from the one at gamma^k.
        let net = PowerNetwork::new(
            vec![Line { from: 0, to: 1 }, Line { from: 0, to: 1 }],
            vec![1.0, 0.5],
            vec![-0.5, 0.5],
            100.0,
        )
        .unwrap();
        let state = DecisionState {
            gamma: vec![1.0, 1.0],
            z: vec![0.0, 0.0],
            theta: vec![0.6, 0.0],
        };
        let rho = 10.0;
        let coeffs = (5.0, rho * 1.1, 50.0);
        let p = linearization_points(&net, &state, rho, 1, coeffs).unwrap();

        // Jacobi version: all gradients at the unmodified state.
        let g_z = grad_z(&net, &state, rho).unwrap();
        let v_jacobi: Vec<f64> = state
            .z
            .iter()
            .zip(&g_z)
            .map(|(z, d)| z - d / coeffs.1)
            .collect();
        let diff: f64 =
            p.v.iter()
                .zip(&v_jacobi)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        assert!(
            diff > 1e-6,
            "staged and Jacobi linearization points should differ, got {diff}"
        );
    }

    #[test]
    fn fixed_point_produces_zero_residuals() {
        let net = two_bus();
        // Full shutdown with the line removed is a fixed point for K = 1.
        let state = DecisionState {
            gamma: vec![0.0],
            z: vec![0.5, -0.5],
            theta: vec![0.0, 0.0],
        };
        let cfg = config(1, 10);
        let mut ws = ThetaWorkspace::new(1);
        let (next, rec) = palm_step(&net, &state, &cfg, &mut ws, 1).unwrap();
        assert_eq!(next, state);
        assert_eq!(rec.gam_res, 0.0);
        assert_eq!(rec.z_res, 0.0);
        assert_eq!(rec.theta_res, 0.0);
        assert!(rec.prim_res < 1e-15);
    }

    #[test]
    fn two_bus_outage_sheds_everything() {
        let net = two_bus();
        let report = solve(&net, &config(1, 200)).unwrap();
        assert_eq!(report.removed_lines, vec![1]);
        assert!(
            (report.shed_mw - 50.0).abs() < 1.0,
            "shed {}",
            report.shed_mw
        );
        assert!(report.feasibility.feasible);
        // The brute-force bound is attached and agrees.
        let bf = report.brute_force.unwrap();
        assert!(bf.objective_gap.abs() < 1e-6, "gap {}", bf.objective_gap);
    }

    #[test]
    fn k_zero_removes_nothing_and_stays_feasible() {
        // Even with no outage the penalized objective rewards shedding, so
        // the iterates drift toward the shutdown point; what must hold is
        // that no line is removed, the iterates stay feasible, and the
        // power-flow defect is driven out.
        let net = two_bus();
        let report = solve(&net, &config(0, 200)).unwrap();
        assert!(report.removed_lines.is_empty());
        assert!(report.feasibility.feasible);
        assert!(report.primal_residual < 1e-4);
        assert!(report.shed_pct.unwrap() > 90.0);
    }

    #[test]
    fn trace_is_monotone_and_every_iterate_feasible() {
        let net = two_bus();
        let report = solve(&net, &config(1, 50)).unwrap();
        for pair in report.trace.windows(2) {
            assert!(pair[1].obj <= pair[0].obj + 1e-9 * (1.0 + pair[0].obj.abs()));
        }
        assert!(report.feasibility.feasible);
    }

    #[test]
    fn determinism_bitwise() {
        let net = two_bus();
        let a = solve(&net, &config(1, 100)).unwrap();
        let b = solve(&net, &config(1, 100)).unwrap();
        assert_eq!(a.trace.len(), b.trace.len());
        for (ra, rb) in a.trace.iter().zip(&b.trace) {
            assert_eq!(ra.obj.to_bits(), rb.obj.to_bits());
            assert_eq!(ra.prim_res.to_bits(), rb.prim_res.to_bits());
        }
    }

    #[test]
    fn critical_point_residual_flags_non_stationary_states() {
        let net = two_bus();
        let report = solve(&net, &config(1, 200)).unwrap();
        let at_solution = critical_point_residual(&net, &report.final_state, 1e5).unwrap();
        assert!(at_solution <= 1e-8, "residual {at_solution}");

        let wandering = DecisionState {
            gamma: vec![0.0],
            z: vec![0.1, -0.1],
            theta: vec![0.3, 0.0],
        };
        let off = critical_point_residual(&net, &wandering, 1e5).unwrap();
        assert!(off > 1e-3, "residual {off}");
    }

    #[test]
    fn trace_thinning_keeps_final_record() {
        let net = two_bus();
        let mut cfg = config(1, 57);
        cfg.trace_every = 10;
        let report = solve(&net, &cfg).unwrap();
        assert_eq!(report.trace.last().unwrap().iter, 57);
        assert!(report
            .trace
            .iter()
            .all(|r| r.iter % 10 == 0 || r.iter == 57));
    }

    #[test]
    fn linearization_rejects_nonpositive_coefficients() {
        let net = two_bus();
        let state = DecisionState::flat_start(&net);
        for coeffs in [(0.0, 1.0, 1.0), (1.0, -2.0, 1.0), (1.0, 1.0, 0.0)] {
            assert!(linearization_points(&net, &state, 1.0, 0, coeffs).is_err());
        }
    }

    /// Squared step norms must be summable and the steps must die out.
    #[test]
    fn step_norms_have_finite_energy_and_vanish() {
        let net = two_bus();
        let report = solve(&net, &config(1, 500)).unwrap();
        let energy: f64 = report
            .trace
            .iter()
            .map(|r| r.theta_res.powi(2) + r.z_res.powi(2) + r.gam_res.powi(2))
            .sum();
        assert!(energy.is_finite());
        // The first sweep dominates; everything after it is small.
        let first = report.trace.first().unwrap();
        let head = first.theta_res.powi(2) + first.z_res.powi(2) + first.gam_res.powi(2);
        assert!(
            energy <= head + 1.0,
            "tail energy too large: {energy} vs head {head}"
        );
        let last = report.trace.last().unwrap();
        assert!(last.theta_res.max(last.z_res).max(last.gam_res) <= 1e-6);
    }

    /// Every post-sweep iterate is feasible: exactly for gamma, to 1e-12 for
    /// the z and theta constraint families.
    #[test]
    fn iterates_are_feasible_throughout() {
        let net = PowerNetwork::new(
            vec![
                Line { from: 0, to: 1 },
                Line { from: 1, to: 2 },
                Line { from: 0, to: 2 },
            ],
            vec![0.4, 0.3, 0.5],
            vec![-0.5, 0.2, 0.3],
            100.0,
        )
        .unwrap();
        let cfg = config(1, 1);
        let mut ws = ThetaWorkspace::new(net.n_lines());
        let mut state = DecisionState::flat_start(&net);
        for iter in 1..=30 {
            let (next, _) = palm_step(&net, &state, &cfg, &mut ws, iter).unwrap();
            for g in &next.gamma {
                assert!(*g == 0.0 || *g == 1.0);
            }
            assert_eq!(next.gamma.iter().filter(|&&g| g == 0.0).count(), cfg.k);
            let report = is_feasible(&net, &next, cfg.k, 1e-12);
            assert!(report.feasible, "iter {iter}: {report}");
            state = next;
        }
    }
}
