//! Lossless AC network model in incidence form.
//!
//! A network is a bus/line graph with per-line susceptances `d` and balanced
//! real injections `P`. The signed incidence matrix `E` (one `+1`/`-1` pair
//! per column) is stored sparsely as endpoint pairs; the active flow on line
//! `l` joining buses `i -> j` is `d_l * gamma_l * sin(theta_i - theta_j)`.
//!
//! All quantities are per-unit internally; megawatts appear only at the
//! reporting boundary through `base_mva`.

use crate::error::ModelError;
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Phase-angle limit across a line: |theta_i - theta_j| <= pi/2.
pub const ANGLE_LIMIT: f64 = std::f64::consts::FRAC_PI_2;

/// One transmission line: a signed incidence column with `+1` at `from`
/// and `-1` at `to` (0-based bus indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
}

/// Immutable network data: incidence structure, line susceptances, and
/// balanced bus injections.
#[derive(Debug, Clone)]
pub struct PowerNetwork {
    n: usize,
    m: usize,
    lines: Vec<Line>,
    admittance: Vec<f64>,
    injection: Vec<f64>,
    load_buses: Vec<usize>,
    gen_buses: Vec<usize>,
    is_load: Vec<bool>,
    z_lower: Vec<f64>,
    z_upper: Vec<f64>,
    base_mva: f64,
    norm_e: f64,
    norm_ed: f64,
    norm_p: f64,
}

impl PowerNetwork {
    /// Builds a network and validates every structural invariant.
    ///
    /// Buses are partitioned by the sign of their net injection: `P_i > 0`
    /// is a generator bus, `P_i <= 0` a load bus. Zero-injection buses are
    /// load buses with the degenerate adjustment box `[0, 0]`, which keeps
    /// them inert. Injections must balance to 1e-9.
    pub fn new(
        lines: Vec<Line>,
        admittance: Vec<f64>,
        injection: Vec<f64>,
        base_mva: f64,
    ) -> Result<Self, ModelError> {
        let n = injection.len();
        let m = lines.len();
        if admittance.len() != m {
            return Err(ModelError::DimensionMismatch {
                what: "admittance",
                expected: m,
                got: admittance.len(),
            });
        }
        for (l, line) in lines.iter().enumerate() {
            for bus in [line.from, line.to] {
                if bus >= n {
                    return Err(ModelError::EndpointOutOfRange { line: l, bus, n });
                }
            }
            if line.from == line.to {
                return Err(ModelError::SelfLoop {
                    line: l,
                    bus: line.from,
                });
            }
        }
        for (l, &d) in admittance.iter().enumerate() {
            if !d.is_finite() || d <= 0.0 {
                return Err(ModelError::NonPositiveAdmittance { line: l, value: d });
            }
        }
        let imbalance: f64 = injection.iter().sum();
        if imbalance.abs() > 1e-9 {
            return Err(ModelError::Unbalanced(imbalance));
        }
        if base_mva <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "base_mva must be positive, got {base_mva}"
            )));
        }

        let is_load: Vec<bool> = injection.iter().map(|&p| p <= 0.0).collect();
        let load_buses: Vec<usize> = (0..n).filter(|&i| is_load[i]).collect();
        let gen_buses: Vec<usize> = (0..n).filter(|&i| !is_load[i]).collect();
        // z_d in [0, -P_d] on load buses, z_g in [-P_g, 0] on generator buses.
        let z_lower: Vec<f64> = injection
            .iter()
            .map(|&p| if p <= 0.0 { 0.0 } else { -p })
            .collect();
        let z_upper: Vec<f64> = injection
            .iter()
            .map(|&p| if p <= 0.0 { -p } else { 0.0 })
            .collect();

        let norm_e = incidence_weighted_norm(&lines, n, None)
            .map_err(|e| ModelError::InvalidParameter(format!("spectral norm of E: {e}")))?;
        let norm_ed = incidence_weighted_norm(&lines, n, Some(&admittance))
            .map_err(|e| ModelError::InvalidParameter(format!("spectral norm of ED: {e}")))?;
        let norm_p = spectral::norm(&injection);

        Ok(Self {
            n,
            m,
            lines,
            admittance,
            injection,
            load_buses,
            gen_buses,
            is_load,
            z_lower,
            z_upper,
            base_mva,
            norm_e,
            norm_ed,
            norm_p,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.n
    }

    pub fn n_lines(&self) -> usize {
        self.m
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Per-line susceptances, the diagonal of `D`.
    pub fn admittance(&self) -> &[f64] {
        &self.admittance
    }

    /// Net real injections `P` in per-unit (loads negative).
    pub fn injection(&self) -> &[f64] {
        &self.injection
    }

    pub fn load_buses(&self) -> &[usize] {
        &self.load_buses
    }

    pub fn gen_buses(&self) -> &[usize] {
        &self.gen_buses
    }

    pub fn is_load_bus(&self, bus: usize) -> bool {
        self.is_load[bus]
    }

    /// Elementwise lower bounds for the adjustment vector `z`.
    pub fn z_lower(&self) -> &[f64] {
        &self.z_lower
    }

    /// Elementwise upper bounds for the adjustment vector `z`.
    pub fn z_upper(&self) -> &[f64] {
        &self.z_upper
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    /// Cached spectral norm of the incidence matrix `E`.
    pub fn norm_e(&self) -> f64 {
        self.norm_e
    }

    /// Cached spectral norm of `E D`.
    pub fn norm_ed(&self) -> f64 {
        self.norm_ed
    }

    /// Cached Euclidean norm of the injection vector.
    pub fn norm_p(&self) -> f64 {
        self.norm_p
    }

    /// Total load in per-unit, `-1'P_d >= 0`.
    pub fn total_load(&self) -> f64 {
        -self
            .load_buses
            .iter()
            .map(|&i| self.injection[i])
            .sum::<f64>()
    }

    /// `E' x` per line: the difference `x_from - x_to`.
    pub fn edge_diff(&self, x: &[f64]) -> Vec<f64> {
        self.lines.iter().map(|l| x[l.from] - x[l.to]).collect()
    }

    /// `E y`: accumulates `+y_l` at the from-bus and `-y_l` at the to-bus.
    pub fn scatter(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (l, line) in self.lines.iter().enumerate() {
            out[line.from] += y[l];
            out[line.to] -= y[l];
        }
        out
    }

    /// Spectral norm of `E * diag(w)` (or of `E` when `w` is `None`).
    pub fn weighted_incidence_norm(
        &self,
        w: Option<&[f64]>,
    ) -> Result<f64, crate::error::SpectralError> {
        incidence_weighted_norm(&self.lines, self.n, w)
    }
}

fn incidence_weighted_norm(
    lines: &[Line],
    n: usize,
    w: Option<&[f64]>,
) -> Result<f64, crate::error::SpectralError> {
    let m = lines.len();
    spectral::spectral_norm_gram(m, |x, y| {
        // y = (E diag w)' (E diag w) x, via one scatter and one gather.
        let mut node = vec![0.0; n];
        for (l, line) in lines.iter().enumerate() {
            let wl = w.map_or(1.0, |w| w[l]);
            let v = wl * x[l];
            node[line.from] += v;
            node[line.to] -= v;
        }
        for (l, line) in lines.iter().enumerate() {
            let wl = w.map_or(1.0, |w| w[l]);
            y[l] = wl * (node[line.from] - node[line.to]);
        }
    })
}

/// The PALM iterate: line statuses, load/generation adjustments, and phase
/// angles. `gamma` is stored as reals so the objective can be evaluated on
/// the continuous relaxation; solver iterates keep it exactly binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionState {
    pub gamma: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
}

impl DecisionState {
    /// All lines in service, no adjustment, flat angles.
    pub fn flat_start(net: &PowerNetwork) -> Self {
        Self {
            gamma: vec![1.0; net.n_lines()],
            z: vec![0.0; net.n_buses()],
            theta: vec![0.0; net.n_buses()],
        }
    }

    pub fn check_dims(&self, net: &PowerNetwork) -> Result<(), ModelError> {
        for (what, len, expected) in [
            ("gamma", self.gamma.len(), net.n_lines()),
            ("z", self.z.len(), net.n_buses()),
            ("theta", self.theta.len(), net.n_buses()),
        ] {
            if len != expected {
                return Err(ModelError::DimensionMismatch {
                    what,
                    expected,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

/// Per-line active flow `D diag(gamma) sin(E' theta)`.
///
/// Entry `l` is zero whenever `gamma_l = 0`.
pub fn line_flow(net: &PowerNetwork, state: &DecisionState) -> Result<Vec<f64>, ModelError> {
    state.check_dims(net)?;
    Ok(net
        .lines()
        .iter()
        .enumerate()
        .map(|(l, line)| {
            net.admittance()[l]
                * state.gamma[l]
                * (state.theta[line.from] - state.theta[line.to]).sin()
        })
        .collect())
}

/// Power-flow defect `c = E D diag(gamma) sin(E' theta) - (P + z)` per bus.
pub fn flow_residual(net: &PowerNetwork, state: &DecisionState) -> Result<Vec<f64>, ModelError> {
    let flow = line_flow(net, state)?;
    let mut out = net.scatter(&flow);
    for (i, o) in out.iter_mut().enumerate() {
        *o -= net.injection()[i] + state.z[i];
    }
    Ok(out)
}

/// Which constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `gamma` entries must be exactly 0 or 1.
    GammaBinary,
    /// `m - 1'gamma = K`.
    GammaCardinality,
    /// `1'z = 0`.
    ZBalance,
    /// `z` inside its elementwise box.
    ZBounds,
    /// `|E' theta| <= pi/2` per line.
    ThetaLimit,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Constraint::GammaBinary => "gamma binary",
            Constraint::GammaCardinality => "gamma cardinality",
            Constraint::ZBalance => "z balance",
            Constraint::ZBounds => "z bounds",
            Constraint::ThetaLimit => "theta angle limit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub magnitude: f64,
}

/// Outcome of a feasibility check; lists every violated constraint with its
/// worst magnitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.feasible {
            return write!(f, "feasible");
        }
        write!(f, "infeasible:")?;
        for v in &self.violations {
            write!(f, " [{} by {:.3e}]", v.constraint, v.magnitude)?;
        }
        Ok(())
    }
}

/// Checks the four decision-state constraint families within `tol`.
///
/// Diagnostic only: dimension mismatches are reported as violations rather
/// than errors.
pub fn is_feasible(
    net: &PowerNetwork,
    state: &DecisionState,
    k: usize,
    tol: f64,
) -> FeasibilityReport {
    let mut violations = Vec::new();
    if state.check_dims(net).is_err() {
        return FeasibilityReport {
            feasible: false,
            violations: vec![Violation {
                constraint: Constraint::GammaCardinality,
                magnitude: f64::INFINITY,
            }],
        };
    }

    let worst_binary = state
        .gamma
        .iter()
        .map(|&g| g.abs().min((g - 1.0).abs()))
        .fold(0.0_f64, f64::max);
    if worst_binary > tol {
        violations.push(Violation {
            constraint: Constraint::GammaBinary,
            magnitude: worst_binary,
        });
    }

    let in_service: f64 = state.gamma.iter().sum();
    let card_gap = (net.n_lines() as f64 - in_service - k as f64).abs();
    if card_gap > tol {
        violations.push(Violation {
            constraint: Constraint::GammaCardinality,
            magnitude: card_gap,
        });
    }

    let balance: f64 = state.z.iter().sum();
    if balance.abs() > tol {
        violations.push(Violation {
            constraint: Constraint::ZBalance,
            magnitude: balance.abs(),
        });
    }

    let box_gap = state
        .z
        .iter()
        .enumerate()
        .map(|(i, &zi)| (net.z_lower()[i] - zi).max(zi - net.z_upper()[i]).max(0.0))
        .fold(0.0_f64, f64::max);
    if box_gap > tol {
        violations.push(Violation {
            constraint: Constraint::ZBounds,
            magnitude: box_gap,
        });
    }

    let angle_gap = net
        .edge_diff(&state.theta)
        .iter()
        .map(|&d| d.abs() - ANGLE_LIMIT)
        .fold(0.0_f64, f64::max);
    if angle_gap > tol {
        violations.push(Violation {
            constraint: Constraint::ThetaLimit,
            magnitude: angle_gap,
        });
    }

    FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    }
}

/// Load shed of a state, in megawatts and as a share of total load.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LoadShed {
    pub mw: f64,
    /// `None` when the network carries no load (percentage undefined).
    pub percent: Option<f64>,
}

/// Total shed `1'z_d` converted to MW, plus its share of total load.
pub fn load_shed_mw(net: &PowerNetwork, state: &DecisionState) -> Result<LoadShed, ModelError> {
    state.check_dims(net)?;
    let shed_pu: f64 = net.load_buses().iter().map(|&i| state.z[i]).sum();
    let total = net.total_load();
    let percent = if total > 0.0 {
        Some(100.0 * shed_pu / total)
    } else {
        None
    };
    Ok(LoadShed {
        mw: shed_pu * net.base_mva(),
        percent,
    })
}
