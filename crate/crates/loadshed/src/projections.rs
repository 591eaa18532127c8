//! The three PALM subproblems.
//!
//! * [`project_gamma`]: Euclidean projection onto
//!   `{gamma in {0,1}^m : 1'gamma = m - K}` (closed form: keep the `m - K`
//!   largest entries).
//! * [`project_z`]: projection onto a box intersected with the single
//!   equality `1'z = 0`, solved exactly by breakpoint search on the scalar
//!   multiplier.
//! * [`project_theta`]: projection onto `{theta : |E' theta| <= pi/2}`,
//!   solved by accelerated projected gradient on the nonnegative dual with a
//!   final dual clipping pass; supports warm starts across solver iterations.

use crate::error::ProjectionError;
use crate::netmodel::{PowerNetwork, ANGLE_LIMIT};
use serde::{Deserialize, Serialize};

/// Linearization points and proximal coefficients for one PALM sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxInputs {
    /// Target for the gamma projection.
    pub u: Vec<f64>,
    /// Target for the z projection.
    pub v: Vec<f64>,
    /// Target for the theta projection.
    pub w: Vec<f64>,
    /// Proximal coefficient of the gamma block (positive).
    pub a_k: f64,
    /// Proximal coefficient of the z block (positive).
    pub b_k: f64,
    /// Proximal coefficient of the theta block (positive).
    pub c_k: f64,
}

/// Binary projection: `gamma_i = 1` iff `u_i` is among the `m - K` largest
/// entries, so exactly `K` lines are removed.
///
/// Ties at the cut are broken by index: among equal entries, lower-indexed
/// lines are removed first. This makes traces reproducible even though the
/// underlying argmin is set-valued under ties.
pub fn project_gamma(u: &[f64], k: usize) -> Result<Vec<f64>, ProjectionError> {
    let m = u.len();
    if k > m {
        return Err(ProjectionError::CardinalityOutOfRange { k, m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).unwrap().then(a.cmp(&b)));
    let mut gamma = vec![1.0; m];
    for &i in order.iter().take(k) {
        gamma[i] = 0.0;
    }
    Ok(gamma)
}

/// Projection onto `{z : L <= z <= U, 1'z = 0}`.
///
/// The KKT form is `z_i = clamp(v_i - lambda, L_i, U_i)` with `lambda` the
/// root of the nonincreasing piecewise-linear map
/// `g(lambda) = 1'clamp(v - lambda, L, U)`. The root is located exactly by a
/// sweep over the `2n` sorted breakpoints; degenerate coordinates with
/// `L_i = U_i` are fixed up front.
pub fn project_z(v: &[f64], lower: &[f64], upper: &[f64]) -> Result<Vec<f64>, ProjectionError> {
    let n = v.len();
    for (name, len) in [("lower", lower.len()), ("upper", upper.len())] {
        if len != n {
            return Err(ProjectionError::DimensionMismatch {
                what: name,
                expected: n,
                got: len,
            });
        }
    }
    let mut sum_lower = 0.0;
    let mut sum_upper = 0.0;
    for i in 0..n {
        if lower[i] > upper[i] {
            return Err(ProjectionError::BoundInversion {
                index: i,
                lower: lower[i],
                upper: upper[i],
            });
        }
        sum_lower += lower[i];
        sum_upper += upper[i];
    }
    if sum_lower > 0.0 || sum_upper < 0.0 {
        return Err(ProjectionError::InfeasibleBox {
            sum_lower,
            sum_upper,
        });
    }

    let free: Vec<usize> = (0..n).filter(|&i| lower[i] < upper[i]).collect();
    let sum_fixed: f64 = (0..n)
        .filter(|&i| lower[i] >= upper[i])
        .map(|i| lower[i])
        .sum();

    let lambda = if free.is_empty() {
        0.0 // everything fixed; feasibility already guaranteed above
    } else {
        solve_multiplier(v, lower, upper, &free, sum_fixed)
    };

    let mut z: Vec<f64> = (0..n)
        .map(|i| (v[i] - lambda).clamp(lower[i], upper[i]))
        .collect();

    // Distribute the rounding residue over strictly interior coordinates so
    // the balance holds to machine precision.
    let residue: f64 = z.iter().sum();
    if residue != 0.0 {
        let interior: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&i| z[i] > lower[i] && z[i] < upper[i])
            .collect();
        if !interior.is_empty() {
            let shift = residue / interior.len() as f64;
            for &i in &interior {
                z[i] = (z[i] - shift).clamp(lower[i], upper[i]);
            }
        }
    }
    Ok(z)
}

/// Root of `g(lambda) = sum_fixed + sum_i clamp(v_i - lambda, L_i, U_i)`
/// over the free coordinates, by breakpoint sweep with a bisection fallback.
fn solve_multiplier(
    v: &[f64],
    lower: &[f64],
    upper: &[f64],
    free: &[usize],
    sum_fixed: f64,
) -> f64 {
    // Sweeping lambda upward: at v_i - U_i coordinate i leaves its upper
    // bound and becomes interior, at v_i - L_i it lands on its lower bound.
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * free.len());
    for &i in free {
        events.push((v[i] - upper[i], i, true)); // becomes interior
        events.push((v[i] - lower[i], i, false)); // becomes pinned at L
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut sum_u: f64 = free.iter().map(|&i| upper[i]).sum();
    let mut sum_l = 0.0;
    let mut sum_v = 0.0;
    let mut cnt = 0usize;
    let mut prev = f64::NEG_INFINITY;

    let mut idx = 0;
    while idx <= events.len() {
        let seg_end = if idx < events.len() {
            events[idx].0
        } else {
            f64::INFINITY
        };
        let total = sum_fixed + sum_u + sum_l + sum_v;
        if cnt > 0 {
            let lambda = total / cnt as f64;
            if lambda >= prev && lambda <= seg_end {
                return lambda;
            }
        } else if total == 0.0 {
            // Constant zero segment: any multiplier works, pick a finite end.
            if prev.is_finite() {
                return prev;
            }
            if seg_end.is_finite() {
                return seg_end;
            }
            return 0.0;
        }
        if idx == events.len() {
            break;
        }
        // Apply all events at this breakpoint.
        let here = events[idx].0;
        while idx < events.len() && events[idx].0 == here {
            let (_, i, entering) = events[idx];
            if entering {
                sum_u -= upper[i];
                sum_v += v[i];
                cnt += 1;
            } else {
                sum_v -= v[i];
                cnt = cnt.saturating_sub(1);
                sum_l += lower[i];
            }
            idx += 1;
        }
        prev = here;
    }

    // Roundoff can slip the root between segments; bisection is a safe net.
    let g = |lambda: f64| -> f64 {
        sum_fixed
            + free
                .iter()
                .map(|&i| (v[i] - lambda).clamp(lower[i], upper[i]))
                .sum::<f64>()
    };
    let mut lo = events.first().map_or(-1.0, |e| e.0) - 1.0;
    let mut hi = events.last().map_or(1.0, |e| e.0) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of the angle projection.
#[derive(Debug, Clone)]
pub struct ThetaProjection {
    pub theta: Vec<f64>,
    /// Inner iterations spent in the dual ascent.
    pub iterations: usize,
    /// Final KKT residual (constraint violation and complementary slackness;
    /// stationarity is exact by construction).
    pub kkt_residual: f64,
    /// False when the iteration cap was hit before reaching the tolerance;
    /// the returned iterate is still the best one found.
    pub converged: bool,
}

/// Dual state for [`project_theta`], reusable across calls for warm starts.
#[derive(Debug, Clone)]
pub struct ThetaWorkspace {
    mu_plus: Vec<f64>,
    mu_minus: Vec<f64>,
}

impl ThetaWorkspace {
    pub fn new(m: usize) -> Self {
        Self {
            mu_plus: vec![0.0; m],
            mu_minus: vec![0.0; m],
        }
    }

    /// Signed multipliers `mu_plus - mu_minus`, one per line.
    pub fn multipliers(&self) -> Vec<f64> {
        self.mu_plus
            .iter()
            .zip(self.mu_minus.iter())
            .map(|(p, q)| p - q)
            .collect()
    }
}

/// Iteration cap for the dual ascent.
pub const THETA_MAX_ITERS: usize = 50_000;
/// Feasibility target of the final clipping pass.
const CLIP_TOL: f64 = 1e-12;
const CLIP_MAX_SWEEPS: usize = 10_000;

/// Projects `w` onto `{theta : -pi/2 <= E' theta <= pi/2}` with a cold dual
/// start. See [`project_theta_warm`].
pub fn project_theta(
    w: &[f64],
    net: &PowerNetwork,
    tol: f64,
) -> Result<ThetaProjection, ProjectionError> {
    let mut ws = ThetaWorkspace::new(net.n_lines());
    project_theta_warm(w, net, tol, &mut ws)
}

/// Projects `w` onto the angle polytope, seeding the dual variables from
/// `ws` (and leaving the final multipliers there for the next call).
///
/// The dual is a box-constrained quadratic in `(mu_plus, mu_minus) >= 0`
/// minimized by FISTA with gradient steps of size `1 / (2 ||E||^2)`; the
/// primal iterate is always `theta = w - E (mu_plus - mu_minus)`, so
/// stationarity holds exactly and the KKT residual reduces to primal
/// feasibility plus complementary slackness. A final pass of dual coordinate
/// clipping drives the worst violation below 1e-12.
pub fn project_theta_warm(
    w: &[f64],
    net: &PowerNetwork,
    tol: f64,
    ws: &mut ThetaWorkspace,
) -> Result<ThetaProjection, ProjectionError> {
    let n = net.n_buses();
    let m = net.n_lines();
    if w.len() != n {
        return Err(ProjectionError::DimensionMismatch {
            what: "w",
            expected: n,
            got: w.len(),
        });
    }
    if ws.mu_plus.len() != m {
        return Err(ProjectionError::DimensionMismatch {
            what: "workspace",
            expected: m,
            got: ws.mu_plus.len(),
        });
    }
    if m == 0 {
        return Ok(ThetaProjection {
            theta: w.to_vec(),
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
        });
    }

    let b = ANGLE_LIMIT;
    let step = 1.0 / (2.0 * net.norm_e() * net.norm_e());

    let mut mu_p = ws.mu_plus.clone();
    let mut mu_m = ws.mu_minus.clone();
    let mut y_p = mu_p.clone();
    let mut y_m = mu_m.clone();
    let mut t_momentum = 1.0_f64;
    let mut iterations = 0;
    let mut converged = false;

    let theta_of = |mp: &[f64], mm: &[f64]| -> Vec<f64> {
        let nu: Vec<f64> = mp.iter().zip(mm.iter()).map(|(p, q)| p - q).collect();
        let mut theta = w.to_vec();
        let spread = net.scatter(&nu);
        for i in 0..n {
            theta[i] -= spread[i];
        }
        theta
    };

    for iter in 0..THETA_MAX_ITERS {
        iterations = iter;
        // KKT check at the current (mu_p, mu_m).
        let theta = theta_of(&mu_p, &mu_m);
        let diffs = net.edge_diff(&theta);
        let mut viol = 0.0_f64;
        let mut compl = 0.0_f64;
        for l in 0..m {
            viol = viol.max(diffs[l].abs() - b);
            compl = compl.max((mu_p[l] * (b - diffs[l])).abs());
            compl = compl.max((mu_m[l] * (b + diffs[l])).abs());
        }
        if viol.max(compl) <= tol {
            converged = true;
            break;
        }

        // FISTA step from the extrapolated point.
        let theta_y = theta_of(&y_p, &y_m);
        let diffs_y = net.edge_diff(&theta_y);
        let mut next_p = vec![0.0; m];
        let mut next_m = vec![0.0; m];
        for l in 0..m {
            next_p[l] = (y_p[l] - step * (b - diffs_y[l])).max(0.0);
            next_m[l] = (y_m[l] - step * (b + diffs_y[l])).max(0.0);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_momentum * t_momentum).sqrt());
        let beta = (t_momentum - 1.0) / t_next;

        // Gradient-scheme restart: drop momentum when it fights the step.
        let mut restart = 0.0;
        for l in 0..m {
            restart += (y_p[l] - next_p[l]) * (next_p[l] - mu_p[l]);
            restart += (y_m[l] - next_m[l]) * (next_m[l] - mu_m[l]);
        }
        if restart > 0.0 {
            t_momentum = 1.0;
            y_p.copy_from_slice(&next_p);
            y_m.copy_from_slice(&next_m);
        } else {
            t_momentum = t_next;
            for l in 0..m {
                y_p[l] = next_p[l] + beta * (next_p[l] - mu_p[l]);
                y_m[l] = next_m[l] + beta * (next_m[l] - mu_m[l]);
            }
        }
        mu_p = next_p;
        mu_m = next_m;
    }

    // Final clipping pass in the dual: coordinate steps that land violated
    // constraints exactly on their bound.
    let mut nu: Vec<f64> = mu_p.iter().zip(mu_m.iter()).map(|(p, q)| p - q).collect();
    let mut theta = theta_of(&mu_p, &mu_m);
    for _ in 0..CLIP_MAX_SWEEPS {
        let mut worst = 0.0_f64;
        for (l, line) in net.lines().iter().enumerate() {
            let d = theta[line.from] - theta[line.to];
            let excess = if d > b {
                d - b
            } else if d < -b {
                d + b
            } else {
                continue;
            };
            let delta = excess / 2.0; // ||e_l||^2 = 2
            nu[l] += delta;
            theta[line.from] -= delta;
            theta[line.to] += delta;
            worst = worst.max(excess.abs());
        }
        if worst <= CLIP_TOL {
            break;
        }
    }

    // Canonical split for the warm start of the next call.
    for (l, &nu_l) in nu.iter().enumerate() {
        ws.mu_plus[l] = nu_l.max(0.0);
        ws.mu_minus[l] = (-nu_l).max(0.0);
    }

    let diffs = net.edge_diff(&theta);
    let mut viol = 0.0_f64;
    let mut compl = 0.0_f64;
    for (l, d) in diffs.iter().enumerate() {
        viol = viol.max((d.abs() - b).max(0.0));
        compl = compl.max((ws.mu_plus[l] * (b - d)).abs());
        compl = compl.max((ws.mu_minus[l] * (b + d)).abs());
    }

    Ok(ThetaProjection {
        theta,
        iterations,
        kkt_residual: viol.max(compl),
        converged: converged || viol.max(compl) <= tol,
    })
}
