//! Spectral norms via power iteration on the Gram matrix.
//!
//! The solver needs maximum singular values of a handful of small sparse
//! matrices, all of the form `E * diag(w)` for the network incidence matrix
//! `E`. Power iteration on `A'A` with a deterministic start vector is exact
//! enough (tolerance 1e-10) and keeps the crate dependency-free; 1x1 and 2x2
//! Gram matrices are handled in closed form.

use crate::error::SpectralError;

/// Default relative tolerance on the dominant eigenvalue.
pub const POWER_TOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const POWER_MAX_ITERS: usize = 10_000;

/// Maximum singular value of `A`, where `apply` computes `y = A'A x`.
///
/// `dim` is the column count of `A`. The start vector is deterministic
/// (a fixed ramp), so results are reproducible across runs.
pub fn spectral_norm_gram<F>(dim: usize, mut apply: F) -> Result<f64, SpectralError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Ok(0.0);
    }
    if dim <= 2 {
        return Ok(small_gram_norm(dim, &mut apply));
    }

    // Ramp start breaks symmetry without randomness.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + i as f64 / dim as f64).collect();
    normalize(&mut v);
    let mut av = vec![0.0; dim];
    let mut lambda = 0.0_f64;
    let mut change = f64::INFINITY;

    for _ in 0..POWER_MAX_ITERS {
        apply(&v, &mut av);
        let next = dot(&v, &av).max(0.0);
        let nrm = norm(&av);
        if nrm == 0.0 {
            return Ok(0.0);
        }
        change = (next - lambda).abs();
        lambda = next;
        for (vi, avi) in v.iter_mut().zip(av.iter()) {
            *vi = avi / nrm;
        }
        if change <= POWER_TOL * lambda.max(1.0) {
            return Ok(lambda.sqrt());
        }
    }
    Err(SpectralError::NoConvergence {
        iterations: POWER_MAX_ITERS,
        last_change: change,
    })
}

/// Closed-form dominant eigenvalue for 1x1 / 2x2 Gram matrices.
fn small_gram_norm<F>(dim: usize, apply: &mut F) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut col = vec![0.0; dim];
    if dim == 1 {
        apply(&[1.0], &mut col);
        return col[0].max(0.0).sqrt();
    }
    let mut m = [[0.0_f64; 2]; 2];
    for j in 0..2 {
        let mut e = [0.0; 2];
        e[j] = 1.0;
        apply(&e, &mut col);
        m[0][j] = col[0];
        m[1][j] = col[1];
    }
    let (a, b, c) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let disc = ((a - c) * 0.5).hypot(b);
    let lambda = 0.5 * (a + c) + disc;
    lambda.max(0.0).sqrt()
}

/// Maximum singular value of a dense row-major matrix (test oracle support
/// and one-off checks; not used in the solver hot path).
pub fn dense_spectral_norm(rows: &[Vec<f64>]) -> Result<f64, SpectralError> {
    let nrows = rows.len();
    if nrows == 0 {
        return Ok(0.0);
    }
    let ncols = rows[0].len();
    spectral_norm_gram(ncols, |x, y| {
        y.fill(0.0);
        for row in rows {
            let rx = dot(row, x);
            for (yj, rj) in y.iter_mut().zip(row.iter()) {
                *yj += rj * rx;
            }
        }
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix() {
        let a = vec![vec![0.0; 4]; 3];
        assert_eq!(dense_spectral_norm(&a).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_2x2() {
        // A = [[3, 0], [0, 4]]: sigma_max = 4.
        let a = vec![vec![3.0, 0.0], vec![0.0, 4.0]];
        let s = dense_spectral_norm(&a).unwrap();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one() {
        // sigma_max of the outer product u v' is |u| |v|.
        let u = [1.0, 2.0, -1.0];
        let v = [0.5, -0.25, 2.0, 1.0];
        let a: Vec<Vec<f64>> = u
            .iter()
            .map(|ui| v.iter().map(|vj| ui * vj).collect())
            .collect();
        let expect = norm(&u) * norm(&v);
        let s = dense_spectral_norm(&a).unwrap();
        assert!((s - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn deterministic() {
        let a = vec![
            vec![1.0, 2.0, 3.0],
            vec![-1.0, 0.5, 2.0],
            vec![0.0, 1.0, -2.0],
        ];
        let s1 = dense_spectral_norm(&a).unwrap();
        let s2 = dense_spectral_norm(&a).unwrap();
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    /// Power iteration must agree with an exact SVD on random 5x5 matrices.
    #[test]
    fn matches_svd_oracle_on_random_5x5() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let ours = dense_spectral_norm(&rows).unwrap();
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let a = nalgebra::DMatrix::from_row_slice(5, 5, &flat);
            let exact = a.svd(false, false).singular_values[0];
            assert!(
                (ours - exact).abs() <= 1e-8 * exact.max(1.0),
                "power iteration {ours} vs svd {exact}"
            );
        }
    }
}
