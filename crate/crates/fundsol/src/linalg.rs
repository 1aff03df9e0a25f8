//! Dense complex linear algebra on small matrices (`n` is the system order,
//! typically ≤ 8): LU with partial pivoting for solve/det/inverse, and an
//! eigensolver built from the Faddeev–LeVerrier characteristic polynomial,
//! Durand–Kerner simultaneous root iteration, and full-pivot null-space
//! extraction. Matrices are row-major `Vec<C64>` slices of length `n²`.

use crate::error::Error;
use crate::{Result, C64};

/// Row-major dense product `a · b` of two `n×n` matrices.
pub(crate) fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for l in 0..n {
            let ajl = a[j * n + l];
            if ajl == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                out[j * n + k] += ajl * b[l * n + k];
            }
        }
    }
    out
}

/// `a · v` for an `n×n` matrix and a length-`n` vector.
pub(crate) fn mat_vec(n: usize, a: &[C64], v: &[C64]) -> Vec<C64> {
    (0..n)
        .map(|j| (0..n).map(|k| a[j * n + k] * v[k]).sum())
        .collect()
}

/// Max row-sum norm `‖a‖_∞`.
pub(crate) fn inf_norm(n: usize, a: &[C64]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|k| a[j * n + k].norm()).sum())
        .fold(0.0, f64::max)
}

/// LU factorization with partial (row) pivoting.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    swaps: usize,
}

/// Factors `a`; fails with [`Error::SingularMatrix`] when a pivot column is
/// numerically zero relative to the matrix scale.
pub(crate) fn lu_decompose(n: usize, a: &[C64]) -> Result<Lu> {
    assert_eq!(a.len(), n * n, "matrix data length");
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0usize;
    let scale = inf_norm(n, a).max(f64::MIN_POSITIVE);
    for col in 0..n {
        // Pivot: largest modulus in the column at or below the diagonal.
        let (mut best_row, mut best) = (col, lu[col * n + col].norm());
        for row in col + 1..n {
            let m = lu[row * n + col].norm();
            if m > best {
                best = m;
                best_row = row;
            }
        }
        if best <= scale * 1e-14 {
            return Err(Error::SingularMatrix("LU pivot below tolerance"));
        }
        if best_row != col {
            for k in 0..n {
                lu.swap(col * n + k, best_row * n + k);
            }
            perm.swap(col, best_row);
            swaps += 1;
        }
        let pivot = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / pivot;
            lu[row * n + col] = factor;
            for k in col + 1..n {
                let sub = factor * lu[col * n + k];
                lu[row * n + k] -= sub;
            }
        }
    }
    Ok(Lu { n, lu, perm, swaps })
}

impl Lu {
    /// Solves `A x = b`.
    pub(crate) fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward: L y = P b (unit diagonal).
        for row in 1..n {
            for col in 0..row {
                let sub = self.lu[row * n + col] * x[col];
                x[row] -= sub;
            }
        }
        // Back: U x = y.
        for row in (0..n).rev() {
            for col in row + 1..n {
                let sub = self.lu[row * n + col] * x[col];
                x[row] -= sub;
            }
            x[row] /= self.lu[row * n + row];
        }
        x
    }

    /// Determinant from the pivots.
    pub(crate) fn det(&self) -> C64 {
        let mut d = if self.swaps % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        };
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }
}

/// Solves `A x = b` in one call.
pub(crate) fn solve(n: usize, a: &[C64], b: &[C64]) -> Result<Vec<C64>> {
    Ok(lu_decompose(n, a)?.solve_vec(b))
}

/// Matrix inverse via LU column solves.
pub(crate) fn inverse(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    let lu = lu_decompose(n, a)?;
    let mut inv = vec![C64::new(0.0, 0.0); n * n];
    let mut e = vec![C64::new(0.0, 0.0); n];
    for col in 0..n {
        e[col] = C64::new(1.0, 0.0);
        let x = lu.solve_vec(&e);
        e[col] = C64::new(0.0, 0.0);
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Ok(inv)
}

/// Determinant; a numerically singular matrix yields exactly zero.
pub(crate) fn det(n: usize, a: &[C64]) -> C64 {
    match lu_decompose(n, a) {
        Ok(lu) => lu.det(),
        Err(_) => C64::new(0.0, 0.0),
    }
}

/// Monic characteristic polynomial coefficients `[c₁, …, c_n]` of `a`, so
/// `p(z) = zⁿ + c₁ zⁿ⁻¹ + … + c_n`, by the Faddeev–LeVerrier trace recursion
/// `M₁ = A, c_k = −tr(A·M_k)/k, M_{k+1} = A·M_k + c_k I`.
pub(crate) fn char_poly(n: usize, a: &[C64]) -> Vec<C64> {
    let mut coeffs = Vec::with_capacity(n);
    let mut m: Vec<C64> = {
        // M₁ = I so that A·M₁ = A.
        let mut id = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            id[i * n + i] = C64::new(1.0, 0.0);
        }
        id
    };
    for k in 1..=n {
        m = matmul(n, a, &m);
        let tr: C64 = (0..n).map(|i| m[i * n + i]).sum();
        let ck = -tr / k as f64;
        coeffs.push(ck);
        for i in 0..n {
            m[i * n + i] += ck;
        }
    }
    coeffs
}

/// Horner evaluation of the monic polynomial with coefficients `[c₁, …, c_n]`.
fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for &c in coeffs {
        p = p * z + c;
    }
    p
}

/// All roots of the monic polynomial `zⁿ + c₁ zⁿ⁻¹ + … + c_n` by
/// Durand–Kerner simultaneous iteration. Converges for the well-separated
/// spectra this crate feeds it; reports failure otherwise.
pub(crate) fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Cauchy bound: all roots lie in |z| ≤ 1 + max|c_k|.
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // Non-real, non-root-of-unity seed ratio avoids symmetric stalls.
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n)
        .map(|j| seed.powu(j as u32 + 1) * radius)
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for k in 0..n {
                if k != j {
                    denom *= z[j] - z[k];
                }
            }
            if denom.norm() == 0.0 {
                // Collided iterates: nudge and continue.
                z[j] += C64::new(1e-6 * radius, 1e-6 * radius);
                max_step = f64::INFINITY;
                continue;
            }
            let step = poly_eval(coeffs, z[j]) / denom;
            z[j] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[j].norm()));
        }
        if max_step < 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::OracleUnavailable(
        "polynomial root iteration did not converge".into(),
    ))
}

/// A unit null vector of `c` (assumed rank `n − 1`), by Gaussian elimination
/// with full pivoting: the column left without a pivot carries the free
/// variable, set to 1, and the triangular part back-substitutes.
fn null_vector(n: usize, c: &[C64]) -> Result<Vec<C64>> {
    let mut m = c.to_vec();
    let mut col_of: Vec<usize> = (0..n).collect(); // physical col → original col
    for step in 0..n - 1 {
        // Full pivot over the trailing submatrix.
        let (mut pr, mut pc, mut best) = (step, step, 0.0f64);
        for r in step..n {
            for cc in step..n {
                let v = m[r * n + cc].norm();
                if v > best {
                    best = v;
                    pr = r;
                    pc = cc;
                }
            }
        }
        if best == 0.0 {
            // Rank < n − 1; the matrix is defective for this purpose.
            return Err(Error::OracleUnavailable(
                "eigenvalue too degenerate for null-space extraction".into(),
            ));
        }
        if pr != step {
            for k in 0..n {
                m.swap(step * n + k, pr * n + k);
            }
        }
        if pc != step {
            for r in 0..n {
                m.swap(r * n + step, r * n + pc);
            }
            col_of.swap(step, pc);
        }
        let pivot = m[step * n + step];
        for r in step + 1..n {
            let f = m[r * n + step] / pivot;
            for k in step..n {
                let sub = f * m[step * n + k];
                m[r * n + k] -= sub;
            }
        }
    }
    // Free variable = physical column n−1; back-substitute x over the
    // leading (n−1)×(n−1) triangle.
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = C64::new(1.0, 0.0);
    for row in (0..n - 1).rev() {
        let mut rhs = -m[row * n + (n - 1)];
        for k in row + 1..n - 1 {
            rhs -= m[row * n + k] * x[k];
        }
        x[row] = rhs / m[row * n + row];
    }
    // Undo the column permutation and normalize.
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (physical, &original) in col_of.iter().enumerate() {
        v[original] = x[physical];
    }
    let norm = v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|e| e / norm).collect())
}

/// Eigenpairs `(μ_j, v_j)` of `a` with `‖v_j‖₂ = 1`, for matrices with
/// well-separated eigenvalues. Verifies every residual
/// `‖A v − μ v‖ ≤ 1e-8 · (‖A‖ + |μ|)` and refuses (rather than returning
/// garbage) on clustered spectra — callers treat that as "oracle unavailable",
/// not as a solver failure.
pub(crate) fn eig(n: usize, a: &[C64]) -> Result<Vec<(C64, Vec<C64>)>> {
    let coeffs = char_poly(n, a);
    let mut roots = poly_roots(&coeffs)?;
    roots.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    let scale = inf_norm(n, a).max(1.0);
    for j in 0..n {
        for k in j + 1..n {
            if (roots[j] - roots[k]).norm() < 1e-6 * scale {
                return Err(Error::OracleUnavailable(
                    "eigenvalues too close for a reliable closed form".into(),
                ));
            }
        }
    }
    let mut pairs = Vec::with_capacity(n);
    for &mu in &roots {
        let mut shifted = a.to_vec();
        for i in 0..n {
            shifted[i * n + i] -= mu;
        }
        let v = null_vector(n, &shifted)?;
        let resid: f64 = mat_vec(n, a, &v)
            .iter()
            .zip(&v)
            .map(|(av, vi)| (av - mu * vi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid > 1e-8 * (scale + mu.norm()) {
            return Err(Error::OracleUnavailable(format!(
                "eigenpair residual {resid:.3e} too large"
            )));
        }
        pairs.push((mu, v));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lu_solve_recovers_known_solution() {
        // A fixed 3×3 complex matrix and x = (1, −i, 2+i); b = A x.
        let a = vec![
            c(2.0, 1.0),
            c(0.0, -1.0),
            c(1.0, 0.0),
            c(0.5, 0.0),
            c(3.0, 0.0),
            c(0.0, 2.0),
            c(-1.0, 1.0),
            c(1.0, 1.0),
            c(4.0, -1.0),
        ];
        let x = vec![c(1.0, 0.0), c(0.0, -1.0), c(2.0, 1.0)];
        let b = mat_vec(3, &a, &x);
        let got = solve(3, &a, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn det_of_2x2_matches_ad_minus_bc() {
        let a = vec![c(1.0, 2.0), c(3.0, -1.0), c(0.0, 1.0), c(2.0, 2.0)];
        let want = a[0] * a[3] - a[1] * a[2];
        assert!((det(2, &a) - want).norm() < 1e-13);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = vec![
            c(1.0, 0.5),
            c(2.0, 0.0),
            c(0.0, 0.0),
            c(-1.0, 0.0),
            c(3.0, 1.0),
            c(1.0, -1.0),
            c(0.0, 2.0),
            c(0.0, 0.0),
            c(1.0, 1.0),
        ];
        let inv = inverse(3, &a).unwrap();
        let prod = matmul(3, &a, &inv);
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((prod[j * 3 + k] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        // Second row is a multiple of the first.
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        assert!(matches!(
            solve(2, &a, &[c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::SingularMatrix(_))
        ));
        assert_eq!(det(2, &a), c(0.0, 0.0));
    }

    #[test]
    fn char_poly_of_diag_1_2_3() {
        // (z−1)(z−2)(z−3) = z³ − 6z² + 11z − 6.
        let a = vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(2.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(3.0, 0.0),
        ];
        let coeffs = char_poly(3, &a);
        let want = [c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0)];
        for (g, w) in coeffs.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn poly_roots_of_cubic() {
        let coeffs = vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0)];
        let mut roots = poly_roots(&coeffs).unwrap();
        roots.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - c(want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn eig_of_symmetric_flip() {
        // [[0, 1], [1, 0]] has eigenpairs (−1, (1,−1)/√2), (+1, (1,1)/√2).
        let a = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let pairs = eig(2, &a).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].0 - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((pairs[1].0 - c(1.0, 0.0)).norm() < 1e-10);
        for (mu, v) in &pairs {
            let av = mat_vec(2, &a, v);
            let resid: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - mu * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-10);
        }
    }

    #[test]
    fn eig_residuals_on_generic_complex_matrix() {
        let a = vec![
            c(1.0, 1.0),
            c(2.0, 0.0),
            c(0.0, -1.0),
            c(0.0, 0.0),
            c(-1.0, 0.5),
            c(1.0, 0.0),
            c(3.0, 0.0),
            c(0.0, 0.0),
            c(2.0, -2.0),
        ];
        let pairs = eig(3, &a).unwrap();
        assert_eq!(pairs.len(), 3);
        let scale = inf_norm(3, &a);
        for (mu, v) in &pairs {
            let av = mat_vec(3, &a, v);
            let resid: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - mu * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-8 * (scale + mu.norm()));
        }
        // Eigenvalue sum equals the trace.
        let tr = a[0] + a[4] + a[8];
        let sum: C64 = pairs.iter().map(|(mu, _)| *mu).sum();
        assert!((sum - tr).norm() < 1e-9);
    }

    #[test]
    fn eig_refuses_clustered_spectrum() {
        // The identity has a fully degenerate spectrum.
        let a = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(eig(2, &a), Err(Error::OracleUnavailable(_))));
    }
}
