//! Thin SVD by QR-preconditioned one-sided Jacobi, and spectral norms.
//!
//! For `m ≥ n` the input is first reduced by pivoted Householder QR,
//! `A Π⁻¹ = Q R`. One-sided (Hestenes) Jacobi rotations are then applied to
//! the columns of `Rᵀ` until every pair is orthogonal to `n · ε` relative
//! precision. With `Rᵀ J = W`, the singular values are the column norms of
//! `W`, the left vectors are `Q J` and the right vectors are the normalized
//! columns of `W`. Wide inputs are handled through the transpose.

use crate::error::{Error, Result};
use crate::matrix::{dot, matmul, norm2, Matrix};
use crate::qr::cpqr;

const MAX_SWEEPS: usize = 80;

/// Min-dimension at or below which `spectral_norm` uses the full SVD.
pub const SPECTRAL_SVD_THRESHOLD: usize = 256;
pub const POWER_MAX_ITERS: usize = 5000;

/// `M = U Σ Vᵀ` with `p = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl Svd {
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    /// Nonincreasing, nonnegative.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn into_parts(self) -> (Matrix, Vec<f64>, Matrix) {
        (self.u, self.sigma, self.v)
    }

    /// `U[:, ..k] Σ[..k] V[:, ..k]ᵀ`.
    pub fn reconstruct_rank(&self, k: usize) -> Matrix {
        let k = k.min(self.sigma.len());
        let mut us = self.u.column_range(0, k);
        for j in 0..k {
            us.col_mut(j).iter_mut().for_each(|x| *x *= self.sigma[j]);
        }
        matmul(&us, &self.v.column_range(0, k).transpose()).expect("conforming")
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_rank(self.sigma.len())
    }
}

/// Full thin SVD.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if m.rows() >= m.cols() {
        jacobi_svd(m, true)
    } else {
        let t = jacobi_svd(&m.transpose(), true)?;
        Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// Singular values only, nonincreasing.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let s = if m.rows() >= m.cols() {
        jacobi_svd(m, false)?
    } else {
        jacobi_svd(&m.transpose(), false)?
    };
    Ok(s.sigma)
}

fn jacobi_svd(a: &Matrix, want_vectors: bool) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    if n == 0 {
        return Ok(Svd {
            u: Matrix::zeros(m, 0),
            sigma: vec![],
            v: Matrix::zeros(0, 0),
        });
    }
    let qr = cpqr(a, n, None);
    let mut w = qr.r_rows(n).transpose();
    let mut rot = if want_vectors { Some(Matrix::identity(n)) } else { None };

    // Scale by a power of two so the largest column has norm near 1; columns
    // whose squared norm would be subnormal are then treated as zero.
    let largest = (0..n).map(|j| norm2(w.col(j))).fold(0.0, f64::max);
    let scale = if largest > 0.0 && largest.is_finite() {
        2f64.powi(-(largest.log2().round() as i32))
    } else {
        1.0
    };
    w.scale_in_place(scale);
    let negligible = f64::MIN_POSITIVE / f64::EPSILON;

    let tol = n as f64 * f64::EPSILON;
    let mut converged = n == 1;
    let mut worst = 0.0f64;
    let mut sq: Vec<f64> = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        // squared column norms, exact at the start of each sweep and updated
        // in closed form after each rotation
        for (j, v) in sq.iter_mut().enumerate() {
            *v = dot(w.col(j), w.col(j));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (sq[p], sq[q]);
                if alpha < negligible || beta < negligible {
                    continue;
                }
                let gamma = dot(w.col(p), w.col(q));
                let off = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                if off <= tol {
                    continue;
                }
                worst = worst.max(off);
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let root = if zeta.abs() < 1e150 { (1.0 + zeta * zeta).sqrt() } else { zeta.abs() };
                let t = zeta.signum() / (zeta.abs() + root);
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                let (np, nq) = (alpha - t * gamma, beta + t * gamma);
                sq[p] = if np > 1e-3 * alpha { np } else { dot(w.col(p), w.col(p)) };
                sq[q] = if nq > 1e-3 * beta { nq } else { dot(w.col(q), w.col(q)) };
                if let Some(r) = rot.as_mut() {
                    rotate(r, p, q, c, s);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
            estimate: norm2(w.col(0)) / scale,
            residual: worst,
        });
    }

    for j in 0..n {
        if dot(w.col(j), w.col(j)) < negligible {
            w.col_mut(j).iter_mut().for_each(|x| *x = 0.0);
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j] / scale).collect();

    let Some(rot) = rot else {
        return Ok(Svd {
            u: Matrix::zeros(m, 0),
            sigma,
            v: Matrix::zeros(n, 0),
        });
    };

    // left vectors: Q J, reordered
    let q = qr.form_q(n);
    let u = matmul(&q, &rot.select_columns(&order))?;

    // right vectors: normalized columns of W, rows mapped back through the pivot
    let mut vp = Matrix::zeros(n, n);
    let mut missing = Vec::new();
    for (l, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            let inv = 1.0 / norms[j];
            for (dst, src) in vp.col_mut(l).iter_mut().zip(w.col(j)) {
                *dst = src * inv;
            }
        } else {
            missing.push(l);
        }
    }
    complete_orthonormal(&mut vp, &missing);
    let mut v = Matrix::zeros(n, n);
    for (i, &orig) in qr.perm.iter().enumerate() {
        for l in 0..n {
            v[(orig, l)] = vp[(i, l)];
        }
    }
    Ok(Svd { u, sigma, v })
}

fn rotate(w: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let (wp, wq) = w.col_pair_mut(p, q);
    for (x, y) in wp.iter_mut().zip(wq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the listed columns with unit vectors orthogonal to all other columns.
fn complete_orthonormal(v: &mut Matrix, missing: &[usize]) {
    let n = v.rows();
    let mut filled: Vec<bool> = (0..v.cols()).map(|j| !missing.contains(&j)).collect();
    let mut candidate = 0;
    for &slot in missing {
        loop {
            assert!(candidate < n, "orthonormal completion ran out of candidates");
            let mut x = vec![0.0; n];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for j in 0..v.cols() {
                    if filled[j] {
                        let c = dot(v.col(j), &x);
                        for (xi, vi) in x.iter_mut().zip(v.col(j)) {
                            *xi -= c * vi;
                        }
                    }
                }
            }
            let nx = norm2(&x);
            if nx > 0.5 {
                v.col_mut(slot).iter_mut().zip(&x).for_each(|(d, s)| *d = s / nx);
                filled[slot] = true;
                break;
            }
        }
    }
}

/// Largest singular value, to relative accuracy `tol`.
///
/// Uses the SVD when `min(m, n) ≤ 256` and power iteration on the smaller
/// Gram matrix otherwise.
pub fn spectral_norm(m: &Matrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::contract(format!("tol must be > 0, got {tol}")));
    }
    if m.is_zero() {
        return Ok(0.0);
    }
    if m.rows().min(m.cols()) <= SPECTRAL_SVD_THRESHOLD {
        return Ok(singular_values(m)?[0]);
    }
    power_spectral_norm(m, tol)
}

/// Power iteration on the smaller Gram matrix, starting from the normalized
/// all-ones vector.
pub fn power_spectral_norm(m: &Matrix, tol: f64) -> Result<f64> {
    if m.is_zero() {
        return Ok(0.0);
    }
    let gram = if m.cols() <= m.rows() {
        crate::matrix::matmul_tn(m, m)?
    } else {
        let t = m.transpose();
        crate::matrix::matmul_tn(&t, &t)?
    };
    let n = gram.rows();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        gram_apply(&gram, &x, &mut y);
        let next = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let done = (next - lambda).abs() <= tol * next;
        lambda = next;
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / ny);
        if done {
            return Ok(lambda.max(0.0).sqrt());
        }
    }
    gram_apply(&gram, &x, &mut y);
    let residual = norm2(
        &y.iter()
            .zip(&x)
            .map(|(yi, xi)| yi - lambda * xi)
            .collect::<Vec<_>>(),
    );
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: POWER_MAX_ITERS,
        estimate: lambda.max(0.0).sqrt(),
        residual,
    })
}

fn gram_apply(g: &Matrix, x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    for (j, &xj) in x.iter().enumerate() {
        crate::matrix::axpy(xj, g.col(j), y);
    }
}
