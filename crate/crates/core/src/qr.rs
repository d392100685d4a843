//! Householder QR with Businger–Golub column pivoting.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, Matrix};

/// Rank cutoff used when callers do not pass one: `max(m, n) · ε`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// `A = Q R Π`, truncated to the retained rank `r`.
///
/// `perm[j]` is the original index of the column that ended up in pivoted
/// position `j`, so `a.select_columns(perm) ≈ q · r_factor`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    q: Matrix,
    r: Matrix,
    perm: Vec<usize>,
}

impl PivotedQr {
    /// Orthonormal `m × r` factor.
    pub fn q(&self) -> &Matrix {
        &self.q
    }

    /// Upper-trapezoidal `r × n` factor, columns in pivoted order.
    pub fn r_factor(&self) -> &Matrix {
        &self.r
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn rank(&self) -> usize {
        self.r.rows()
    }

    /// `Q R Π`, with columns back in their original order.
    pub fn reconstruct(&self) -> Matrix {
        let qr = crate::matrix::matmul(&self.q, &self.r).expect("conforming factors");
        let mut out = Matrix::zeros(qr.rows(), qr.cols());
        for (j, &orig) in self.perm.iter().enumerate() {
            out.col_mut(orig).copy_from_slice(qr.col(j));
        }
        out
    }
}

/// State of a partially or fully completed pivoted Householder factorization.
///
/// The upper triangle of `work` (in pivoted column order) holds R; below the
/// diagonal sit the essential parts of the Householder vectors.
pub(crate) struct CpqrWork {
    pub work: Matrix,
    pub tau: Vec<f64>,
    pub perm: Vec<usize>,
}

impl CpqrWork {
    pub fn steps(&self) -> usize {
        self.tau.len()
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.work[(i, i)]
    }

    /// Thin Q with `cols` columns (`cols ≤ steps`).
    pub fn form_q(&self, cols: usize) -> Matrix {
        let m = self.work.rows();
        let mut q = Matrix::zeros(m, cols);
        for j in 0..cols {
            q[(j, j)] = 1.0;
        }
        for i in (0..cols).rev() {
            let tau = self.tau[i];
            if tau == 0.0 {
                continue;
            }
            let v = &self.work.col(i)[i + 1..];
            for j in i..cols {
                let qj = &mut q.col_mut(j)[i..];
                let w = tau * (qj[0] + dot(v, &qj[1..]));
                qj[0] -= w;
                axpy(-w, v, &mut qj[1..]);
            }
        }
        q
    }

    /// Copy of rows `0..rows` of R (upper-trapezoidal, pivoted order).
    pub fn r_rows(&self, rows: usize) -> Matrix {
        let n = self.work.cols();
        Matrix::from_fn(rows, n, |i, j| if j >= i { self.work[(i, j)] } else { 0.0 })
    }
}

/// Runs up to `max_steps` pivoted Householder steps.
///
/// With `cutoff = Some(t)` the factorization stops before step `i > 0` once
/// the largest remaining column norm is `≤ t · |R[0,0]|`, and before any step
/// whose largest remaining norm is exactly zero.
/// Relative width, in units of ε, of a pivoting tie.
const TIE_ULPS: f64 = 16.0;

pub(crate) fn cpqr(a: &Matrix, max_steps: usize, cutoff: Option<f64>) -> CpqrWork {
    let (m, n) = a.shape();
    let steps = max_steps.min(m).min(n);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| dot(work.col(j), work.col(j)).sqrt()).collect();
    let mut tau = Vec::with_capacity(steps);
    let mut r00 = 0.0;

    for i in 0..steps {
        // greedy pivot; norms within a few ulps of the largest count as tied
        // and go to the lowest original index, so mirror-symmetric inputs do
        // not pivot on rounding noise
        let top = norms[i..].iter().copied().fold(0.0, f64::max);
        let floor = top * (1.0 - TIE_ULPS * f64::EPSILON);
        let mut p = i;
        for j in i..n {
            if norms[j] >= floor && (norms[p] < floor || perm[j] < perm[p]) {
                p = j;
            }
        }
        if let Some(t) = cutoff {
            if norms[p] == 0.0 || (i > 0 && norms[p] <= t * r00) {
                break;
            }
        }
        if p != i {
            work.swap_cols(i, p);
            perm.swap(i, p);
            norms.swap(i, p);
        }

        let col = &mut work.col_mut(i)[i..];
        let alpha = col[0];
        let tail = dot(&col[1..], &col[1..]).sqrt();
        let t = if tail == 0.0 {
            0.0
        } else {
            let beta = -alpha.signum() * alpha.hypot(tail);
            let scale = 1.0 / (alpha - beta);
            col[1..].iter_mut().for_each(|x| *x *= scale);
            col[0] = beta;
            (beta - alpha) / beta
        };
        tau.push(t);
        if i == 0 {
            r00 = work[(0, 0)].abs();
        }

        let (left, right) = work.as_split_cols(i + 1);
        let v = &left[i * m + i + 1..(i + 1) * m];
        for (jj, cj) in right.chunks_mut(m).enumerate() {
            let cj = &mut cj[i..];
            if t != 0.0 {
                let w = t * (cj[0] + dot(v, &cj[1..]));
                cj[0] -= w;
                axpy(-w, v, &mut cj[1..]);
            }
            norms[i + 1 + jj] = dot(&cj[1..], &cj[1..]).sqrt();
        }
    }

    CpqrWork { work, tau, perm }
}

impl Matrix {
    /// Splits storage into columns `0..j` and `j..`.
    pub(crate) fn as_split_cols(&mut self, j: usize) -> (&[f64], &mut [f64]) {
        let rows = self.rows();
        let data = self.data_mut();
        let (l, r) = data.split_at_mut(j * rows);
        (&*l, r)
    }
}

/// Pivoted QR truncated at the numerical rank.
///
/// The retained rank is the number of leading diagonal entries of R with
/// `|R[i,i]| > rank_tol · |R[0,0]|`.
pub fn pivoted_qr(a: &Matrix, rank_tol: f64) -> Result<PivotedQr> {
    if !(rank_tol >= 0.0) {
        return Err(Error::contract(format!("rank_tol must be >= 0, got {rank_tol}")));
    }
    let w = cpqr(a, usize::MAX, Some(rank_tol));
    let rank = w.steps();
    if rank == 0 {
        return Err(Error::ZeroMatrix("zero matrix has no pivoted QR with nonzero diagonal"));
    }
    Ok(PivotedQr {
        q: w.form_q(rank),
        r: w.r_rows(rank),
        perm: w.perm,
    })
}

/// Solves `U x = rhs` for the leading `k × k` upper triangle of `u`.
///
/// Zero pivots are not checked; callers pass nonsingular triangles.
pub(crate) fn solve_upper(u: &Matrix, k: usize, rhs: &mut Matrix) {
    debug_assert_eq!(rhs.rows(), k);
    for c in 0..rhs.cols() {
        let x = rhs.col_mut(c);
        for i in (0..k).rev() {
            let mut s = x[i];
            for l in i + 1..k {
                s -= u[(i, l)] * x[l];
            }
            x[i] = s / u[(i, i)];
        }
    }
}

/// Solves `Uᵀ x = rhs` for the leading `k × k` upper triangle of `u`.
pub(crate) fn solve_upper_transposed(u: &Matrix, k: usize, rhs: &mut Matrix) {
    debug_assert_eq!(rhs.rows(), k);
    for c in 0..rhs.cols() {
        let x = rhs.col_mut(c);
        for i in 0..k {
            let ui = &u.col(i)[..i];
            let s = x[i] - dot(ui, &x[..i]);
            x[i] = s / u[(i, i)];
        }
    }
}

/// `R†` for a full-row-rank upper-trapezoidal `r × n` matrix.
///
/// With `Rᵀ = Z T` (unpivoted QR), `R = Tᵀ Zᵀ` and `R† = Z T⁻ᵀ`.
pub(crate) fn trapezoid_pinv_apply(r: &Matrix, rhs: &Matrix) -> Matrix {
    let (rr, n) = r.shape();
    debug_assert_eq!(rhs.rows(), rr);
    if rr == n {
        let mut x = rhs.clone();
        solve_upper(r, rr, &mut x);
        return x;
    }
    let w = cpqr_unpivoted(&r.transpose());
    let z = w.form_q(rr);
    let mut y = rhs.clone();
    solve_upper_transposed(&w.work, rr, &mut y);
    crate::matrix::matmul(&z, &y).expect("conforming")
}

/// Householder QR without pivoting.
pub(crate) fn cpqr_unpivoted(a: &Matrix) -> CpqrWork {
    let (m, n) = a.shape();
    let steps = m.min(n);
    let mut work = a.clone();
    let mut tau = Vec::with_capacity(steps);
    for i in 0..steps {
        let col = &mut work.col_mut(i)[i..];
        let alpha = col[0];
        let tail = dot(&col[1..], &col[1..]).sqrt();
        let t = if tail == 0.0 {
            0.0
        } else {
            let beta = -alpha.signum() * alpha.hypot(tail);
            let scale = 1.0 / (alpha - beta);
            col[1..].iter_mut().for_each(|x| *x *= scale);
            col[0] = beta;
            (beta - alpha) / beta
        };
        tau.push(t);
        if t == 0.0 {
            continue;
        }
        let (left, right) = work.as_split_cols(i + 1);
        let v = &left[i * m + i + 1..(i + 1) * m];
        for cj in right.chunks_mut(m) {
            let cj = &mut cj[i..];
            let w = t * (cj[0] + dot(v, &cj[1..]));
            cj[0] -= w;
            axpy(-w, v, &mut cj[1..]);
        }
    }
    CpqrWork {
        work,
        tau,
        perm: (0..n).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul_tn;

    fn pseudo_random(m: usize, n: usize, seed: u64) -> Matrix {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        Matrix::from_fn(m, n, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn identity_is_its_own_factorization() {
        let f = pivoted_qr(&Matrix::identity(4), default_rank_tol(4, 4)).unwrap();
        assert_eq!(f.q(), &Matrix::identity(4));
        assert_eq!(f.r_factor(), &Matrix::identity(4));
        assert_eq!(f.perm(), &[0, 1, 2, 3]);
        assert_eq!(f.rank(), 4);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = pseudo_random(7, 1, 3);
        let v = pseudo_random(5, 1, 4);
        let a = Matrix::from_fn(7, 5, |i, j| u[(i, 0)] * v[(j, 0)]);
        let f = pivoted_qr(&a, default_rank_tol(7, 5)).unwrap();
        assert_eq!(f.rank(), 1);
        assert_eq!(f.r_factor().rows(), 1);
        let err = f.reconstruct().sub(&a).unwrap().max_abs();
        assert!(err <= 1e-14 * a.max_abs(), "{err}");
    }

    #[test]
    fn random_reconstruction_and_monotone_diagonal() {
        let a = pseudo_random(30, 10, 11);
        let f = pivoted_qr(&a, default_rank_tol(30, 10)).unwrap();
        assert_eq!(f.rank(), 10);
        let rel = f.reconstruct().sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(rel <= 1e-12, "{rel}");
        let r = f.r_factor();
        for i in 1..10 {
            assert!(r[(i, i)].abs() <= r[(i - 1, i - 1)].abs());
        }
        let qtq = matmul_tn(f.q(), f.q()).unwrap();
        assert!(qtq.sub(&Matrix::identity(10)).unwrap().max_abs() <= 1e-12 * 10.0);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let err = pivoted_qr(&Matrix::zeros(3, 2), 0.0).unwrap_err();
        assert_eq!(err.to_string(), "zero matrix has no pivoted QR with nonzero diagonal");
    }

    #[test]
    fn equal_norm_ties_pick_lowest_index() {
        let a = Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let f = pivoted_qr(&a, 0.0).unwrap();
        assert_eq!(f.perm(), &[0, 1, 2]);

        // a one-ulp difference is still a tie; a clear gap is not
        let a = Matrix::from_rows(&[[1.0, 1.0 + f64::EPSILON, 0.5]]).unwrap();
        assert_eq!(pivoted_qr(&a, 0.0).unwrap().perm()[0], 0);
        let a = Matrix::from_rows(&[[1.0, 1.0 + 1e-12, 0.5]]).unwrap();
        assert_eq!(pivoted_qr(&a, 0.0).unwrap().perm()[0], 1);
    }

    #[test]
    fn triangular_solves() {
        let u = Matrix::from_rows(&[[2.0, 1.0, -1.0], [0.0, 3.0, 0.5], [0.0, 0.0, 4.0]]).unwrap();
        let x0 = Matrix::from_rows(&[[1.0], [-2.0], [0.5]]).unwrap();
        let mut b = crate::matrix::matmul(&u, &x0).unwrap();
        solve_upper(&u, 3, &mut b);
        assert!(b.sub(&x0).unwrap().max_abs() < 1e-15);
        let mut bt = crate::matrix::matmul(&u.transpose(), &x0).unwrap();
        solve_upper_transposed(&u, 3, &mut bt);
        assert!(bt.sub(&x0).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn trapezoid_pseudoinverse_is_right_inverse() {
        let r = Matrix::from_rows(&[[3.0, 1.0, 2.0, -1.0], [0.0, 2.0, 0.5, 1.0]]).unwrap();
        let rp = trapezoid_pinv_apply(&r, &Matrix::identity(2));
        let prod = crate::matrix::matmul(&r, &rp).unwrap();
        assert!(prod.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-14);
        // minimum-norm: R† R is symmetric
        let proj = crate::matrix::matmul(&rp, &r).unwrap();
        assert!(proj.sub(&proj.transpose()).unwrap().max_abs() < 1e-14);
    }
}
