#![allow(dead_code)]

use nalgebra::DMatrix;
use raidkit::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(m, n, data).unwrap()
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_col_major())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

/// Singular values from nalgebra, nonincreasing.
pub fn oracle_singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn oracle_spectral_norm(m: &Matrix) -> f64 {
    oracle_singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis for the column space of an `m × k` Gaussian draw.
pub fn orthonormal(rng: &mut ChaCha8Rng, m: usize, k: usize) -> DMatrix<f64> {
    let g = to_na(&gaussian(rng, m, k));
    g.qr().q()
}

#[derive(Debug, Clone, Copy)]
pub enum Decay {
    Flat,
    Geometric,
    Step,
}

pub fn spectrum(decay: Decay, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match decay {
        Decay::Flat => (0..len).map(|_| 1.0 + 0.1 * rng.random::<f64>()).collect(),
        Decay::Geometric => {
            let ratio = 0.3 + 0.6 * rng.random::<f64>();
            (0..len).map(|i| ratio.powi(i as i32)).collect()
        }
        Decay::Step => {
            let cut = rng.random_range(1..=len);
            (0..len).map(|i| if i < cut { 1.0 } else { 1e-6 }).collect()
        }
    }
}

/// `U diag(sigma) Vᵀ` with Haar-ish orthonormal factors.
pub fn with_spectrum(rng: &mut ChaCha8Rng, m: usize, n: usize, sigma: &[f64]) -> Matrix {
    let k = sigma.len();
    let u = orthonormal(rng, m, k);
    let v = orthonormal(rng, n, k);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sigma));
    from_na(&(u * s * v.transpose()))
}

/// `A Π = Q R` through nalgebra's pivoted QR, cut at numerical rank:
/// the first `r` columns of `Q` and the first `r` rows of `R Πᵀ`.
fn na_rank_revealing(m: &Matrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = to_na(m).col_piv_qr();
    let q = qr.q();
    let mut r = qr.r();
    let diag = r.nrows().min(r.ncols());
    let top = if diag > 0 { r[(0, 0)].abs() } else { 0.0 };
    let tol = f64::EPSILON * m.rows().max(m.cols()) as f64 * top;
    let rank = (0..diag).take_while(|&i| r[(i, i)].abs() > tol).count();
    qr.p().inv_permute_columns(&mut r);
    (q.columns(0, rank).into_owned(), r.rows(0, rank).into_owned())
}

/// Moore–Penrose inverse from two QR factorizations: with `A = Q_r W`
/// and `Wᵀ = Z L`, `A† = Z L⁻ᵀ Q_rᵀ`.
pub fn na_pinv(m: &Matrix) -> DMatrix<f64> {
    let (q, w) = na_rank_revealing(m);
    if q.ncols() == 0 {
        return DMatrix::zeros(m.cols(), m.rows());
    }
    let qr = w.transpose().qr();
    let (z, l) = (qr.q(), qr.r());
    let x = l.transpose().solve_lower_triangular(&q.transpose()).unwrap();
    z * x
}

/// Orthonormal basis for the numerical column space, from nalgebra.
pub fn oracle_range_basis(a: &Matrix) -> DMatrix<f64> {
    na_rank_revealing(a).0
}

/// `A A† B`, formed as `Q_r Q_rᵀ B` through nalgebra.
pub fn oracle_projection(a: &Matrix, b: &Matrix) -> Matrix {
    let (q, _) = na_rank_revealing(a);
    from_na(&(&q * (q.transpose() * to_na(b))))
}

pub fn diff_norm(x: &Matrix, y: &Matrix) -> f64 {
    oracle_spectral_norm(&x.sub(y).unwrap())
}
