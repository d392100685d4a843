//! Regression-aware decompositions of `B` for a design matrix `A`.
//!
//! Everything here works on a projection of `B` into the column space of
//! `A`: either `Qᵀ B` from the pivoted QR `A = Q R Π` ([`Method::Qr`]) or
//! `S B` with `S = (AᵀA)^{-1/2} Aᵀ` ([`Method::Whitened`]). Both maps are
//! isometries on `range(A)` and annihilate its complement, so for any `D`
//!
//! ```text
//! ‖A A† D‖ = ‖Qᵀ D‖ = ‖S D‖
//! ```
//!
//! An ID of the projected matrix therefore interpolates the least-squares
//! fits `A X` of all columns of `B` from the fits of the selected columns,
//! with the residual-space error `‖A X − A Y P‖` equal to the ID error
//! in the (small) projected space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::{id_fixed_rank_with, IdOptions, IdResult};
use crate::matrix::{matmul, matmul_tn, Matrix};
use crate::qr::{pivoted_qr, trapezoid_pinv_apply, PivotedQr};
use crate::solve::{least_squares_solve, whitening_operator, WhiteningOperator, NORM_TOL};
use crate::svd::{singular_values, spectral_norm, svd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Qr,
    Whitened,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qr" => Ok(Method::Qr),
            "whitened" => Ok(Method::Whitened),
            other => Err(Error::contract(format!(
                "unknown method '{other}'; use qr or whitened"
            ))),
        }
    }
}

/// Orthogonal projector onto `range(A)` in one of its two factored forms.
enum Projector {
    Qr(PivotedQr),
    Whitened(WhiteningOperator),
}

impl Projector {
    fn new(a: &Matrix, method: Method, rank_tol: f64) -> Result<Self> {
        Ok(match method {
            Method::Qr => Projector::Qr(pivoted_qr(a, rank_tol)?),
            Method::Whitened => Projector::Whitened(whitening_operator(a, rank_tol)?),
        })
    }

    fn rank(&self) -> usize {
        match self {
            Projector::Qr(f) => f.rank(),
            Projector::Whitened(w) => w.rank(),
        }
    }

    /// `Qᵀ B` or `S B`.
    fn project(&self, b: &Matrix) -> Result<Matrix> {
        match self {
            Projector::Qr(f) => matmul_tn(f.q(), b),
            Projector::Whitened(w) => w.apply(b),
        }
    }

    /// `A A† B`.
    fn fit(&self, b: &Matrix) -> Result<Matrix> {
        match self {
            Projector::Qr(f) => matmul(f.q(), &matmul_tn(f.q(), b)?),
            Projector::Whitened(w) => w.project(b),
        }
    }

    /// `A† C`, reusing the factorization of `A`.
    fn solve(&self, c: &Matrix) -> Result<Matrix> {
        match self {
            Projector::Qr(f) => {
                let xp = trapezoid_pinv_apply(f.r_factor(), &matmul_tn(f.q(), c)?);
                Ok(unpermute_rows(&xp, f.perm()))
            }
            Projector::Whitened(w) => {
                let mut t = matmul_tn(w.u_r(), c)?;
                for j in 0..t.cols() {
                    t.col_mut(j).iter_mut().zip(w.sigma_r()).for_each(|(x, s)| *x /= s);
                }
                matmul(w.v_r(), &t)
            }
        }
    }
}

/// Row `i` of the input lands in row `perm[i]`.
fn unpermute_rows(m: &Matrix, perm: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for (i, &orig) in perm.iter().enumerate() {
        for c in 0..m.cols() {
            out[(orig, c)] = m[(i, c)];
        }
    }
    out
}

fn check_pair(a: &Matrix, b: &Matrix, op: &'static str) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn check_k(k: usize, rank: usize, b_cols: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::contract("k must be ≥ 1"));
    }
    if k > rank.min(b_cols) {
        return Err(Error::contract(format!(
            "k = {k} exceeds min(r, n) = {} where r = {rank} is the retained rank of A and n = {b_cols}",
            rank.min(b_cols)
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RaidResult {
    /// ID of the projected `B` (or of `A†B` for the solution-space variant).
    pub id: IdResult,
    /// `A† C` for the selected columns `C`.
    pub y: Matrix,
    /// `‖A X − A Y P‖₂`, computed in the projected space.
    /// For the solution-space variant this is `‖X − Y P‖₂` instead.
    pub raid_error: f64,
    pub raid_error_frobenius: f64,
    /// `min_X ‖A X − B‖₂`
    pub min_residual: f64,
    pub method: Method,
    pub solution_space: bool,
    /// Retained rank of `A`.
    pub design_rank: usize,
}

impl RaidResult {
    pub fn selected(&self) -> &[usize] {
        self.id.selected()
    }

    pub fn p(&self) -> &Matrix {
        self.id.p()
    }
}

/// Regression-aware ID of `B` for the design `A`.
pub fn raid(a: &Matrix, b: &Matrix, k: usize, method: Method, rank_tol: f64) -> Result<RaidResult> {
    raid_with(a, b, k, method, rank_tol, IdOptions::default())
}

pub fn raid_with(
    a: &Matrix,
    b: &Matrix,
    k: usize,
    method: Method,
    rank_tol: f64,
    opts: IdOptions,
) -> Result<RaidResult> {
    check_pair(a, b, "raid")?;
    let proj = Projector::new(a, method, rank_tol)?;
    check_k(k, proj.rank(), b.cols())?;

    let pb = proj.project(b)?;
    let id = id_fixed_rank_with(&pb, k, opts)?;
    let diff = pb.sub(&id.reconstruct(&pb)?)?;
    let raid_error = id.certificate().achieved_error;
    let y = proj.solve(&id.columns_of(b))?;
    let min_residual = spectral_norm(&b.sub(&proj.fit(b)?)?, NORM_TOL)?;
    Ok(RaidResult {
        raid_error,
        raid_error_frobenius: diff.frobenius_norm(),
        min_residual,
        y,
        id,
        method,
        solution_space: false,
        design_rank: proj.rank(),
    })
}

/// ID of the least-squares solutions `X = A†B` themselves.
///
/// Errors are measured on the solutions, `‖X − Y P‖₂`, which is badly
/// inflated whenever `A` is ill-conditioned; prefer [`raid`].
pub fn raid_solution_space(a: &Matrix, b: &Matrix, k: usize, rank_tol: f64) -> Result<RaidResult> {
    check_pair(a, b, "raid_solution_space")?;
    let proj = Projector::new(a, Method::Qr, rank_tol)?;
    check_k(k, proj.rank(), b.cols())?;
    let x = least_squares_solve(a, b, rank_tol)?;
    let id = id_fixed_rank_with(&x, k, IdOptions::default())?;
    let diff = x.sub(&id.reconstruct(&x)?)?;
    let min_residual = spectral_norm(&b.sub(&proj.fit(b)?)?, NORM_TOL)?;
    Ok(RaidResult {
        y: id.columns_of(&x),
        raid_error: id.certificate().achieved_error,
        raid_error_frobenius: diff.frobenius_norm(),
        min_residual,
        id,
        method: Method::Qr,
        solution_space: true,
        design_rank: proj.rank(),
    })
}

#[derive(Debug, Clone)]
pub struct RapcaResult {
    /// `T` with `A T = Q U` (qr) or `A T = Sᵀ U` (whitened); `n_A × k`.
    pub t: Matrix,
    /// Leading `k` singular values of the projected `B`.
    pub sigma: Vec<f64>,
    /// Leading `k` left singular vectors in the projected space.
    pub u: Matrix,
    /// `n_B × k`, orthonormal columns.
    pub v: Matrix,
    /// `A T`, the orthonormal left factor of the rank-`k` reconstruction; `m × k`.
    pub left: Matrix,
    /// `σ_{k+1}` of the projected `B`, zero past its rank.
    pub rapca_error: f64,
    /// Full singular-value sequence of the projected `B`.
    pub spectrum: Vec<f64>,
    pub method: Method,
}

impl RapcaResult {
    /// `A T Σ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut ls = self.left.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            ls.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        matmul(&ls, &self.v.transpose()).expect("conforming")
    }
}

/// Regression-aware PCA: truncated SVD of the projected `B`.
pub fn rapca(a: &Matrix, b: &Matrix, k: usize, method: Method, rank_tol: f64) -> Result<RapcaResult> {
    check_pair(a, b, "rapca")?;
    let proj = Projector::new(a, method, rank_tol)?;
    check_k(k, proj.rank(), b.cols())?;
    let pb = proj.project(b)?;
    let (u_full, spectrum, v_full) = svd(&pb)?.into_parts();
    let u = u_full.column_range(0, k);
    let v = v_full.column_range(0, k);
    let (t, left) = match &proj {
        Projector::Qr(f) => {
            let rt = trapezoid_pinv_apply(f.r_factor(), &u);
            (unpermute_rows(&rt, f.perm()), matmul(f.q(), &u)?)
        }
        Projector::Whitened(w) => (w.inverse_sqrt_gram_apply(&u)?, w.apply_adjoint(&u)?),
    };
    Ok(RapcaResult {
        t,
        sigma: spectrum[..k].to_vec(),
        u,
        v,
        left,
        rapca_error: spectrum.get(k).copied().unwrap_or(0.0),
        spectrum,
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcaSpectrum {
    /// Cosines of the principal angles between `range(A)` and `range(B)`,
    /// nonincreasing and clamped to `[0, 1]`.
    pub sigma: Vec<f64>,
    /// Largest value before clamping.
    pub max_unclamped: f64,
}

/// Singular values of `Q_Aᵀ Q_B`.
pub fn cca_spectrum(a: &Matrix, b: &Matrix, rank_tol: f64) -> Result<CcaSpectrum> {
    check_pair(a, b, "cca_spectrum")?;
    let qa = pivoted_qr(a, rank_tol)?;
    let qb = pivoted_qr(b, rank_tol)?;
    let raw = singular_values(&matmul_tn(qa.q(), qb.q())?)?;
    let max_unclamped = raw.first().copied().unwrap_or(0.0);
    Ok(CcaSpectrum {
        sigma: raw.into_iter().map(|s| s.clamp(0.0, 1.0)).collect(),
        max_unclamped,
    })
}

/// Singular values of `Q_Aᵀ B`; these govern the achievable RAID accuracy.
pub fn rapca_spectrum(a: &Matrix, b: &Matrix, rank_tol: f64) -> Result<Vec<f64>> {
    check_pair(a, b, "rapca_spectrum")?;
    let qa = pivoted_qr(a, rank_tol)?;
    singular_values(&matmul_tn(qa.q(), b)?)
}
