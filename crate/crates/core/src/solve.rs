//! Pseudoinverse, least squares, the whitening operator `S = (AᵀA)^{-1/2}Aᵀ`
//! and the `A`-seminorm `‖D‖_A = ‖A D‖`.

use crate::error::{Error, Result};
use crate::matrix::{matmul, matmul_tn, Matrix};
use crate::qr::{pivoted_qr, trapezoid_pinv_apply};
use crate::svd::{singular_values, svd, spectral_norm};

/// Relative accuracy used for every spectral norm computed internally.
pub const NORM_TOL: f64 = 1e-8;

/// Largest `m` for which [`WhiteningOperator::materialize`] will build `S`.
pub const MATERIALIZE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Spectral,
    Frobenius,
}

impl Norm {
    pub fn of(self, m: &Matrix) -> Result<f64> {
        match self {
            Norm::Spectral => spectral_norm(m, NORM_TOL),
            Norm::Frobenius => Ok(m.frobenius_norm()),
        }
    }
}

fn check_tol(rank_tol: f64) -> Result<()> {
    if rank_tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::contract(format!("rank_tol must be >= 0, got {rank_tol}")))
    }
}

/// Moore–Penrose pseudoinverse; singular values `≤ rank_tol · σ₁` count as zero.
pub fn pseudoinverse(m: &Matrix, rank_tol: f64) -> Result<Matrix> {
    check_tol(rank_tol)?;
    if m.is_zero() {
        return Ok(Matrix::zeros(m.cols(), m.rows()));
    }
    let s = svd(m)?;
    let cut = rank_tol * s.sigma()[0];
    let r = s.sigma().iter().take_while(|&&x| x > cut).count();
    let mut v = s.v().column_range(0, r);
    for j in 0..r {
        let inv = 1.0 / s.sigma()[j];
        v.col_mut(j).iter_mut().for_each(|x| *x *= inv);
    }
    matmul(&v, &s.u().column_range(0, r).transpose())
}

/// Minimum-norm least-squares solution `X = A†B`.
///
/// Goes through the pivoted QR of `A`, followed by a complete orthogonal
/// decomposition of the retained rows when `A` is rank deficient; `A†` itself
/// is never formed.
pub fn least_squares_solve(a: &Matrix, b: &Matrix, rank_tol: f64) -> Result<Matrix> {
    check_tol(rank_tol)?;
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            op: "least_squares_solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if a.is_zero() {
        return Ok(Matrix::zeros(a.cols(), b.cols()));
    }
    let f = pivoted_qr(a, rank_tol)?;
    let qtb = matmul_tn(f.q(), b)?;
    let xp = trapezoid_pinv_apply(f.r_factor(), &qtb);
    let mut x = Matrix::zeros(a.cols(), b.cols());
    for (i, &orig) in f.perm().iter().enumerate() {
        for c in 0..b.cols() {
            x[(orig, c)] = xp[(i, c)];
        }
    }
    Ok(x)
}

/// `S = V_r U_rᵀ` from the thin SVD `A = U Σ Vᵀ`, kept in factored form.
#[derive(Debug, Clone)]
pub struct WhiteningOperator {
    v_r: Matrix,
    u_r: Matrix,
    sigma_r: Vec<f64>,
}

impl WhiteningOperator {
    pub fn rank(&self) -> usize {
        self.sigma_r.len()
    }

    /// `n × r`
    pub fn v_r(&self) -> &Matrix {
        &self.v_r
    }

    /// `m × r`
    pub fn u_r(&self) -> &Matrix {
        &self.u_r
    }

    /// Retained singular values of `A`.
    pub fn sigma_r(&self) -> &[f64] {
        &self.sigma_r
    }

    /// `S B = V_r (U_rᵀ B)`.
    pub fn apply(&self, b: &Matrix) -> Result<Matrix> {
        matmul(&self.v_r, &matmul_tn(&self.u_r, b)?)
    }

    /// `Sᵀ Y = U_r (V_rᵀ Y)`.
    pub fn apply_adjoint(&self, y: &Matrix) -> Result<Matrix> {
        matmul(&self.u_r, &matmul_tn(&self.v_r, y)?)
    }

    /// `SᵀS B = A A† B`.
    pub fn project(&self, b: &Matrix) -> Result<Matrix> {
        matmul(&self.u_r, &matmul_tn(&self.u_r, b)?)
    }

    /// `(AᵀA)^{-1/2} M = V_r Σ_r⁻¹ V_rᵀ M`.
    pub fn inverse_sqrt_gram_apply(&self, m: &Matrix) -> Result<Matrix> {
        let mut c = matmul_tn(&self.v_r, m)?;
        for j in 0..c.cols() {
            for (x, s) in c.col_mut(j).iter_mut().zip(&self.sigma_r) {
                *x /= s;
            }
        }
        matmul(&self.v_r, &c)
    }

    /// Explicit `n × m` matrix `S`; refused for `m > 2048`.
    pub fn materialize(&self) -> Result<Matrix> {
        if self.u_r.rows() > MATERIALIZE_LIMIT {
            return Err(Error::contract(format!(
                "refusing to materialize S for m = {} > {MATERIALIZE_LIMIT}; use apply()",
                self.u_r.rows()
            )));
        }
        matmul(&self.v_r, &self.u_r.transpose())
    }
}

pub fn whitening_operator(a: &Matrix, rank_tol: f64) -> Result<WhiteningOperator> {
    check_tol(rank_tol)?;
    if a.is_zero() {
        return Err(Error::ZeroMatrix("whitening undefined for zero design matrix"));
    }
    let (u, sigma, v) = svd(a)?.into_parts();
    let cut = rank_tol * sigma[0];
    let r = sigma.iter().take_while(|&&x| x > cut).count();
    Ok(WhiteningOperator {
        v_r: v.column_range(0, r),
        u_r: u.column_range(0, r),
        sigma_r: sigma[..r].to_vec(),
    })
}

/// `‖A D‖` in the chosen norm.
pub fn seminorm_a(a: &Matrix, d: &Matrix, norm: Norm) -> Result<f64> {
    if a.cols() != d.rows() {
        return Err(Error::DimensionMismatch {
            op: "seminorm_a",
            left: a.shape(),
            right: d.shape(),
        });
    }
    norm.of(&matmul(a, d)?)
}

/// Singular values of the materialized `S`; test and diagnostics helper.
pub fn whitening_singular_values(w: &WhiteningOperator) -> Result<Vec<f64>> {
    singular_values(&w.materialize()?)
}
