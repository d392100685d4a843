use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::{ExperimentPair, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Charge layout for the potential-theory example.
///
/// Test charges sit evenly on a circle starting at angle 0. Original charges
/// cover the arc `[π/2, π]` and supervisory charges the arc `[π, 3π/2]`, each
/// placed at arc midpoints `start + (j + ½)·span/count`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeConfig {
    pub n_test: usize,
    pub n_original: usize,
    pub n_supervisory: usize,
    pub test_radius: f64,
    pub original_radius: f64,
    pub supervisory_radius: f64,
}

impl Default for ChargeConfig {
    fn default() -> Self {
        ChargeConfig {
            n_test: 80,
            n_original: 20,
            n_supervisory: 20,
            test_radius: 1.0,
            original_radius: 0.9,
            supervisory_radius: 1.1,
        }
    }
}

impl ChargeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_test == 0 || self.n_original == 0 || self.n_supervisory == 0 {
            return Err(Error::contract("charge counts must be positive"));
        }
        for r in [self.test_radius, self.original_radius, self.supervisory_radius] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::contract(format!("charge radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub fn test_points(&self) -> Vec<(f64, f64)> {
        (0..self.n_test)
            .map(|i| polar(self.test_radius, TAU * i as f64 / self.n_test as f64))
            .collect()
    }

    pub fn original_points(&self) -> Vec<(f64, f64)> {
        arc(self.original_radius, FRAC_PI_2, self.n_original)
    }

    pub fn supervisory_points(&self) -> Vec<(f64, f64)> {
        arc(self.supervisory_radius, PI, self.n_supervisory)
    }
}

fn polar(r: f64, theta: f64) -> (f64, f64) {
    (r * theta.cos(), r * theta.sin())
}

fn arc(r: f64, start: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|j| polar(r, start + (j as f64 + 0.5) * FRAC_PI_2 / count as f64))
        .collect()
}

fn log_distances(rows: &[(f64, f64)], cols: &[(f64, f64)]) -> Result<Matrix> {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (j, q) in cols.iter().enumerate() {
        for (i, p) in rows.iter().enumerate() {
            let d = (p.0 - q.0).hypot(p.1 - q.1);
            if d == 0.0 {
                return Err(Error::contract(format!(
                    "test charge {i} coincides with source charge {j}"
                )));
            }
            out.col_mut(j)[i] = d.ln();
        }
    }
    Ok(out)
}

/// Log-potential interactions: `B` against the original charges, `A` against
/// the supervisory charges, both scaled so that `‖B‖₂ = 1`.
pub fn gen_potential(cfg: &ChargeConfig) -> Result<ExperimentPair> {
    cfg.validate()?;
    let tests = cfg.test_points();
    let b = log_distances(&tests, &cfg.original_points())?;
    let a = log_distances(&tests, &cfg.supervisory_points())?;
    let provenance = Provenance::new("potential")
        .with("n_test", cfg.n_test)
        .with("n_original", cfg.n_original)
        .with("n_supervisory", cfg.n_supervisory)
        .with("test_radius", cfg.test_radius)
        .with("original_radius", cfg.original_radius)
        .with("supervisory_radius", cfg.supervisory_radius);
    ExperimentPair::jointly_scaled(a, b, provenance)
}
