//! Generators and dataset ingestion for the five reference experiments.
//!
//! Every generator returns an [`ExperimentPair`]: a design `A` and target `B`
//! with the same row count, jointly divided by `‖B‖₂` so that `‖B‖₂ = 1`.

mod datasets;
mod lag;
mod potential;
mod rng;
mod timeseries;

use std::collections::BTreeMap;

use serde::Serialize;

pub use datasets::{
    load_electricity, load_motion, load_motion_with_shape, parse_electricity, ELECTRICITY_COLS,
    ELECTRICITY_ROWS, MOTION_SHAPE,
};
pub use lag::{make_lagged_pair, ColumnNormalization, LagSpec, Orientation};
pub use potential::{gen_potential, ChargeConfig};
pub use rng::CounterRng;
pub use timeseries::{gen_timeseries, timeseries_source, DESK_ROWS, PAPER_ROWS};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::solve::NORM_TOL;
use crate::svd::spectral_norm;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(source: &str) -> Self {
        Provenance {
            source: source.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPair {
    pub a: Matrix,
    pub b: Matrix,
    /// The common divisor applied to `A` and `B`.
    pub scale_factor: f64,
    pub provenance: Provenance,
}

impl ExperimentPair {
    /// Divides both matrices by `‖B‖₂`.
    pub fn jointly_scaled(mut a: Matrix, mut b: Matrix, provenance: Provenance) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch {
                op: "experiment pair",
                left: a.shape(),
                right: b.shape(),
            });
        }
        let scale = spectral_norm(&b, NORM_TOL)?;
        if scale == 0.0 {
            return Err(Error::ZeroMatrix("cannot normalize a zero target matrix"));
        }
        divide(&mut a, scale);
        divide(&mut b, scale);
        Ok(ExperimentPair {
            a,
            b,
            scale_factor: scale,
            provenance,
        })
    }

    /// JSON sidecar describing where the pair came from.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source": self.provenance.source,
            "params": self.provenance.params,
            "scale_factor": self.scale_factor,
            "a_shape": [self.a.rows(), self.a.cols()],
            "b_shape": [self.b.rows(), self.b.cols()],
        })
    }
}

fn divide(m: &mut Matrix, s: f64) {
    m.data_mut().iter_mut().for_each(|x| *x /= s);
}

/// Rescales every nonzero column to unit Euclidean norm; zero columns stay zero.
pub fn unit_columns(m: &Matrix) -> Matrix {
    let norms = m.column_norms();
    Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        if norms[j] > 0.0 {
            m[(i, j)] / norms[j]
        } else {
            0.0
        }
    })
}
