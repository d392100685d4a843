use serde::Serialize;

use super::{unit_columns, ExperimentPair, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnNormalization {
    None,
    /// Unit-norm columns of the source matrix before slicing.
    SourceColumns,
    /// Unit-norm columns of `A` and of `B` separately, after slicing.
    PairColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `A` = all rows but the last `lag`, `B` = all rows but the first `lag`.
    Direct,
    /// `B` = transpose of the last `target_rows` rows, `A` = transpose of the
    /// `lag` rows immediately before them.
    Transposed { target_rows: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LagSpec {
    pub lag: usize,
    pub normalize: ColumnNormalization,
    pub orientation: Orientation,
}

impl LagSpec {
    pub fn direct(lag: usize, normalize: ColumnNormalization) -> Self {
        LagSpec {
            lag,
            normalize,
            orientation: Orientation::Direct,
        }
    }

    pub fn transposed(history_rows: usize, target_rows: usize, normalize: ColumnNormalization) -> Self {
        LagSpec {
            lag: history_rows,
            normalize,
            orientation: Orientation::Transposed { target_rows },
        }
    }

    pub fn validate(&self, rows: usize) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::contract("lag must be ≥ 1"));
        }
        match self.orientation {
            Orientation::Direct if self.lag >= rows => Err(Error::contract(format!(
                "lag {} must be smaller than the row count {rows}",
                self.lag
            ))),
            Orientation::Transposed { target_rows } if target_rows == 0 => {
                Err(Error::contract("transposed target block must have at least one row"))
            }
            Orientation::Transposed { target_rows } if self.lag + target_rows > rows => {
                Err(Error::contract(format!(
                    "history of {} rows plus target of {target_rows} rows exceeds the row count {rows}",
                    self.lag
                )))
            }
            _ => Ok(()),
        }
    }
}

pub fn make_lagged_pair(c: &Matrix, spec: &LagSpec) -> Result<ExperimentPair> {
    spec.validate(c.rows())?;
    let normalized;
    let source = if spec.normalize == ColumnNormalization::SourceColumns {
        normalized = unit_columns(c);
        &normalized
    } else {
        c
    };
    let m = c.rows();
    let (mut a, mut b) = match spec.orientation {
        Orientation::Direct => (source.row_range(0, m - spec.lag), source.row_range(spec.lag, m)),
        Orientation::Transposed { target_rows } => {
            let split = m - target_rows;
            (
                source.row_range(split - spec.lag, split).transpose(),
                source.row_range(split, m).transpose(),
            )
        }
    };
    if spec.normalize == ColumnNormalization::PairColumns {
        a = unit_columns(&a);
        b = unit_columns(&b);
    }
    let mut provenance = Provenance::new("lagged")
        .with("lag", spec.lag)
        .with("source_rows", m)
        .with("source_cols", c.cols())
        .with("normalize", serde_json::to_string(&spec.normalize).unwrap_or_default());
    if let Orientation::Transposed { target_rows } = spec.orientation {
        provenance = provenance.with("target_rows", target_rows);
    }
    ExperimentPair::jointly_scaled(a, b, provenance)
}
