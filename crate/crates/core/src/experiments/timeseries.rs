use super::{CounterRng, ExperimentPair, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const PAPER_ROWS: usize = 10_000_000;
pub const DESK_ROWS: usize = 100_001;
const COLS: usize = 10;

/// The unscaled `m × 10` series before it is split into design and target.
///
/// Entry `(i, j)` (0-based) starts from the normal draw at counter `10·i + j`.
/// The first five columns are multiplied by 1e6, the last five are flattened
/// to their last-row draw, and `0.01·(i+1)·(j+1)` is added everywhere.
pub fn timeseries_source(m: usize, seed: u64) -> Result<Matrix> {
    if m < 3 {
        return Err(Error::contract(format!("time series needs at least 3 rows, got {m}")));
    }
    let rng = CounterRng::new(seed);
    let draw = |i: usize, j: usize| rng.normal((i * COLS + j) as u64);
    let mut c = Matrix::zeros(m, COLS);
    for j in 0..COLS {
        let col = c.col_mut(j);
        if j < 5 {
            for (i, v) in col.iter_mut().enumerate() {
                *v = 1e6 * draw(i, j);
            }
        } else {
            col.fill(draw(m - 1, j));
        }
        for (i, v) in col.iter_mut().enumerate() {
            *v += 0.01 * (i + 1) as f64 * (j + 1) as f64;
        }
    }
    Ok(c)
}

/// One-step-ahead pair from [`timeseries_source`]: `A` drops the last row,
/// `B` drops the first.
pub fn gen_timeseries(m: usize, seed: u64) -> Result<ExperimentPair> {
    let c = timeseries_source(m, seed)?;
    let a = c.row_range(0, m - 1);
    let b = c.row_range(1, m);
    drop(c);
    let provenance = Provenance::new("timeseries")
        .with("m", m)
        .with("seed", seed)
        .with("rng", "splitmix64-counter/box-muller-cos");
    ExperimentPair::jointly_scaled(a, b, provenance)
}
