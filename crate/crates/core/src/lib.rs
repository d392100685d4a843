pub mod cli;
pub mod error;
pub mod experiments;
pub mod id;
pub mod io;
pub mod matrix;
pub mod qr;
pub mod regression;
pub mod report;
pub mod solve;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::{matmul, matmul_tn, Matrix};
