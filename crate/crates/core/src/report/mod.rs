//! Experiment reports, metric serialization and plots.

pub mod hexfloat;
pub mod svg;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::experiments::ExperimentPair;
use crate::id::{id_fixed_rank_with, IdCertificate, IdOptions};
use crate::matrix::Matrix;
use crate::regression::{cca_spectrum, raid_with, rapca, Method};

pub use svg::{emit_biplot, emit_svplot, render_biplot, render_svplot, SpectrumSeries, LOG_FLOOR};

/// Rounds to six significant digits.
pub fn six_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Six significant digits in exponent notation, for CSV cells.
pub fn csv_num(x: f64) -> String {
    format!("{:e}", six_sig(x))
}

/// A scalar written both rounded and exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric(pub f64);

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Metric", 2)?;
        st.serialize_field("value", &six_sig(self.0))?;
        st.serialize_field("hex", &hexfloat::to_hex(self.0))?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub min_residual: Metric,
    pub id_error: Metric,
    pub raid_error: Metric,
    pub rapca_error: Metric,
    pub raid_error_frobenius: Metric,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectra {
    pub cca: Vec<f64>,
    pub rapca: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedColumns {
    pub id: Vec<usize>,
    pub raid: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Biplot {
    pub scores: Vec<[f64; 2]>,
    pub loadings: Vec<[f64; 2]>,
}

impl Biplot {
    pub fn scores_matrix(&self) -> Matrix {
        Matrix::from_fn(self.scores.len(), 2, |i, j| self.scores[i][j])
    }

    pub fn loadings_matrix(&self) -> Matrix {
        Matrix::from_fn(self.loadings.len(), 2, |i, j| self.loadings[i][j])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub preset: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub shapes: BTreeMap<String, [usize; 2]>,
    pub design_rank: usize,
    pub metrics: Metrics,
    pub spectra: Spectra,
    pub selected_columns: SelectedColumns,
    pub id_certificate: IdCertificate,
    pub raid_certificate: IdCertificate,
    pub biplot: Biplot,
}

/// Settings shared by every preset run.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub k: usize,
    pub method: Method,
    pub rank_tol: f64,
    pub id: IdOptions,
}

/// Runs ID, RAID, RAPCA and CCA on one pair and gathers the results.
///
/// The biplot comes from the rank-2 regression-aware factors: scores are
/// `σ_j` times the left singular vectors, loadings the right singular vectors.
pub fn analyze(
    preset: &str,
    pair: &ExperimentPair,
    params: BTreeMap<String, serde_json::Value>,
    opts: &AnalysisOptions,
) -> Result<ExperimentReport> {
    let (a, b) = (&pair.a, &pair.b);
    let raid = raid_with(a, b, opts.k, opts.method, opts.rank_tol, opts.id)?;
    let id = id_fixed_rank_with(b, opts.k, opts.id)?;
    let cca = cca_spectrum(a, b, opts.rank_tol)?;
    let rank_cap = raid.design_rank.min(b.cols());
    let plot_rank = opts.k.max(2).min(rank_cap);
    let pca = rapca(a, b, plot_rank, opts.method, opts.rank_tol)?;
    let rapca_error = pca.spectrum.get(opts.k).copied().unwrap_or(0.0);

    let coord = |m: &Matrix, i: usize, j: usize, scale: f64| if j < m.cols() { scale * m[(i, j)] } else { 0.0 };
    let sig = |j: usize| pca.sigma.get(j).copied().unwrap_or(0.0);
    let scores = (0..pca.left.rows())
        .map(|i| [coord(&pca.left, i, 0, sig(0)), coord(&pca.left, i, 1, sig(1))])
        .collect();
    let loadings = (0..pca.v.rows())
        .map(|i| [coord(&pca.v, i, 0, 1.0), coord(&pca.v, i, 1, 1.0)])
        .collect();

    let mut shapes = BTreeMap::new();
    shapes.insert("a".to_string(), [a.rows(), a.cols()]);
    shapes.insert("b".to_string(), [b.rows(), b.cols()]);

    Ok(ExperimentReport {
        preset: preset.to_string(),
        params,
        shapes,
        design_rank: raid.design_rank,
        metrics: Metrics {
            min_residual: Metric(raid.min_residual),
            id_error: Metric(id.certificate().achieved_error),
            raid_error: Metric(raid.raid_error),
            rapca_error: Metric(rapca_error),
            raid_error_frobenius: Metric(raid.raid_error_frobenius),
        },
        spectra: Spectra {
            cca: cca.sigma,
            rapca: pca.spectrum.clone(),
        },
        selected_columns: SelectedColumns {
            id: id.selected().to_vec(),
            raid: raid.selected().to_vec(),
        },
        id_certificate: id.certificate().clone(),
        raid_certificate: raid.id.certificate().clone(),
        biplot: Biplot { scores, loadings },
    })
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn metrics_csv_header() -> &'static str {
        "preset,l,k,min_residual,id_error,raid_error,rapca_error,raid_error_frobenius"
    }

    pub fn metrics_csv_row(&self) -> String {
        let param = |key: &str| self.params.get(key).map(|v| v.to_string()).unwrap_or_default();
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.preset,
            param("l"),
            param("k"),
            csv_num(m.min_residual.0),
            csv_num(m.id_error.0),
            csv_num(m.raid_error.0),
            csv_num(m.rapca_error.0),
            csv_num(m.raid_error_frobenius.0)
        )
    }

    pub fn metrics_csv(&self) -> String {
        format!("{}\n{}\n", Self::metrics_csv_header(), self.metrics_csv_row())
    }

    pub fn spectrum_series(&self) -> Vec<SpectrumSeries> {
        vec![
            SpectrumSeries::new("CCA", &self.spectra.cca),
            SpectrumSeries::new("RAPCA", &self.spectra.rapca),
        ]
    }

    /// Writes report.json, metrics.csv, svplot.svg and biplot.svg into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: &str| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(path, e))
        };
        write("report.json", &self.to_json())?;
        write("metrics.csv", &self.metrics_csv())?;
        emit_svplot(&self.spectrum_series(), &dir.join("svplot.svg"))?;
        emit_biplot(
            &self.biplot.scores_matrix(),
            &self.biplot.loadings_matrix(),
            &dir.join("biplot.svg"),
        )
    }
}

/// One row per lag, in the column order of the published tables.
pub fn lag_table_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("l,min_residual,id_error,raid_error\n");
    for r in reports {
        let l = r.params.get("l").map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{l},{},{},{}\n",
            csv_num(r.metrics.min_residual.0),
            csv_num(r.metrics.id_error.0),
            csv_num(r.metrics.raid_error.0)
        ));
    }
    out
}
