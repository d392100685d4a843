//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary: `cargo test --test acceptance [-- 4 5]` limits the
//! run to the listed criteria. Dataset criteria print SKIP unless the files
//! are present under `RAIDKIT_DATA_DIR` (default: `data/` at the workspace
//! root). `RAIDKIT_FULL_SCALE=1` adds the 10,000,001-row time series.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use raidkit::experiments::{gen_potential, gen_timeseries, ChargeConfig, DESK_ROWS, PAPER_ROWS};
use raidkit::id::{id_fixed_rank, IdCertificate};
use raidkit::qr::{default_rank_tol, pivoted_qr};
use raidkit::regression::{raid, rapca, Method};
use raidkit::report::hexfloat::from_hex;
use raidkit::solve::{least_squares_solve, pseudoinverse};
use raidkit::svd::svd;
use raidkit::{matmul, Matrix};
use serde_json::Value;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::*;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn na_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `‖B − C P‖₂` through nalgebra.
fn oracle_id_error(b: &Matrix, selected: &[usize], p: &Matrix) -> f64 {
    let c = to_na(&b.select_columns(selected));
    na_norm(&(to_na(b) - c * to_na(p)))
}

fn random_decay(r: &mut rand_chacha::ChaCha8Rng) -> Decay {
    match r.random_range(0..3) {
        0 => Decay::Flat,
        1 => Decay::Geometric,
        _ => Decay::Step,
    }
}

fn test_matrix(r: &mut rand_chacha::ChaCha8Rng, max_m: usize, max_n: usize) -> Matrix {
    let m = r.random_range(1..=max_m);
    let n = r.random_range(1..=max_n);
    let decay = random_decay(r);
    let len = m.min(n);
    let sigma = spectrum(decay, len, r);
    with_spectrum(r, m, n, &sigma)
}

fn id_bound() -> Verdict {
    let mut r = rng(0xacce_0001);
    let (mut cases, mut entry, mut held) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    let mut elapsed = Duration::ZERO;
    for idx in 0..500 {
        let b = if idx == 0 {
            let sigma = spectrum(Decay::Geometric, 80, &mut r);
            with_spectrum(&mut r, 120, 80, &sigma)
        } else {
            test_matrix(&mut r, 120, 80)
        };
        let (m, n) = b.shape();
        let sigma = oracle_singular_values(&b);
        let slack = m.max(n) as f64 * f64::EPSILON * sigma[0];
        for k in 1..m.min(n) {
            let t = Instant::now();
            let id = id_fixed_rank(&b, k).unwrap();
            elapsed += t.elapsed();
            cases += 1;
            if !id.certificate().entry_condition_met {
                continue;
            }
            entry += 1;
            let bound = IdCertificate::norm_bound(k, n) * sigma[k];
            let err = oracle_id_error(&b, id.selected(), id.p());
            if err <= bound + slack {
                held += 1;
            }
            if bound + slack > 0.0 {
                worst = worst.max(err / (bound + slack));
            }
        }
    }
    let detail = format!(
        "{held}/{entry} entry-condition cases within the bound ({cases} (B, k) pairs), worst ratio {worst:.3}, library time {}",
        secs(elapsed)
    );
    verdict(held == entry && entry > 0 && elapsed < Duration::from_secs(60), detail)
}

fn certificate_conditions() -> Verdict {
    let mut r = rng(0xacce_0002);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for idx in 0..200 {
        let b = if idx % 3 == 0 {
            let m = r.random_range(2..=60);
            let n = r.random_range(2..=40);
            let rank = r.random_range(1..=m.min(n));
            matmul(&gaussian(&mut r, m, rank), &gaussian(&mut r, rank, n)).unwrap()
        } else {
            test_matrix(&mut r, 60, 40)
        };
        let (m, n) = b.shape();
        let b_norm = oracle_spectral_norm(&b);
        for k in 1..=m.min(n) {
            checked += 1;
            let id = id_fixed_rank(&b, k).unwrap();
            let p = id.p();
            for (pos, &j) in id.selected().iter().enumerate() {
                for i in 0..k {
                    let want: f64 = if i == pos { 1.0 } else { 0.0 };
                    if p[(i, j)].to_bits() != want.to_bits() {
                        failures.push(format!("identity entry ({i},{j}) for {m}×{n}, k={k}"));
                    }
                }
            }
            let ps = oracle_singular_values(p);
            if ps[k - 1] < 1.0 - 1e-10 {
                failures.push(format!("σ_min(P) = {} for {m}×{n}, k={k}", ps[k - 1]));
            }
            if id.certificate().entry_condition_met && ps[0] > IdCertificate::norm_bound(k, n) * (1.0 + 1e-10) {
                failures.push(format!("‖P‖₂ = {} for {m}×{n}, k={k}", ps[0]));
            }
            if k == m.min(n) {
                let err = oracle_id_error(&b, id.selected(), p);
                if err > 1e-12 * b_norm {
                    failures.push(format!("full-rank error {err:e} for {m}×{n}"));
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{checked} (B, k) pairs"),
        Some(f) => format!("{} failures in {checked} pairs, first: {f}", failures.len()),
    };
    verdict(failures.is_empty(), detail)
}

fn identity_chain() -> Verdict {
    let mut r = rng(0xacce_0003);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..100 {
        let m = r.random_range(4..=60);
        let na = r.random_range(1..=12);
        let nb = r.random_range(1..=12);
        let rank = r.random_range(1..=na.min(m));
        let a = matmul(&gaussian(&mut r, m, rank), &gaussian(&mut r, rank, na)).unwrap();
        let b = matmul(&a, &gaussian(&mut r, na, nb))
            .unwrap()
            .add(&gaussian(&mut r, m, nb).scaled(0.1))
            .unwrap();
        let tol = default_rank_tol(m, na);
        let design_rank = pivoted_qr(&a, tol).unwrap().rank();
        let k = r.random_range(1..=design_rank.min(nb));
        let b_norm = oracle_spectral_norm(&b);
        let q = oracle_range_basis(&a);
        let x = least_squares_solve(&a, &b, tol).unwrap();
        let ax = to_na(&matmul(&a, &x).unwrap());
        for method in [Method::Qr, Method::Whitened] {
            let res = raid(&a, &b, k, method, tol).unwrap();
            let c = res.id.columns_of(&b);
            let y = least_squares_solve(&a, &c, tol).unwrap();
            let ayp = to_na(&matmul(&a, &matmul(&y, res.p()).unwrap()).unwrap());
            let chain = na_norm(&(&ax - ayp));
            let cp = to_na(&matmul(&c, res.p()).unwrap());
            let projected = na_norm(&(q.transpose() * (to_na(&b) - cp)));
            let gap = (chain - projected).abs().max((res.raid_error - projected).abs());
            worst = worst.max(gap / b_norm);
            count += 1;
        }
    }
    verdict(
        worst <= 1e-9,
        format!("{count} runs over 100 pairs, worst gap {worst:.3e}·‖B‖₂"),
    )
}

fn potential_theory() -> Verdict {
    let t = Instant::now();
    let pair = gen_potential(&ChargeConfig::default()).unwrap();
    let tol = default_rank_tol(80, 20);
    let res = raid(&pair.a, &pair.b, 10, Method::Qr, tol).unwrap();
    let id = id_fixed_rank(&pair.b, 10).unwrap();
    let elapsed = t.elapsed();
    let min_res = res.min_residual;
    let id_err = id.certificate().achieved_error;
    let raid_err = res.raid_error;
    let ok = (min_res - 0.67).abs() <= 0.07
        && (0.008..=0.032).contains(&id_err)
        && raid_err <= 1e-8
        && elapsed < Duration::from_secs(1);
    verdict(
        ok,
        format!(
            "min residual {min_res:.4}, ID error {id_err:.4}, RAID error {raid_err:.2e}, {}",
            secs(elapsed)
        ),
    )
}

struct SeriesOutcome {
    ok: bool,
    detail: String,
}

fn timeseries_at(rows: usize, limit: Option<Duration>) -> SeriesOutcome {
    let t = Instant::now();
    let pair = gen_timeseries(rows, 0).unwrap();
    let tol = default_rank_tol(pair.a.rows(), pair.a.cols());
    let res = raid(&pair.a, &pair.b, 4, Method::Qr, tol).unwrap();
    let id = id_fixed_rank(&pair.b, 4).unwrap();
    let elapsed = t.elapsed();
    let late = |cols: &[usize]| cols.iter().any(|&j| j >= 5);
    let one_based = |cols: &[usize]| cols.iter().map(|j| j + 1).collect::<Vec<_>>();
    let raid_err = res.raid_error;
    let id_err = id.certificate().achieved_error;
    let checks = [
        ("RAID error ≤ 0.01", raid_err <= 0.01),
        ("ID error ≥ 0.5", id_err >= 0.5),
        ("RAID picks a column from 6–10", late(res.selected())),
        ("ID picks none of 6–10", !late(id.selected())),
        ("runtime", limit.is_none_or(|l| elapsed < l)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let mut detail = format!(
        "m={rows}: RAID error {raid_err:.2e}, ID error {id_err:.3}, RAID columns {:?}, ID columns {:?}, {}",
        one_based(res.selected()),
        one_based(id.selected()),
        secs(elapsed)
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; not met: {}", failed.join(", ")));
    }
    SeriesOutcome {
        ok: failed.is_empty(),
        detail,
    }
}

fn synthetic_timeseries() -> Verdict {
    let desk = timeseries_at(DESK_ROWS, Some(Duration::from_secs(30)));
    let mut detail = desk.detail;
    if std::env::var("RAIDKIT_FULL_SCALE").is_ok_and(|v| v == "1") {
        let full = timeseries_at(PAPER_ROWS, None);
        detail.push_str(&format!(" | full scale {}: {}", if full.ok { "ok" } else { "not met" }, full.detail));
    }
    verdict(desk.ok, detail)
}

fn data_dir() -> PathBuf {
    std::env::var_os("RAIDKIT_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn run_preset(name: &str, out: &Path, extra: &[&str]) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_raidkit"))
        .args(["preset", name, "--data-dir"])
        .arg(data_dir())
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&output.stderr).trim().to_string())
    }
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn metric(report: &Value, key: &str) -> f64 {
    from_hex(report["metrics"][key]["hex"].as_str().unwrap()).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn electricity_present() -> bool {
    data_dir().join("LD2011_2014.txt").exists()
}

fn motion_present() -> bool {
    let d = data_dir();
    d.join("motion.csv").exists() || d.join("motion-files.txt").exists()
}

fn electricity_table() -> Verdict {
    if !electricity_present() {
        return Skip(format!("LD2011_2014.txt not found in {}", data_dir().display()));
    }
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    if let Err(e) = run_preset("electricity", dir.path(), &[]) {
        return Fail(e);
    }
    let elapsed = t.elapsed();
    let targets = [(100, 0.075, 0.0037), (200, 0.094, 0.0030), (300, 0.098, 0.0029)];
    let mut ok = elapsed < Duration::from_secs(30 * 60);
    let mut rows = Vec::new();
    for (l, min_res, raid_err) in targets {
        let r = report(&dir.path().join(format!("l{l}/report.json")));
        let got = (metric(&r, "min_residual"), metric(&r, "id_error"), metric(&r, "raid_error"));
        ok &= within(got.0, min_res, 0.01) && within(got.1, 0.020, 0.005) && within(got.2, raid_err, 0.002);
        rows.push(format!("l={l}: {:.4}/{:.4}/{:.4}", got.0, got.1, got.2));
    }
    verdict(
        ok,
        format!("min residual/ID/RAID {}, {}", rows.join(", "), secs(elapsed)),
    )
}

fn electricity_transposed() -> Verdict {
    if !electricity_present() {
        return Skip(format!("LD2011_2014.txt not found in {}", data_dir().display()));
    }
    let dir = tempfile::tempdir().unwrap();
    if let Err(e) = run_preset("electricity-t", dir.path(), &[]) {
        return Fail(e);
    }
    let r = report(&dir.path().join("report.json"));
    let (min_res, id_err, raid_err) = (metric(&r, "min_residual"), metric(&r, "id_error"), metric(&r, "raid_error"));
    let cca: Vec<f64> = r["spectra"]["cca"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let cca_gap = cca.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let ok = within(id_err, 0.12, 0.02) && within(raid_err, 0.044, 0.01) && within(min_res, 0.22, 0.02) && cca_gap <= 1e-12;
    verdict(
        ok,
        format!("min residual {min_res:.4}, ID error {id_err:.4}, RAID error {raid_err:.4}, max |σ_CCA − 1| {cca_gap:.1e}"),
    )
}

fn motion_table() -> Verdict {
    if !motion_present() {
        return Skip(format!("motion.csv or motion-files.txt not found in {}", data_dir().display()));
    }
    let dir = tempfile::tempdir().unwrap();
    if let Err(e) = run_preset("motion", dir.path(), &[]) {
        return Fail(e);
    }
    let targets = [(20, 0.41, 0.81, 0.16), (40, 0.41, 0.78, 0.15), (60, 0.42, 0.78, 0.13)];
    let mut ok = true;
    let mut rows = Vec::new();
    for (l, min_res, id_err, raid_err) in targets {
        let r = report(&dir.path().join(format!("l{l}/report.json")));
        let got = (metric(&r, "min_residual"), metric(&r, "id_error"), metric(&r, "raid_error"));
        ok &= within(got.0, min_res, 0.05) && within(got.1, id_err, 0.08) && within(got.2, raid_err, 0.05);
        rows.push(format!("l={l}: {:.3}/{:.3}/{:.3}", got.0, got.1, got.2));
    }
    verdict(ok, format!("min residual/ID/RAID {}", rows.join(", ")))
}

/// Moore–Penrose conditions are checked on Gaussian and exactly rank-deficient
/// inputs; graded spectra (condition numbers up to ~1e13) go through the QR
/// and SVD checks only, since their products `PA`, `AP` carry `ε·cond(A)`
/// rounding for any backward-stable pseudoinverse.
fn factorization_oracles() -> Verdict {
    let mut r = rng(0xacce_0009);
    let mut failures = Vec::new();
    let (mut mp_cases, mut graded) = (0, 0);
    let t = Instant::now();
    for case in 0..1000 {
        let m = r.random_range(1..=40);
        let n = r.random_range(1..=40);
        let (a, mp) = match case % 4 {
            0 => (gaussian(&mut r, m, n), true),
            1 => {
                let rank = r.random_range(1..=m.min(n));
                (matmul(&gaussian(&mut r, m, rank), &gaussian(&mut r, rank, n)).unwrap(), true)
            }
            _ => {
                graded += 1;
                (test_matrix(&mut r, 40, 40), false)
            }
        };
        let (m, n) = a.shape();
        let norm = oracle_spectral_norm(&a);
        let mut fail = |what: &str, value: f64| failures.push(format!("{what} = {value:e} on {m}×{n} (case {case})"));

        if mp {
            mp_cases += 1;
            let p = pseudoinverse(&a, default_rank_tol(m, n)).unwrap();
            let ap = matmul(&a, &p).unwrap();
            let pa = matmul(&p, &a).unwrap();
            let pinv_norm = oracle_spectral_norm(&p);
            let tol = 1e-9 * norm.max(1.0);
            let conds = [
                ("‖APA − A‖", diff_norm(&matmul(&ap, &a).unwrap(), &a), tol),
                (
                    "‖PAP − P‖",
                    diff_norm(&matmul(&pa, &p).unwrap(), &p),
                    1e-9 * pinv_norm.max(1.0) * norm.max(1.0),
                ),
                ("‖(AP)ᵀ − AP‖", diff_norm(&ap, &ap.transpose()), tol),
                ("‖(PA)ᵀ − PA‖", diff_norm(&pa, &pa.transpose()), tol),
            ];
            for (what, value, bound) in conds {
                if value > bound {
                    fail(what, value);
                }
            }
        }

        let f = pivoted_qr(&a, default_rank_tol(m, n)).unwrap();
        let rec = diff_norm(&f.reconstruct(), &a);
        if rec > 1e-12 * norm {
            fail("QR reconstruction", rec);
        }
        let q = f.q();
        let gram = matmul(&q.transpose(), q).unwrap().sub(&Matrix::identity(q.cols())).unwrap();
        if gram.max_abs() > 1e-12 * n as f64 {
            fail("‖QᵀQ − I‖max", gram.max_abs());
        }

        let s = svd(&a).unwrap();
        let rec = diff_norm(&s.reconstruct(), &a);
        if rec > 1e-10 * norm {
            fail("SVD reconstruction", rec);
        }
        let oracle = oracle_singular_values(&a);
        let gap = s.sigma().iter().zip(&oracle).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if gap > 1e-10 * norm {
            fail("singular value gap", gap);
        }
    }
    let elapsed = t.elapsed();
    let detail = match failures.first() {
        None => format!(
            "1000 cases ({mp_cases} with Moore–Penrose checks, {graded} graded spectra), {}",
            secs(elapsed)
        ),
        Some(f) => format!("{} failures, first: {f}; {}", failures.len(), secs(elapsed)),
    };
    verdict(failures.is_empty() && elapsed < Duration::from_secs(120), detail)
}

fn trivial_design() -> Verdict {
    let mut r = rng(0xacce_0010);
    let mut failures = Vec::new();
    let mut runs = 0;
    for _ in 0..50 {
        let m = r.random_range(2..=30);
        let n = r.random_range(2..=20);
        let b = gaussian(&mut r, m, n);
        let eye = Matrix::identity(m);
        let tol = default_rank_tol(m, m);
        let truncated = svd(&b).unwrap();
        for k in 1..=m.min(n) {
            let plain = id_fixed_rank(&b, k).unwrap();
            for method in [Method::Qr, Method::Whitened] {
                runs += 1;
                let res = raid(&eye, &b, k, method, tol).unwrap();
                if res.selected() != plain.selected()
                    || res.p().as_col_major() != plain.p().as_col_major()
                    || res.raid_error.to_bits() != plain.certificate().achieved_error.to_bits()
                {
                    failures.push(format!("raid {method:?} differs from ID on {m}×{n}, k={k}"));
                }
                let pca = rapca(&eye, &b, k, method, tol).unwrap();
                let gap = pca.reconstruct().sub(&truncated.reconstruct_rank(k)).unwrap().max_abs();
                if gap > 1e-10 {
                    failures.push(format!("rapca {method:?} off by {gap:e} on {m}×{n}, k={k}"));
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{runs} runs, both methods"),
        Some(f) => format!("{} of {runs} runs differ, first: {f}", failures.len()),
    };
    verdict(failures.is_empty(), detail)
}

fn determinism() -> Verdict {
    let mut presets: Vec<(&str, Vec<&str>)> = vec![("potential", vec![]), ("timeseries", vec!["--seed", "0"])];
    if electricity_present() {
        presets.push(("electricity", vec![]));
        presets.push(("electricity-t", vec![]));
    }
    if motion_present() {
        presets.push(("motion", vec![]));
    }
    let dir = tempfile::tempdir().unwrap();
    let mut names = Vec::new();
    for (name, extra) in &presets {
        let (one, two) = (dir.path().join(format!("{name}-1")), dir.path().join(format!("{name}-2")));
        for out in [&one, &two] {
            if let Err(e) = run_preset(name, out, extra) {
                return Fail(format!("{name}: {e}"));
            }
        }
        let files = compared_files(&one);
        if files.is_empty() {
            return Fail(format!("{name}: no reports written"));
        }
        for rel in &files {
            if std::fs::read(one.join(rel)).unwrap() != std::fs::read(two.join(rel)).unwrap() {
                return Fail(format!("{name}: {} differs between runs", rel.display()));
            }
        }
        names.push(format!("{name} ({} files)", files.len()));
    }
    Pass(format!("byte-identical JSON and SVG for {}", names.join(", ")))
}

/// JSON and SVG files below `root`, relative to it.
fn compared_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(path.extension().and_then(|e| e.to_str()), Some("json" | "svg")) {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn main() {
    let criteria: [(usize, &str, fn() -> Verdict); 11] = [
        (1, "ID error bound", id_bound),
        (2, "ID certificate conditions", certificate_conditions),
        (3, "identity chain", identity_chain),
        (4, "potential theory", potential_theory),
        (5, "synthetic time series", synthetic_timeseries),
        (6, "electricity loads", electricity_table),
        (7, "electricity transposed", electricity_transposed),
        (8, "motion capture", motion_table),
        (9, "pseudoinverse and factorization oracles", factorization_oracles),
        (10, "identity design reduction", trivial_design),
        (11, "preset determinism", determinism),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match result {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {n:>2} {tag} {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
