//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; the process fails if any line is FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use jsr_core::bounds::{
    bracket, lower_bound_k, upper_bound_k, validate_smp, BoundsOptions, CertifyOptions, SmpCandidate, SmpValidation,
};
use jsr_core::family::{
    block_upper_assemble, scale_family, similarity_transform, transpose_family, BlockCoupler, MatrixFamily, Word,
};
use jsr_core::gallery;
use jsr_core::inclusion::{robustness_search, RobustnessOptions};
use jsr_core::io::emit_family;
use jsr_core::linalg::{
    ellipsoidal_norm_via_spectrum, operator_norm, sigma1, ComplexMatrix, EllipsoidalShape, NormKind,
};
use jsr_core::special::{try_closed_form, ClosedFormOptions, ClosedFormRule};
use jsr_core::structure::{defectivity_probe, DefectivityClass, DefectivityOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BUDGET: u64 = 10_000_000;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_s), || format!("took {elapsed:?}, limit {limit_s} s"))
}

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).unwrap()
}

fn random_real(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
    ComplexMatrix::from_real_rows(&rows).unwrap()
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_family(rng: &mut ChaCha8Rng) -> MatrixFamily {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=3);
    MatrixFamily::new("random", (0..m).map(|_| random_real(rng, n)).collect()).unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn jsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jsr")).args(args).output().expect("binary runs")
}

fn write_family(dir: &Path, name: &str, family: &MatrixFamily) -> String {
    let path = dir.join(name);
    std::fs::write(&path, emit_family(family)).unwrap();
    path.to_str().unwrap().to_string()
}

fn four_member_inequality() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut comparisons = 0u64;
    for trial in 0..200 {
        let f = random_family(&mut rng);
        let lowers: Vec<f64> = (1..=5).map(|j| lower_bound_k(&f, j, BUDGET).unwrap().0).collect();
        for norm in NormKind::standard() {
            for k in 1..=5 {
                let (up, _) = upper_bound_k(&f, k, &norm, BUDGET).unwrap();
                for (j, lo) in lowers.iter().enumerate() {
                    ensure(*lo <= up + 1e-9, || {
                        format!("family {trial}: lower_{} = {lo} > upper_{k}({}) = {up}", j + 1, norm.label())
                    })?;
                    comparisons += 1;
                }
            }
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{comparisons} comparisons in {:?}", start.elapsed()))
}

fn blondel_bracket() -> Check {
    let start = Instant::now();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    // A·B = [[2,1],[1,1]] has eigenvalues (3 ± √5)/2 and (3 + √5)/2 = φ²
    let rho_ab = (3.0 + 5f64.sqrt()) / 2.0;
    ensure((rho_ab.sqrt() - phi).abs() < 1e-15, || "oracle mismatch".into())?;
    let report = bracket(&gallery::blondel(1.0).unwrap(), &BoundsOptions { k_max: 8, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let b = report.bracket;
    ensure((b.best_lower - rho_ab.sqrt()).abs() <= 1e-9, || format!("best_lower {}", b.best_lower))?;
    ensure(b.lower_witness == Word::new(vec![0, 1]).unwrap(), || format!("witness {}", b.lower_witness.compact()))?;
    ensure(b.best_upper <= 1.10 * phi, || format!("best_upper {}", b.best_upper))?;
    within(start.elapsed(), 30)?;
    Ok(format!("lower {} upper {} witness {}", b.best_lower, b.best_upper, b.lower_witness.compact()))
}

fn special_value(dir: &Path, name: &str, family: &MatrixFamily) -> Result<f64, String> {
    let path = write_family(dir, name, family);
    let out = jsr(&["special", &path]);
    ensure(out.status.code() == Some(0), || format!("special exited {:?}", out.status.code()))?;
    let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    doc["value"].as_f64().ok_or_else(|| "no value in output".into())
}

fn pattern_instance(dir: &Path, gallery_args: &[&str], expected: f64) -> Check {
    let out = jsr(&[&["gallery"], gallery_args].concat());
    ensure(out.status.success(), || "gallery failed".into())?;
    let family = jsr_core::io::parse_family(std::str::from_utf8(&out.stdout).unwrap()).map_err(|e| e.to_string())?;
    let value = special_value(dir, &format!("{}.json", gallery_args[0]), &family)?;
    ensure((value - expected).abs() <= 1e-10, || format!("closed form {value}, expected {expected}"))?;
    let (lo2, w) = lower_bound_k(&family, 2, BUDGET).map_err(|e| e.to_string())?;
    ensure((lo2 - expected).abs() <= 1e-10, || format!("lower_bound_2 {lo2}"))?;
    Ok(format!("closed form {value}, lower_2 {lo2} at {}", w.compact()))
}

fn sign_flip_instance(dir: &Path) -> Check {
    pattern_instance(dir, &["sign-flip", "--a", "2", "--b", "1", "--c", "-1", "--d", "0"], 1.0 + 2f64.sqrt())
}

fn swap_instance(dir: &Path) -> Check {
    pattern_instance(dir, &["swap", "--a", "0", "--b", "2", "--c", "1", "--d", "0"], 2.0)
}

fn berger_wang(dir: &Path) -> Check {
    let start = Instant::now();
    let f = gallery::berger_wang(3, 1.1).unwrap();
    let lowers: Vec<f64> = (1..=4).map(|j| lower_bound_k(&f, j, BUDGET).unwrap().0).collect();
    for (j, lo) in lowers.iter().take(3).enumerate() {
        ensure(*lo < 1.0, || format!("lower_{} = {lo}", j + 1))?;
    }
    ensure(lowers[3] >= 1.0 - 1e-10, || format!("lower_4 = {}", lowers[3]))?;
    let path = write_family(dir, "bw.json", &f);
    let out = jsr(&["decide", &path]);
    ensure(out.status.code() == Some(1), || format!("decide exited {:?}", out.status.code()))?;
    let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let witness = doc["witness"].as_array().map(Vec::len);
    ensure(witness == Some(4), || format!("witness {}", doc["witness"]))?;
    within(start.elapsed(), 10)?;
    Ok(format!("lower_1..4 = {lowers:?}, witness {}", doc["witness"]))
}

fn stochastic(dir: &Path) -> Check {
    let f = gallery::stochastic_demo();
    let (lo1, _) = lower_bound_k(&f, 1, BUDGET).map_err(|e| e.to_string())?;
    ensure(lo1 == 1.0, || format!("lower_1 = {lo1}"))?;
    for k in 1..=6 {
        let (up, _) = upper_bound_k(&f, k, &NormKind::RowSum, BUDGET).map_err(|e| e.to_string())?;
        ensure(up == 1.0, || format!("upper_{k}(row) = {up}"))?;
    }
    let path = write_family(dir, "stochastic.json", &f);
    let out = jsr(&["decide", &path]);
    ensure(out.status.code() == Some(2), || format!("decide exited {:?}", out.status.code()))?;
    Ok("lower_1 = 1, upper_k(row) = 1 for k <= 6, decide exit 2".into())
}

fn ellipsoidal_norm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = rng.random_range(1..=4);
        let a = ComplexMatrix::new(random_complex(&mut rng, n)).unwrap();
        let b = random_complex(&mut rng, n);
        let p = ComplexMatrix::new(&b * b.adjoint() + DMatrix::identity(n, n) * Complex64::new(0.5, 0.0)).unwrap();
        let shape = EllipsoidalShape::new(p.clone()).map_err(|e| e.to_string())?;
        let via_factor = operator_norm(&a, &NormKind::Ellipsoidal(shape)).map_err(|e| e.to_string())?;
        let via_spectrum = ellipsoidal_norm_via_spectrum(&a, &p).map_err(|e| e.to_string())?;
        let gap = (via_factor - via_spectrum).abs();
        ensure(gap <= 1e-8 * (1.0 + via_factor), || format!("pair {trial}: {via_factor} vs {via_spectrum}"))?;
        worst = worst.max(gap / (1.0 + via_factor));
        let identity = operator_norm(&a, &NormKind::Ellipsoidal(EllipsoidalShape::identity(n))).unwrap();
        let spectral = operator_norm(&a, &NormKind::Spectral).unwrap();
        ensure((identity - spectral).abs() <= 1e-10, || format!("pair {trial}: P=I gives {identity}, spectral {spectral}"))?;
    }
    Ok(format!("worst relative gap {worst:.2e}"))
}

fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    loop {
        let m = DMatrix::identity(n, n) * Complex64::new(1.0, 0.0) + random_complex(rng, n) * Complex64::new(0.3, 0.0);
        let sv = m.singular_values();
        if sv.max() / sv.min() < 10.0 {
            return ComplexMatrix::new(m).unwrap();
        }
    }
}

fn invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let f = random_family(&mut rng);
        let alpha = rng.random_range(0.2..3.0);
        let scaled = scale_family(&f, Complex64::new(0.0, alpha));
        let similar = similarity_transform(&f, &well_conditioned(&mut rng, f.dim())).map_err(|e| e.to_string())?;
        let transposed = transpose_family(&f);
        for k in 1..=4 {
            let (base, _) = lower_bound_k(&f, k, BUDGET).unwrap();
            let checks = [
                ("scaling", alpha * base, lower_bound_k(&scaled, k, BUDGET).unwrap().0),
                ("similarity", base, lower_bound_k(&similar, k, BUDGET).unwrap().0),
                ("transpose", base, lower_bound_k(&transposed, k, BUDGET).unwrap().0),
            ];
            for (what, expected, got) in checks {
                // values near zero carry no relative information
                if expected.max(got) < 1e-12 {
                    continue;
                }
                ensure(rel_close(expected, got, 1e-8), || format!("family {trial}, k={k}, {what}: {expected} vs {got}"))?;
            }
        }
    }
    Ok("50 families, k <= 4, scaling/similarity/transpose".into())
}

fn conjugate_pair_certificate() -> Check {
    let f = gallery::nilpotent_conjugate_pair();
    let candidate =
        SmpCandidate { word: Word::new(vec![0, 1]).unwrap(), value: 2.0, minimal: true, certified: false, certificate: None };
    let s1 = sigma1(f.member(0)).map_err(|e| e.to_string())?;
    ensure((s1 - 2.0).abs() < 1e-12, || format!("sigma1 {s1}"))?;
    match validate_smp(&f, &candidate, &CertifyOptions::default()).map_err(|e| e.to_string())? {
        SmpValidation::Certified(shape) => {
            let dev = shape.p().max_abs_diff(&ComplexMatrix::identity(2));
            ensure(dev < 1e-12, || format!("certificate is not the identity (deviation {dev})"))?;
            Ok(format!("Certified with P=I at value {s1}"))
        }
        SmpValidation::NotCertified(r) => Err(format!("not certified, best ratio {}", r.best_ratio)),
    }
}

fn robustness() -> Check {
    let start = Instant::now();
    let sys = gallery::swap_system();
    let r = robustness_search(&sys, &RobustnessOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.alpha_star_lo <= 0.5 && 0.5 <= r.alpha_star_hi, || format!("[{}, {}]", r.alpha_star_lo, r.alpha_star_hi))?;
    ensure(r.alpha_star_hi - r.alpha_star_lo <= 0.02, || format!("width {}", r.alpha_star_hi - r.alpha_star_lo))?;
    for p in r.probes.iter().filter(|p| p.alpha < r.alpha_star_lo) {
        ensure(p.is_stable(), || format!("alpha {} below the interval is {}", p.alpha, p.verdict.label()))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("[{}, {}] after {} probes", r.alpha_star_lo, r.alpha_star_hi, r.probes.len()))
}

fn block_triangular() -> Check {
    let upper = gallery::blondel(1.0).unwrap();
    let lower = gallery::stochastic_demo();
    let couplers = [BlockCoupler {
        row: 0,
        col: 1,
        blocks: vec![DMatrix::from_element(2, 2, Complex64::new(0.25, 0.0)), DMatrix::identity(2, 2)],
    }];
    let big = block_upper_assemble(&[upper.clone(), lower.clone()], &couplers).map_err(|e| e.to_string())?;
    let cf = try_closed_form(&big, &ClosedFormOptions::default()).map_err(|e| e.to_string())?.ok_or("no rule")?;
    ensure(cf.rule == ClosedFormRule::BlockTriangular, || format!("rule {}", cf.rule))?;
    let opts = BoundsOptions { k_max: 8, ..Default::default() };
    let bu = bracket(&upper, &opts).map_err(|e| e.to_string())?.bracket;
    let bl = bracket(&lower, &opts).map_err(|e| e.to_string())?.bracket;
    let lo = bu.best_lower.max(bl.best_lower);
    let hi = bu.best_upper.max(bl.best_upper);
    ensure((cf.value - lo).abs() <= 1e-6 && (cf.value - hi).abs() <= 1e-6, || {
        format!("closed form {} vs component brackets [{lo}, {hi}]", cf.value)
    })?;
    Ok(format!("closed form {} vs component brackets [{lo}, {hi}]", cf.value))
}

fn defectivity() -> Check {
    let opts = DefectivityOptions::default();
    let jordan = MatrixFamily::new("jordan", vec![real(&[&[1.0, 1.0], &[0.0, 1.0]])]).unwrap();
    let grow = defectivity_probe(&jordan, 1.0, &opts).map_err(|e| e.to_string())?;
    let slope = match grow.classification {
        DefectivityClass::GrowthEvidence { slope } => slope,
        other => return Err(format!("Jordan block classified {other:?}")),
    };
    ensure((0.8..=1.2).contains(&slope), || format!("slope {slope}"))?;
    let diag = MatrixFamily::new("diag", vec![real(&[&[1.0, 0.0], &[0.0, 0.5]])]).unwrap();
    let bounded = defectivity_probe(&diag, 1.0, &opts).map_err(|e| e.to_string())?;
    ensure(bounded.classification == DefectivityClass::BoundedEvidence, || {
        format!("diagonal classified {:?}", bounded.classification)
    })?;
    Ok(format!("Jordan slope {slope:.4}, diagonal bounded"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir = dir.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("four-member inequality", Box::new(four_member_inequality)),
        ("Blondel pair bracket", Box::new(blondel_bracket)),
        ("sign-flip closed form", Box::new(|| sign_flip_instance(dir))),
        ("swap closed form", Box::new(|| swap_instance(dir))),
        ("Berger-Wang decision", Box::new(|| berger_wang(dir))),
        ("stochastic boundary", Box::new(|| stochastic(dir))),
        ("ellipsoidal norm", Box::new(ellipsoidal_norm)),
        ("invariance suite", Box::new(invariance)),
        ("conjugate pair certificate", Box::new(conjugate_pair_certificate)),
        ("robustness radius", Box::new(robustness)),
        ("block-triangular consistency", Box::new(block_triangular)),
        ("defectivity probes", Box::new(defectivity)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
