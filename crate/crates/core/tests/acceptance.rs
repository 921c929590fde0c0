//! Acceptance suite: one line per criterion on stdout, one test per criterion.
//!
//! The full default verification run is shared between criteria; the
//! determinism criterion repeats it on a single-threaded pool and compares
//! the JSON byte for byte.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Duration;

use pqc_core::verify::{CheckResult, ExperimentConfig, Status, Tolerances, VerificationReport};

const SEED: u64 = 42;

fn pinned_config() -> ExperimentConfig {
    let tolerances = Tolerances {
        trace: 1e-10,
        level_stability: 1e-9,
        rank_rel: 1e-10,
        leibniz: 1e-10,
        skew: 1e-12,
        matrix_free: 1e-10,
        fft: 1e-10,
        parseval: 1e-12,
        roundtrip: 1e-12,
        kernel: 1e-9,
        log_spread: 2.5,
        chain_slack: 1e-12,
        bmo_variation: 0.10,
        sigma_variation: 0.10,
        compact_floor: 1e-6,
        power_rel: 1e-13,
    };
    ExperimentConfig { seed: SEED, qs: vec![1.0, 2.0, 4.0], tolerances, ..ExperimentConfig::default() }
}

fn run_with_threads(threads: usize) -> VerificationReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| VerificationReport::run_all(&pinned_config()).expect("verification run"))
}

fn report() -> &'static VerificationReport {
    static REPORT: OnceLock<VerificationReport> = OnceLock::new();
    REPORT.get_or_init(|| run_with_threads(2))
}

fn checks(prefix: &str) -> Vec<&'static CheckResult> {
    let found: Vec<_> = report().checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    assert!(!found.is_empty(), "no check named {prefix}");
    found
}

fn passed(c: &CheckResult) -> bool {
    c.status == Status::Pass
}

fn runtime(cs: &[&CheckResult]) -> Duration {
    cs.iter().map(|c| c.runtime).sum()
}

fn emit(number: u8, title: &str, ok: bool, detail: String) -> bool {
    let line = format!("criterion {number:>2} {title}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    // written straight to the process stdout so the line shows even when the test passes
    let _ = std::io::stdout().write_all(line.as_bytes());
    ok
}

fn names(cs: &[&CheckResult]) -> String {
    cs.iter().map(|c| format!("{}={:?}", c.name, c.status)).collect::<Vec<_>>().join(", ")
}

#[test]
fn criterion_01_rank_formula() {
    let cs = checks("rank_formula[");
    let t = runtime(&checks("rank_"));
    let ok = cs.iter().all(|c| passed(c)) && t < Duration::from_secs(60);
    let failures: u64 = cs.iter().map(|c| c.observed["failures"].as_u64().unwrap_or(0)).sum();
    assert!(emit(
        1,
        "rank formula (|a|+3)/2",
        ok,
        format!("{} failing characters, {:.1}s; {}", failures, t.as_secs_f64(), names(&cs))
    ));
}

#[test]
fn criterion_02_trace_identity() {
    let c = checks("trace_identity")[0];
    let ok = passed(c) && c.runtime < Duration::from_secs(60);
    assert!(emit(2, "Hilbert-Schmidt identity", ok, format!("max rel error {}", c.observed["max_rel_error"])));
}

#[test]
fn criterion_03_finite_rank_stability() {
    let c = checks("finite_rank_stability")[0];
    let ok = passed(c) && c.runtime < Duration::from_secs(120);
    assert!(emit(
        3,
        "finite rank and level stability",
        ok,
        format!("max deviation {}, {:.1}s", c.observed["max_deviation"], c.runtime.as_secs_f64())
    ));
}

#[test]
fn criterion_04_operator_algebra() {
    let cs: Vec<_> = ["leibniz", "skew_adjoint", "operator_norm_bound", "hilbert_square", "matrix_free_agreement"]
        .iter()
        .flat_map(|n| checks(n))
        .collect();
    let ok = cs.iter().all(|c| passed(c)) && runtime(&cs) < Duration::from_secs(60);
    assert!(emit(4, "operator algebra invariants", ok, names(&cs)));
}

#[test]
fn criterion_05_fft() {
    let c = checks("fft")[0];
    let o = &c.observed;
    let detail = format!("fft {} parseval {} roundtrip {}", o["fft_vs_naive"], o["parseval_rel"], o["roundtrip"]);
    assert!(emit(5, "FFT correctness", passed(c), detail));
}

#[test]
fn criterion_06_hilbert_kernel() {
    let c = checks("hilbert_kernel")[0];
    let gammas: Vec<String> = c.observed["primes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| format!("p={} Γ={} ref={}", r["p"], r["calibrated_gamma"], r["reference_gamma"]))
        .collect();
    assert!(emit(
        6,
        "Hilbert kernel oracle",
        passed(c),
        format!("max error {}; {}", c.observed["max_error"], gammas.join("; "))
    ));
}

#[test]
fn criterion_07_schatten_besov() {
    let main = checks("schatten_besov")[0];
    let exact = checks("schatten_q2_exact")[0];
    let spread = main.ratio_stats.values().map(|s| s.spread).fold(0.0, f64::max);
    let ok = passed(main) && passed(exact) && main.runtime + exact.runtime < Duration::from_secs(300);
    let detail = format!(
        "max log spread {spread:.3}, ratio check {:?}, q=2 exact chain {:?} (max rel error {})",
        main.status, exact.status, exact.observed["max_rel_error"]
    );
    assert!(emit(7, "Schatten-Besov comparability", ok, detail));
}

#[test]
fn criterion_08_approximation_chain() {
    let one = checks("approximation_one_sided")[0];
    let two = checks("approximation_two_sided")[0];
    let spread = two.ratio_stats.values().map(|s| s.spread).fold(0.0, f64::max);
    let detail = format!(
        "min slack {}, two-sided max spread {spread:.3} ({:?}, informational)",
        one.observed["min_normalized_slack"], two.status
    );
    assert!(emit(8, "approximation chain", passed(one), detail));
}

#[test]
fn criterion_09_bmo_vmo_signatures() {
    let cs: Vec<_> = [
        "bmo_lc_vanishing",
        "log_norm_bmo",
        "compactness_smooth_tail",
        "compactness_log_norm_sigma1",
        "compactness_log_norm_floor",
    ]
    .iter()
    .flat_map(|n| checks(n))
    .collect();
    let ok = cs.iter().all(|c| passed(c));
    assert!(emit(9, "BMO/VMO signatures", ok, names(&cs)));
}

#[test]
fn criterion_10_determinism() {
    let single = run_with_threads(1).to_json_string();
    let shared = report().to_json_string();
    let ok = single == shared;
    assert!(emit(
        10,
        "determinism across runs and thread counts",
        ok,
        format!("{} bytes, threads 1 vs 2", shared.len())
    ));
}
