//! Statements with unknown constants or infinite-dimensional content,
//! tested through finite-level signatures and log-ratio statistics.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::exact::{dense_df, random_lc};
use super::stats::{median, monotone_drift, RatioStats};
use super::{CheckKind, CheckResult, ExperimentConfig, Status};
use crate::error::{PqcError, Result};
use crate::function_space::{
    conditional_expectation, derive_seed, fourier_forward, fourier_inverse, random_spectrum, BuiltinFunction,
    FourierSpectrum, LocallyConstantFn, RandomDist, ZeroCoset,
};
use crate::operators::{
    calibrate_gamma, derivative_matrix, hilbert_apply, hilbert_kernel_apply, reference_gamma, DerivativeApplier,
    KernelReading, DENSE_CAP,
};
use crate::padic::{enumerate_dual, legendre_symbol, Prime, PruferElement};
use crate::seminorms::{besov_seminorm_discrete, bmo_oscillation_sequence, bmo_seminorm, sobolev_half_norm};
use crate::spectral::{power_iteration, singular_values};

const TAG_BESOV: u64 = 11;
const TAG_CHAIN: u64 = 12;
const TAG_BMO: u64 = 13;
const TAG_SMOOTH: u64 = 14;
const TAG_POWER: u64 = 15;

/// Power-iteration budget for `σ₁` above the dense cap.
const POWER_ITERS: usize = 5000;

fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// Calibrates Γ on `χ_{1/p}` and compares the kernel form of `S` with the
/// spectral one on every character of norm at most `p²`.
pub fn check_hilbert_kernel_agreement(config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    let tol = config.tolerances.kernel;
    let level = 2;
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for cell in &config.grid {
        let p = cell.p;
        let probe = PruferElement::reduce(1, 1, p);
        let gamma = calibrate_gamma(p, level, probe, KernelReading::SignOverNorm)?;
        let errors = enumerate_dual(p, level)
            .par_iter()
            .map(|a| {
                let spec = FourierSpectrum::character(*a);
                let kernel = fourier_forward(&hilbert_kernel_apply(
                    &fourier_inverse(&spec),
                    level,
                    gamma,
                    KernelReading::SignOverNorm,
                )?);
                let spectral = hilbert_apply(&spec.promote(level)?);
                Ok(kernel.dense().iter().zip(spectral.dense()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?;
        let err = errors.iter().copied().fold(0.0, f64::max);
        worst = worst.max(err);
        let reference = reference_gamma(p);
        let literal = match calibrate_gamma(p, level, probe, KernelReading::LiteralSine) {
            Err(PqcError::DegenerateKernel(_)) => "vanishing kernel".to_string(),
            Ok(g) => format!("calibrated to {g}"),
            Err(e) => return Err(e),
        };
        rows.push(json!({
            "p": p.get(),
            "characters": errors.len(),
            "max_error": err,
            "calibrated_gamma": complex_json(gamma),
            "reference_gamma": complex_json(reference),
            "calibrated_over_reference": complex_json(gamma / reference),
            "predicted_ratio": legendre_symbol(-1, p).to_f64() / p.get() as f64,
            "literal_sine_reading": literal,
        }));
    }
    Ok(vec![CheckResult::new("hilbert_kernel", CheckKind::Informational, Status::from_bool(worst <= tol))
        .tolerance(json!({ "abs": tol, "after": "single-probe Γ calibration" }))
        .expected(json!(
            "Γ⁻¹ p.v.∫ sgn(x−y)|x−y|_p⁻¹ f(y) dy = Sf; reference Γ = √p (p ≡ 1 mod 4) or i√p (p ≡ 3 mod 4)"
        ))
        .observed(json!({ "max_error": worst, "primes": rows }))
        .note("calibrated Γ = (−1|p)·G/p with G the quadratic Gauss sum")])
}

/// `‖df‖_{S^q} / ‖f‖_{B^{1/q}_{q,q}}` over random-spectrum ensembles.
pub fn check_schatten_besov(config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    let tol = &config.tolerances;
    let qs = &config.qs;
    let mut verdict = true;
    let mut cells = Vec::new();
    let mut stats = BTreeMap::new();
    let mut q2_worst = 0.0f64;
    let mut q2_ok_cells = Vec::new();
    for cell in &config.grid {
        let p = cell.p;
        // logs[qi][level-1] collects ln ρ over all γ and trials
        let mut logs: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); cell.max_level as usize]; qs.len()];
        for level in 1..=cell.max_level {
            let mut level_q2 = 0.0f64;
            for (gi, &gamma) in config.gammas.iter().enumerate() {
                let rows = (0..config.ensemble)
                    .into_par_iter()
                    .map(|t| {
                        let seed = derive_seed(config.seed, &[TAG_BESOV, p.get(), level as u64, gi as u64, t as u64]);
                        let spec = random_spectrum(p, level, seed, gamma);
                        let f = fourier_inverse(&spec);
                        let s = singular_values(&derivative_matrix(&spec, level)?)?;
                        let ratios = qs
                            .iter()
                            .map(|&q| Ok(s.schatten_norm(q)? / besov_seminorm_discrete(&f, q, q, 1.0 / q)?))
                            .collect::<Result<Vec<f64>>>()?;
                        let s2 = s.schatten_norm(2.0)?;
                        let sob = std::f64::consts::SQRT_2 * sobolev_half_norm(&spec);
                        Ok((ratios, (s2 - sob).abs() / s2.max(f64::MIN_POSITIVE)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (ratios, q2) in rows {
                    level_q2 = level_q2.max(q2);
                    for (qi, r) in ratios.iter().enumerate() {
                        if *r > 0.0 && r.is_finite() {
                            logs[qi][level as usize - 1].push(r.ln());
                        }
                    }
                }
            }
            q2_worst = q2_worst.max(level_q2);
            q2_ok_cells.push(json!({ "p": p.get(), "level": level, "max_rel_error": level_q2 }));
        }
        for (qi, &q) in qs.iter().enumerate() {
            let all: Vec<f64> = logs[qi].iter().flatten().copied().collect();
            let Some(st) = RatioStats::from_logs(all) else { continue };
            let medians: Vec<f64> = logs[qi].iter().map(|v| median(v)).collect();
            let drift = monotone_drift(&medians);
            let ok = st.spread <= tol.log_spread && drift != Some(true);
            verdict &= ok;
            stats.insert(format!("p={},q={}", p.get(), q), st);
            cells.push(json!({
                "p": p.get(),
                "q": q,
                "log_spread": st.spread,
                "median_ratio_by_level": medians.iter().map(|m| m.exp()).collect::<Vec<_>>(),
                "drift": match drift { None => json!("not assessable (< 3 levels)"), Some(d) => json!(d) },
                "pass": ok,
            }));
        }
    }
    let mut main = CheckResult::new("schatten_besov", CheckKind::Informational, Status::from_bool(verdict))
        .tolerance(json!({ "log_spread": tol.log_spread, "drift": "strictly monotone medians over ≥ 3 levels with last step > max(0.05, first step / 2)" }))
        .expected(json!("‖df‖_{S^q} ≍ ‖f‖_{B^{1/q}_{q,q}} with bounded ratio"))
        .observed(json!({ "cells": cells, "gammas": config.gammas }));
    main.ratio_stats = stats;
    let q2_ok = q2_worst <= config.tolerances.trace;
    let q2 = CheckResult::new("schatten_q2_exact", CheckKind::Hard, Status::from_bool(q2_ok))
        .tolerance(json!({ "rel": config.tolerances.trace }))
        .expected(json!("‖df‖_{S²} = √2‖f‖_{1/2}"))
        .observed(json!({ "max_rel_error": q2_worst, "cells": q2_ok_cells }));
    let q2 =
        if q2_ok { q2 } else { q2.note("same defect as trace_identity: exact only for spectra on the first shell") };
    Ok(vec![main, q2])
}

/// `s_{p^n}(df) ≤ ‖d(f − f∗Δ_n)‖`, and its comparability with `‖f − f∗Δ_n‖_BMO`.
pub fn check_approximation_chain(config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    let tol = &config.tolerances;
    let mut one_sided_ok = true;
    let mut min_slack = f64::INFINITY;
    let mut stats = BTreeMap::new();
    let mut two_sided_ok = true;
    for cell in &config.grid {
        let (p, m) = (cell.p, cell.max_level);
        let rows = (0..config.ensemble)
            .into_par_iter()
            .map(|t| {
                let f = random_lc(p, m, config.seed, &[TAG_CHAIN, p.get(), m as u64, t as u64], RandomDist::Disk);
                let s = singular_values(&dense_df(&f, m)?)?;
                let scale = s.sigma_max().max(1.0);
                (0..m)
                    .map(|n| {
                        let tail = f.sub(&conditional_expectation(&f, n))?;
                        let op = singular_values(&dense_df(&tail, m)?)?.sigma_max();
                        let sn = s.approximation_number(p.dim(n));
                        Ok((sn, op, bmo_seminorm(&tail), (op - sn) / scale))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let flat: Vec<_> = rows.iter().flatten().collect();
        for r in &flat {
            min_slack = min_slack.min(r.3);
        }
        one_sided_ok &= flat.iter().all(|r| r.3 >= -tol.chain_slack);
        if let Some(st) = RatioStats::from_ratios(flat.iter().map(|r| r.0 / r.1)) {
            two_sided_ok &= st.spread <= tol.log_spread;
            stats.insert(format!("p={},s/‖d(f−f∗Δ)‖", p.get()), st);
        }
        if let Some(st) = RatioStats::from_ratios(flat.iter().map(|r| r.0 / r.2)) {
            two_sided_ok &= st.spread <= tol.log_spread;
            stats.insert(format!("p={},s/BMO", p.get()), st);
        }
    }
    // log_norm: the tails keep a fixed BMO size (not in VMO)
    let mut log_rows = Vec::new();
    for cell in &config.grid {
        let level = config.log_norm_levels;
        let f = BuiltinFunction::LogNorm(ZeroCoset::DiskMean).realize(cell.p, level)?;
        let seq: Vec<f64> =
            (0..level).map(|n| bmo_seminorm(&f.sub(&conditional_expectation(&f, n)).expect("same level"))).collect();
        log_rows.push(json!({ "p": cell.p.get(), "level": level, "tail_bmo": seq }));
    }
    let mut two =
        CheckResult::new("approximation_two_sided", CheckKind::Informational, Status::from_bool(two_sided_ok))
            .tolerance(json!({ "log_spread": tol.log_spread }))
            .expected(json!("s_{p^n}(df) ≍ ‖d(f − f∗Δ_n)‖ ≍ ‖f − f∗Δ_n‖_BMO"))
            .observed(json!({ "log_norm_tails": log_rows }));
    two.ratio_stats = stats;
    Ok(vec![
        CheckResult::new("approximation_one_sided", CheckKind::Hard, Status::from_bool(one_sided_ok))
            .tolerance(json!({ "slack": tol.chain_slack, "relative_to": "max(1, σ₁(df))" }))
            .expected(json!("s_{p^n}(df) ≤ ‖d(f − f∗Δ_n)‖"))
            .observed(json!({ "min_normalized_slack": min_slack })),
        two,
    ])
}

fn log_norm(p: Prime, level: u32) -> Result<LocallyConstantFn> {
    BuiltinFunction::LogNorm(ZeroCoset::DiskMean).realize(p, level)
}

/// `M_n = 0` beyond the level of an LC function; bounded BMO and linearly
/// growing sup norm for `log|x|_p` truncations.
pub fn check_bmo_signatures(config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    let tol = &config.tolerances;
    let trials = (config.ensemble / 10).max(1);
    let mut lc_ok = true;
    let mut checked = 0usize;
    for cell in &config.grid {
        for level in 1..=cell.max_level {
            let ok = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let f = random_lc(
                        cell.p,
                        level,
                        config.seed,
                        &[TAG_BMO, cell.p.get(), level as u64, t as u64],
                        RandomDist::Disk,
                    );
                    let seq = bmo_oscillation_sequence(&f.promote(level + 1).expect("level fits"));
                    seq[level as usize..].iter().all(|&m| m == 0.0) && seq.windows(2).all(|w| w[0] >= w[1])
                })
                .collect::<Vec<bool>>();
            checked += ok.len();
            lc_ok &= ok.iter().all(|&b| b);
        }
    }
    let mut log_ok = true;
    let mut rows = Vec::new();
    for cell in &config.grid {
        let mut bmo = Vec::new();
        let mut sup = Vec::new();
        for level in 1..=config.log_norm_levels {
            let f = log_norm(cell.p, level)?;
            bmo.push(bmo_seminorm(&f));
            sup.push(f.sup_norm());
        }
        let (lo, hi) = bmo.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &b| (l.min(b), h.max(b)));
        let variation = (hi - lo) / hi;
        let steps: Vec<f64> = sup.windows(2).map(|w| w[1] - w[0]).collect();
        let linear = steps.iter().all(|s| (s - 1.0).abs() <= 1e-12);
        let ok = variation <= tol.bmo_variation && linear;
        log_ok &= ok;
        rows.push(json!({
            "p": cell.p.get(),
            "bmo": bmo,
            "bmo_variation": variation,
            "sup_norm": sup,
            "sup_increments": steps,
            "pass": ok,
        }));
    }
    Ok(vec![
        CheckResult::new("bmo_lc_vanishing", CheckKind::Hard, Status::from_bool(lc_ok))
            .tolerance(json!("exact zero"))
            .expected(json!("M_n = 0 for n ≥ level(f); M_n nonincreasing"))
            .observed(json!({ "functions": checked })),
        CheckResult::new("log_norm_bmo", CheckKind::Informational, Status::from_bool(log_ok))
            .tolerance(json!({ "bmo_variation": tol.bmo_variation, "sup_increment": "1 ± 1e-12" }))
            .expected(json!("‖f_N‖_BMO bounded in N while ‖f_N‖_∞ grows linearly"))
            .observed(json!({ "levels": config.log_norm_levels, "primes": rows })),
    ])
}

fn dense_levels(p: Prime, cap: usize) -> Vec<u32> {
    (1..).take_while(|&n| p.checked_pow(n).is_some_and(|d| d as usize <= cap)).collect()
}

/// Smooth versus `log|x|_p` behaviour of tail singular values across levels.
pub fn check_compactness_proxy(config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    let tol = &config.tolerances;
    let mut smooth_ok = true;
    let mut smooth_rows = Vec::new();
    let mut sigma_ok = true;
    let mut sigma_rows = Vec::new();
    let mut floor_ok = true;
    let mut last_ok = true;
    let mut floor_rows = Vec::new();
    for cell in &config.grid {
        let p = cell.p;
        let levels = dense_levels(p, config.sweep_dim_cap);
        let medians = levels
            .iter()
            .map(|&level| {
                let idx = p.dim(level).div_ceil(2);
                let tails = (0..config.smooth_ensemble)
                    .into_par_iter()
                    .map(|t| {
                        let seed = derive_seed(config.seed, &[TAG_SMOOTH, p.get(), level as u64, t as u64]);
                        let spec = random_spectrum(p, level, seed, 2.0);
                        Ok(singular_values(&derivative_matrix(&spec, level)?)?.approximation_number(idx))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(median(&tails))
            })
            .collect::<Result<Vec<f64>>>()?;
        let decreasing = levels.len() >= 3 && medians.windows(2).all(|w| w[1] < w[0]);
        smooth_ok &= decreasing;
        smooth_rows
            .push(json!({ "p": p.get(), "levels": levels, "median_tail": medians, "strictly_decreasing": decreasing }));

        // log_norm: σ₁ by dense SVD within the cap, power iteration above it
        let mut sigma = Vec::new();
        let mut methods = Vec::new();
        for level in 1..=config.log_norm_levels {
            let f = log_norm(p, level)?;
            if p.dim(level) <= DENSE_CAP {
                sigma.push(singular_values(&dense_df(&f, level)?)?.sigma_max());
                methods.push(json!("dense"));
            } else {
                let applier = DerivativeApplier::new(&f, level)?;
                let seed = derive_seed(config.seed, &[TAG_POWER, p.get(), level as u64]);
                let est = power_iteration(&applier, POWER_ITERS, seed, tol.power_rel)?;
                sigma.push(est.sigma);
                methods.push(json!({ "power_iterations": est.iterations, "converged": est.converged }));
            }
        }
        let n = sigma.len();
        let variation = if n >= 2 { (sigma[n - 1] - sigma[n - 2]).abs() / sigma[n - 1] } else { f64::NAN };
        let ok = n >= 3 && variation <= tol.sigma_variation;
        sigma_ok &= ok;
        sigma_rows.push(
            json!({ "p": p.get(), "sigma_1": sigma, "method": methods, "last_step_variation": variation, "pass": ok }),
        );

        let mut literal = Vec::new();
        let mut last_nonzero = Vec::new();
        let mut ranks = Vec::new();
        for &level in &levels {
            let s = singular_values(&dense_df(&log_norm(p, level)?, level)?)?;
            let rank = s.numerical_rank(tol.rank_rel * p.dim(level) as f64);
            literal.push(s.approximation_number(p.dim(level).div_ceil(2)));
            last_nonzero.push(if rank > 0 { s.approximation_number(rank - 1) } else { 0.0 });
            ranks.push(rank);
        }
        let lit_ok = levels.len() >= 3 && literal.iter().all(|&v| v >= tol.compact_floor);
        let last = levels.len() >= 3 && last_nonzero.iter().all(|&v| v >= tol.compact_floor);
        floor_ok &= lit_ok;
        last_ok &= last;
        floor_rows.push(json!({
            "p": p.get(),
            "levels": levels,
            "tail_sigma": literal,
            "rank": ranks,
            "smallest_nonzero_sigma": last_nonzero,
        }));
    }
    let floor = CheckResult::new("compactness_log_norm_floor", CheckKind::Informational, Status::from_bool(floor_ok))
        .tolerance(json!({ "floor": tol.compact_floor }))
        .expected(json!("s_{⌈p^N/2⌉}(d log|x|_p truncated at N) ≥ floor at every level"))
        .observed(json!({ "primes": floor_rows }));
    let floor = if floor_ok {
        floor
    } else {
        floor.note("the level-N truncation is radial and d of it has rank 2N, so the tail index lies beyond the rank")
    };
    Ok(vec![
        CheckResult::new("compactness_smooth_tail", CheckKind::Informational, Status::from_bool(smooth_ok))
            .tolerance(json!("strict decrease over ≥ 3 consecutive levels"))
            .expected(json!("median s_{⌈p^N/2⌉}(df) decreases in N for γ = 2 random spectra"))
            .observed(json!({ "primes": smooth_rows })),
        CheckResult::new("compactness_log_norm_sigma1", CheckKind::Informational, Status::from_bool(sigma_ok))
            .tolerance(json!({ "last_step_variation": tol.sigma_variation, "power_rel": tol.power_rel }))
            .expected(json!("σ₁(d log|x|_p truncated at N) stays bounded"))
            .observed(json!({ "levels": config.log_norm_levels, "primes": sigma_rows })),
        floor,
        CheckResult::new("compactness_log_norm_smallest_nonzero", CheckKind::Informational, Status::from_bool(last_ok))
            .tolerance(json!({ "floor": tol.compact_floor }))
            .expected(json!("the smallest nonzero singular value of d log|x|_p stays above the floor"))
            .observed(json!("see compactness_log_norm_floor"))
            .note("substitute non-compactness signature on the rank-2N range"),
    ])
}

#[cfg(test)]
mod tests {
    use super::super::GridCell;
    use super::*;

    fn small() -> ExperimentConfig {
        let p = |n| Prime::new(n).unwrap();
        ExperimentConfig {
            grid: vec![GridCell { p: p(3), max_level: 3 }, GridCell { p: p(5), max_level: 1 }],
            ensemble: 6,
            stability_ensemble: 2,
            smooth_ensemble: 3,
            sweep_dim_cap: 125,
            log_norm_levels: 4,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn kernel_check_passes() {
        let out = check_hilbert_kernel_agreement(&small()).unwrap();
        assert_eq!(out[0].status, Status::Pass, "{}", out[0].observed);
    }

    #[test]
    fn small_asymptotic_suite() {
        let c = small();
        let sb = check_schatten_besov(&c).unwrap();
        assert_eq!(sb[0].status, Status::Pass, "{}", sb[0].observed);
        assert_eq!(sb[1].status, Status::Fail);
        let chain = check_approximation_chain(&c).unwrap();
        assert_eq!(chain[0].status, Status::Pass, "{}", chain[0].observed);
        let bmo = check_bmo_signatures(&c).unwrap();
        assert_eq!(bmo[0].status, Status::Pass);
        assert_eq!(bmo[1].status, Status::Pass, "{}", bmo[1].observed);
        let comp = check_compactness_proxy(&c).unwrap();
        let status: Vec<_> = comp.iter().map(|r| r.status).collect();
        assert_eq!(status[2], Status::Fail);
        assert_eq!(status[3], Status::Pass, "{}", comp[2].observed);
    }
}
