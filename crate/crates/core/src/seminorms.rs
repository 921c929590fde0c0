//! Sobolev `H^{1/2}`, BMO and Besov seminorms of locally constant functions.
//!
//! Everything here is an exact finite computation: a function of level `m`
//! is constant on cosets of `p^m ℤ_p`, so all integrals are finite sums and
//! all suprema over disks are maxima over finitely many cosets.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{PqcError, Result};
use crate::function_space::{conditional_expectation, lq_norm_unchecked, Exponent, FourierSpectrum, LocallyConstantFn};

/// `(Σ_a |a|_p |f̂_a|²)^{1/2}`.
pub fn sobolev_half_norm(spec: &FourierSpectrum) -> f64 {
    spec.iter_nonzero().map(|(a, c)| a.norm() as f64 * c.norm_sqr()).sum::<f64>().sqrt()
}

/// Mean of `f` over the disk `c + p^k ℤ_p`.
pub fn disk_mean(f: &LocallyConstantFn, coset: u64, k: u32) -> Result<Complex64> {
    let p = f.prime();
    let width = p.check_level(k)?;
    if coset >= width {
        return Err(PqcError::CosetOutOfRange { coset, level: k });
    }
    if k >= f.level() {
        return Ok(f.value_at(coset));
    }
    let stride = width as usize;
    let vals = f.values();
    let count = vals.len() / stride;
    let sum: Complex64 = vals.iter().skip(coset as usize).step_by(stride).sum();
    Ok(sum / count as f64)
}

/// Largest mean absolute deviation over the disks of radius `p^{-k}`.
fn max_deviation(values: &[Complex64], stride: usize) -> f64 {
    let count = values.len() / stride;
    (0..stride)
        .map(|c| {
            let disk = || values.iter().skip(c).step_by(stride);
            let first = values[c];
            if disk().all(|v| *v == first) {
                // constant disks have deviation exactly zero
                return 0.0;
            }
            let mean: Complex64 = disk().sum::<Complex64>() / count as f64;
            disk().map(|v| (v - mean).norm()).sum::<f64>() / count as f64
        })
        .fold(0.0, f64::max)
}

/// `M_n` for `n = 0..=level`: the largest mean deviation over disks of
/// measure at most `p^{-n}`. Disks below the level of `f` contribute zero.
pub fn bmo_oscillation_sequence(f: &LocallyConstantFn) -> Vec<f64> {
    let level = f.level();
    let p = f.prime();
    let per_radius: Vec<f64> =
        (0..=level).map(|k| if k == level { 0.0 } else { max_deviation(f.values(), p.dim(k)) }).collect();
    let mut out = per_radius.clone();
    for n in (0..level as usize).rev() {
        out[n] = out[n].max(out[n + 1]);
    }
    out
}

/// `‖f‖_BMO = sup_n M_n = M_0`.
pub fn bmo_seminorm(f: &LocallyConstantFn) -> f64 {
    bmo_oscillation_sequence(f)[0]
}

fn check_besov(q: Exponent, r: Exponent, s: f64) -> Result<()> {
    let err = |reason| Err(PqcError::InvalidBesov { q: q.value(), r: r.value(), s, reason });
    if q.value().is_nan() || q.value() < 1.0 {
        return err("q must be at least 1");
    }
    if r.value().is_nan() || r.value() < 1.0 {
        return err("r must be at least 1");
    }
    if !(s.is_finite() && s > 0.0) {
        return err("s must be positive and finite");
    }
    Ok(())
}

/// `‖f − f∗Δ_n‖` for `n = 0..=level`, measured by `norm`.
fn tail_norms(f: &LocallyConstantFn, norm: impl Fn(&LocallyConstantFn) -> f64) -> Vec<f64> {
    (0..=f.level())
        .map(|n| {
            if n == f.level() {
                return 0.0;
            }
            norm(&f.sub(&conditional_expectation(f, n)).expect("same level"))
        })
        .collect()
}

fn lr_sum(terms: impl Iterator<Item = f64>, r: Exponent) -> f64 {
    match r {
        Exponent::Infinity => terms.fold(0.0, f64::max),
        Exponent::Finite(r) => terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r),
    }
}

/// `(Σ_n (p^{ns} ‖f − f∗Δ_n‖_q)^r)^{1/r}`, the supremum for `r = ∞`.
pub fn besov_seminorm_discrete(
    f: &LocallyConstantFn,
    q: impl Into<Exponent>,
    r: impl Into<Exponent>,
    s: f64,
) -> Result<f64> {
    let (q, r) = (q.into(), r.into());
    check_besov(q, r, s)?;
    let p = f.prime().get() as f64;
    let tails = tail_norms(f, |g| lq_norm_unchecked(g.values(), q.value()));
    Ok(lr_sum(tails.iter().enumerate().map(|(n, t)| p.powf(n as f64 * s) * t), r))
}

/// `(∫ (‖f(·−y) − f‖_q / |y|_p^s)^r dy/|y|_p)^{1/r}` as an exact sum over
/// the nonzero shift cosets `j + p^m ℤ_p`, `m = level(f)`.
pub fn besov_seminorm_integral(f: &LocallyConstantFn, q: f64, r: f64, s: f64) -> Result<f64> {
    check_besov(Exponent::new(q), Exponent::new(r), s)?;
    if q.is_infinite() || r.is_infinite() {
        return Err(PqcError::InvalidBesov { q, r, s, reason: "the integral form needs finite q and r" });
    }
    let p = f.prime();
    let len = f.values().len();
    let weight = 1.0 / len as f64;
    let mut total = 0.0;
    for j in 1..len {
        let v = crate::padic::valuation(j as u64, p).expect("j is nonzero") as i32;
        let shifted = f.translate(j as u64);
        let diff: Vec<Complex64> = shifted.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
        let d = lq_norm_unchecked(&diff, q);
        if d > 0.0 {
            total += weight * (p.get() as f64).powf(v as f64 * (s * r + 1.0)) * d.powf(r);
        }
    }
    Ok(total.powf(1.0 / r))
}

/// `(Σ_n (p^{n/q} ‖f − f∗Δ_n‖_BMO)^q)^{1/q}`.
pub fn besov_bmo_refined(f: &LocallyConstantFn, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 || q.is_infinite() {
        return Err(PqcError::InvalidExponent(q));
    }
    let p = f.prime().get() as f64;
    let tails = tail_norms(f, bmo_seminorm);
    Ok(lr_sum(tails.iter().enumerate().map(|(n, t)| p.powf(n as f64 / q) * t), Exponent::Finite(q)))
}

/// One `(q, r, s)` evaluation in both forms; `integral` is absent for infinite exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct BesovEntry {
    pub q: Exponent,
    pub r: Exponent,
    pub s: f64,
    pub discrete: f64,
    pub integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormReport {
    pub sobolev_half: f64,
    pub bmo: f64,
    pub vmo_sequence: Vec<f64>,
    pub besov: Vec<BesovEntry>,
}

fn exponent_json(e: Exponent) -> Value {
    match e {
        Exponent::Infinity => json!("inf"),
        Exponent::Finite(x) => json!(x),
    }
}

impl SeminormReport {
    pub fn compute(f: &LocallyConstantFn, besov: &[(Exponent, Exponent, f64)]) -> Result<Self> {
        let entries = besov
            .iter()
            .map(|&(q, r, s)| {
                let discrete = besov_seminorm_discrete(f, q, r, s)?;
                let integral = match (q, r) {
                    (Exponent::Finite(q), Exponent::Finite(r)) => Some(besov_seminorm_integral(f, q, r, s)?),
                    _ => None,
                };
                Ok(BesovEntry { q, r, s, discrete, integral })
            })
            .collect::<Result<Vec<_>>>()?;
        let vmo_sequence = bmo_oscillation_sequence(f);
        Ok(SeminormReport {
            sobolev_half: sobolev_half_norm(&crate::function_space::fourier_forward(f)),
            bmo: vmo_sequence[0],
            vmo_sequence,
            besov: entries,
        })
    }

    pub fn to_json(&self) -> Value {
        let besov: Vec<Value> = self
            .besov
            .iter()
            .map(|b| {
                json!({
                    "q": exponent_json(b.q),
                    "r": exponent_json(b.r),
                    "s": b.s,
                    "discrete": b.discrete,
                    "integral": b.integral,
                })
            })
            .collect();
        json!({
            "sobolev_half": self.sobolev_half,
            "bmo": self.bmo,
            "vmo_sequence": self.vmo_sequence,
            "besov": besov,
        })
    }
}
