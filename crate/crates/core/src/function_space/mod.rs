//! Locally constant functions on `Z_p` and their finite Fourier series.
//!
//! A level-`n` function is stored by its values on the `p^n` cosets
//! `j + p^n Z_p`; its spectrum is stored densely by DFT bin `t`, which labels
//! the frequency `t / p^n` (see [`crate::padic::enumerate_dual`]).

pub mod builtin;
pub mod fft;
pub mod spec;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{PqcError, Result};
use crate::padic::{Prime, PruferElement};

pub use builtin::{derive_seed, random_spectrum, BuiltinFunction, RandomDist, ZeroCoset};
pub use fft::{naive_dft, FftPlan};
pub use spec::FunctionSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exponent of an `L^q` norm; `Infinity` for the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(q: f64) -> Self {
        if q.is_infinite() && q > 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(q)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl From<f64> for Exponent {
    fn from(q: f64) -> Self {
        Exponent::new(q)
    }
}

/// A function in `LC_n`: constant on every coset of `B_n = p^n Z_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantFn {
    p: Prime,
    level: u32,
    values: Vec<Complex64>,
}

impl LocallyConstantFn {
    pub fn new(p: Prime, level: u32, values: Vec<Complex64>) -> Result<Self> {
        let expected = p.check_level(level)? as usize;
        if values.len() != expected {
            return Err(PqcError::LengthMismatch { len: values.len(), expected });
        }
        Ok(LocallyConstantFn { p, level, values })
    }

    pub fn constant(p: Prime, level: u32, c: Complex64) -> Self {
        LocallyConstantFn { p, level, values: vec![c; p.dim(level)] }
    }

    pub fn from_fn(p: Prime, level: u32, f: impl FnMut(usize) -> Complex64) -> Self {
        LocallyConstantFn { p, level, values: (0..p.dim(level)).map(f).collect() }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value on the coset of the integer `x`.
    pub fn value_at(&self, x: u64) -> Complex64 {
        self.values[(x % self.values.len() as u64) as usize]
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// The same function viewed at a finer level `N ≥ n`.
    pub fn promote(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(PqcError::LevelBelowCurrent { requested: level, current: self.level });
        }
        let len = self.p.check_level(level)? as usize;
        let m = self.values.len();
        Ok(LocallyConstantFn { p: self.p, level, values: (0..len).map(|j| self.values[j % m]).collect() })
    }

    /// Smallest level at which the function is still locally constant.
    pub fn minimal_level(&self) -> u32 {
        let mut level = self.level;
        while level > 0 {
            let m = self.p.dim(level - 1);
            if self.values.iter().enumerate().any(|(j, v)| *v != self.values[j % m]) {
                break;
            }
            level -= 1;
        }
        level
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_prime(self.p, other.p)?;
        let level = self.level.max(other.level);
        let a = self.promote(level)?;
        let b = other.promote(level)?;
        Ok(LocallyConstantFn {
            p: self.p,
            level,
            values: a.values.iter().zip(&b.values).map(|(x, y)| op(*x, *y)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        LocallyConstantFn { p: self.p, level: self.level, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn conj(&self) -> Self {
        LocallyConstantFn { p: self.p, level: self.level, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// `x ↦ f(x − u)` for an integer shift `u`.
    pub fn translate(&self, u: u64) -> Self {
        let m = self.values.len();
        let u = (u % m as u64) as usize;
        LocallyConstantFn {
            p: self.p,
            level: self.level,
            values: (0..m).map(|j| self.values[(j + m - u) % m]).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Global mean `∫ f dμ`, which is also `f̂_0`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }
}

pub(crate) fn check_prime(a: Prime, b: Prime) -> Result<()> {
    if a != b {
        return Err(PqcError::PrimeMismatch { left: a.get(), right: b.get() });
    }
    Ok(())
}

/// Fourier coefficients `f̂_α` for all `|α|_p ≤ p^n`, stored by DFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    p: Prime,
    level: u32,
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn zeros(p: Prime, level: u32) -> Self {
        FourierSpectrum { p, level, coeffs: vec![ZERO; p.dim(level)] }
    }

    /// Dense coefficients in dual-enumeration order.
    pub fn from_dense(p: Prime, level: u32, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = p.check_level(level)? as usize;
        if coeffs.len() != expected {
            return Err(PqcError::LengthMismatch { len: coeffs.len(), expected });
        }
        Ok(FourierSpectrum { p, level, coeffs })
    }

    /// Builds a spectrum from `(α, c)` pairs; repeated keys accumulate.
    pub fn from_entries<I>(p: Prime, level: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PruferElement, Complex64)>,
    {
        p.check_level(level)?;
        let mut spec = Self::zeros(p, level);
        for (a, c) in entries {
            check_prime(p, a.prime())?;
            let t = a.to_index(level).ok_or(PqcError::NormExceedsLevel { norm: a.norm(), level })?;
            spec.coeffs[t] += c;
        }
        Ok(spec)
    }

    /// Single character `χ_a` at level `|a|_p`.
    pub fn character(a: PruferElement) -> Self {
        let level = a.level();
        let mut spec = Self::zeros(a.prime(), level);
        spec.coeffs[a.to_index(level).expect("own level")] = Complex64::new(1.0, 0.0);
        spec
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    #[inline]
    pub fn dense(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_dense(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `f̂_α`; zero for frequencies beyond the stored level.
    pub fn get(&self, a: &PruferElement) -> Complex64 {
        a.to_index(self.level).map_or(ZERO, |t| self.coeffs[t])
    }

    /// Nonzero coefficients in enumeration order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (PruferElement, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(move |(t, c)| (PruferElement::from_index(t, self.level, self.p), *c))
    }

    /// Largest norm level carrying a nonzero coefficient (0 if only the mean).
    pub fn support_level(&self) -> u32 {
        self.iter_nonzero().map(|(a, _)| a.level()).max().unwrap_or(0)
    }

    pub fn promote(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(PqcError::LevelBelowCurrent { requested: level, current: self.level });
        }
        let len = self.p.check_level(level)? as usize;
        let stride = self.p.dim(level - self.level);
        let mut coeffs = vec![ZERO; len];
        for (t, c) in self.coeffs.iter().enumerate() {
            coeffs[t * stride] = *c;
        }
        Ok(FourierSpectrum { p: self.p, level, coeffs })
    }

    /// `Σ_α |f̂_α|²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `χ_α` on the coset `j + B_N`: `exp(2πi m j / p^k)` for reduced `α = m/p^k`.
pub fn evaluate_character(a: &PruferElement, j: u64, level: u32) -> Result<Complex64> {
    if a.level() > level {
        return Err(PqcError::NormExceedsLevel { norm: a.norm(), level });
    }
    if a.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let modulus = a.norm();
    let e = (u128::from(a.numerator()) * u128::from(j % modulus) % u128::from(modulus)) as f64;
    let theta = TAU * e / modulus as f64;
    Ok(Complex64::new(theta.cos(), theta.sin()))
}

pub fn fourier_forward(f: &LocallyConstantFn) -> FourierSpectrum {
    let plan = FftPlan::new(f.p, f.level);
    FourierSpectrum { p: f.p, level: f.level, coeffs: plan.forward(&f.values) }
}

pub fn fourier_inverse(spec: &FourierSpectrum) -> LocallyConstantFn {
    let plan = FftPlan::new(spec.p, spec.level);
    LocallyConstantFn { p: spec.p, level: spec.level, values: plan.inverse(&spec.coeffs) }
}

/// `f ∗ Δ_k`: averages over cosets of `B_k`, returned at the level of `f`.
pub fn conditional_expectation(f: &LocallyConstantFn, k: u32) -> LocallyConstantFn {
    if k >= f.level {
        return f.clone();
    }
    let m = f.p.dim(k);
    let block = f.values.len() / m;
    let mut means = vec![ZERO; m];
    for (j, v) in f.values.iter().enumerate() {
        means[j % m] += v;
    }
    means.iter_mut().for_each(|s| *s /= block as f64);
    LocallyConstantFn { p: f.p, level: f.level, values: (0..f.values.len()).map(|j| means[j % m]).collect() }
}

/// Frequency-side `f ∗ Δ_k`: drops every coefficient of norm above `p^k`.
pub fn truncate_spectrum(spec: &FourierSpectrum, k: u32) -> FourierSpectrum {
    if k >= spec.level {
        return spec.clone();
    }
    let stride = spec.p.dim(spec.level - k);
    let coeffs = spec.coeffs.iter().enumerate().map(|(t, c)| if t % stride == 0 { *c } else { ZERO }).collect();
    FourierSpectrum { p: spec.p, level: spec.level, coeffs }
}

/// `‖f‖_q = (∫ |f|^q dμ)^{1/q}`; the sup norm for `q = ∞`.
pub fn lebesgue_norm(f: &LocallyConstantFn, q: impl Into<Exponent>) -> Result<f64> {
    match q.into() {
        Exponent::Infinity => Ok(f.sup_norm()),
        Exponent::Finite(q) if q.is_nan() || q < 1.0 => Err(PqcError::InvalidExponent(q)),
        Exponent::Finite(q) => Ok(lq_norm_unchecked(&f.values, q)),
    }
}

pub(crate) fn lq_norm_unchecked(values: &[Complex64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let n = values.len() as f64;
    if q == 2.0 {
        return (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt();
    }
    (values.iter().map(|v| v.norm().powf(q)).sum::<f64>() / n).powf(1.0 / q)
}
