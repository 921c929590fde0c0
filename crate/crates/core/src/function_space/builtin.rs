//! Test-function families used by the CLI and the verification suites.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Map, Value};

use super::{fourier_inverse, FourierSpectrum, LocallyConstantFn};
use crate::error::{PqcError, Result};
use crate::padic::{valuation, Prime, PruferElement};

/// Value assigned to `log|x|_p` on the coset containing 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroCoset {
    /// Mean of `log_p|x|_p` over `B_n`, `-(n + 1/(p-1))`. The level-n function
    /// is then exactly the conditional expectation of the unbounded one.
    #[default]
    DiskMean,
    /// `-n`, the value at the coarsest point of the zero coset.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RandomDist {
    /// i.i.d. uniform on the closed complex unit disk.
    #[default]
    Disk,
    /// i.i.d. uniform on `[-1, 1]`, real-valued.
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinFunction {
    Constant(Complex64),
    Character(PruferElement),
    /// Indicator of the disk `coset + p^radius_level Z_p`.
    Indicator {
        coset: u64,
        radius_level: u32,
    },
    /// `log_p |x|_p = -ord_p(x)`.
    LogNorm(ZeroCoset),
    RandomValues {
        seed: u64,
        dist: RandomDist,
    },
    /// `f̂_a = |a|_p^{-γ} · z_a` with `z_a` standard complex Gaussian, `f̂_0 = 0`.
    RandomSpectrum {
        seed: u64,
        gamma: f64,
    },
}

impl BuiltinFunction {
    pub fn kind(&self) -> &'static str {
        match self {
            BuiltinFunction::Constant(_) => "constant",
            BuiltinFunction::Character(_) => "character",
            BuiltinFunction::Indicator { .. } => "indicator",
            BuiltinFunction::LogNorm(_) => "log_norm",
            BuiltinFunction::RandomValues { .. } => "random_values",
            BuiltinFunction::RandomSpectrum { .. } => "random_spectrum",
        }
    }

    pub fn realize(&self, p: Prime, level: u32) -> Result<LocallyConstantFn> {
        p.check_level(level)?;
        match self {
            BuiltinFunction::Constant(c) => Ok(LocallyConstantFn::constant(p, level, *c)),
            BuiltinFunction::Character(a) => {
                if a.prime() != p {
                    return Err(PqcError::PrimeMismatch { left: p.get(), right: a.prime().get() });
                }
                if a.level() > level {
                    return Err(PqcError::NormExceedsLevel { norm: a.norm(), level });
                }
                fourier_inverse(&FourierSpectrum::character(*a)).promote(level)
            }
            BuiltinFunction::Indicator { coset, radius_level } => {
                if *radius_level > level {
                    return Err(PqcError::LevelBelowCurrent { requested: level, current: *radius_level });
                }
                let m = p.pow(*radius_level);
                if *coset >= m {
                    return Err(PqcError::CosetOutOfRange { coset: *coset, level: *radius_level });
                }
                Ok(LocallyConstantFn::from_fn(p, level, |j| {
                    Complex64::new(if j as u64 % m == *coset { 1.0 } else { 0.0 }, 0.0)
                }))
            }
            BuiltinFunction::LogNorm(zero) => {
                let at_zero = match zero {
                    ZeroCoset::Level => -f64::from(level),
                    ZeroCoset::DiskMean => -(f64::from(level) + 1.0 / (p.get() - 1) as f64),
                };
                Ok(LocallyConstantFn::from_fn(p, level, |j| {
                    let v = match valuation(j as u64, p) {
                        None => at_zero,
                        Some(ord) => -f64::from(ord),
                    };
                    Complex64::new(v, 0.0)
                }))
            }
            BuiltinFunction::RandomValues { seed, dist } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(LocallyConstantFn::from_fn(p, level, |_| match dist {
                    RandomDist::Disk => {
                        let r: f64 = rng.random::<f64>().sqrt();
                        let theta = std::f64::consts::TAU * rng.random::<f64>();
                        Complex64::from_polar(r, theta)
                    }
                    RandomDist::Real => Complex64::new(rng.random_range(-1.0..=1.0), 0.0),
                }))
            }
            BuiltinFunction::RandomSpectrum { seed, gamma } => {
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    return Err(PqcError::InvalidSpec(format!("decay exponent {gamma} must be >= 0")));
                }
                Ok(fourier_inverse(&random_spectrum(p, level, *seed, *gamma)))
            }
        }
    }

    /// Parses a kind name with a JSON parameter object.
    pub fn from_kind_params(kind: &str, params: &Map<String, Value>, p: Prime) -> Result<Self> {
        let bad = |msg: &str| PqcError::InvalidSpec(format!("{kind}: {msg}"));
        let get_u64 = |key: &str, default: Option<u64>| -> Result<u64> {
            match params.get(key) {
                Some(v) => v.as_u64().ok_or_else(|| bad(&format!("{key} must be a non-negative integer"))),
                None => default.ok_or_else(|| bad(&format!("missing {key}"))),
            }
        };
        match kind {
            "constant" => {
                let c = match params.get("c") {
                    None => Complex64::new(1.0, 0.0),
                    Some(v) => super::spec::parse_complex(v).map_err(|_| bad("c must be [re, im]"))?,
                };
                Ok(BuiltinFunction::Constant(c))
            }
            "character" => {
                let a = params.get("a").and_then(Value::as_str).ok_or_else(|| bad("missing a"))?;
                Ok(BuiltinFunction::Character(PruferElement::parse(a, p)?))
            }
            "indicator" => {
                let radius_level = get_u64("radius_level", None)?;
                let radius_level = u32::try_from(radius_level).map_err(|_| bad("radius_level too large"))?;
                Ok(BuiltinFunction::Indicator { coset: get_u64("coset", Some(0))?, radius_level })
            }
            "log_norm" => {
                let zero = match params.get("zero_coset").and_then(Value::as_str) {
                    None | Some("disk_mean") => ZeroCoset::DiskMean,
                    Some("level") => ZeroCoset::Level,
                    Some(_) => return Err(bad("zero_coset must be disk_mean or level")),
                };
                Ok(BuiltinFunction::LogNorm(zero))
            }
            "random_values" => {
                let dist = match params.get("dist").and_then(Value::as_str) {
                    None | Some("disk") => RandomDist::Disk,
                    Some("real") => RandomDist::Real,
                    Some(_) => return Err(bad("dist must be disk or real")),
                };
                Ok(BuiltinFunction::RandomValues { seed: get_u64("seed", Some(0))?, dist })
            }
            "random_spectrum" => {
                let gamma = match params.get("gamma") {
                    None => 1.0,
                    Some(v) => v.as_f64().ok_or_else(|| bad("gamma must be a number"))?,
                };
                Ok(BuiltinFunction::RandomSpectrum { seed: get_u64("seed", Some(0))?, gamma })
            }
            other => Err(PqcError::UnknownBuiltin(other.to_string())),
        }
    }

    pub fn params_json(&self) -> Value {
        match self {
            BuiltinFunction::Constant(c) => json!({ "c": [c.re, c.im] }),
            BuiltinFunction::Character(a) => json!({ "a": a.to_string() }),
            BuiltinFunction::Indicator { coset, radius_level } => {
                json!({ "coset": coset, "radius_level": radius_level })
            }
            BuiltinFunction::LogNorm(zero) => json!({
                "zero_coset": match zero { ZeroCoset::DiskMean => "disk_mean", ZeroCoset::Level => "level" }
            }),
            BuiltinFunction::RandomValues { seed, dist } => json!({
                "seed": seed,
                "dist": match dist { RandomDist::Disk => "disk", RandomDist::Real => "real" }
            }),
            BuiltinFunction::RandomSpectrum { seed, gamma } => json!({ "seed": seed, "gamma": gamma }),
        }
    }
}

/// Spectrum of the `random_spectrum` family directly, without an FFT round trip.
pub fn random_spectrum(p: Prime, level: u32, seed: u64, gamma: f64) -> FourierSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..p.dim(level))
        .map(|t| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if t == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let norm = PruferElement::from_index(t, level, p).norm() as f64;
            Complex64::new(re, im) * (norm.powf(-gamma) / std::f64::consts::SQRT_2)
        })
        .collect();
    FourierSpectrum::from_dense(p, level, coeffs).expect("length matches level")
}

/// Mixes a base seed with a sequence of tags into an independent stream seed.
///
/// Used to give each trial its own RNG stream regardless of which worker
/// thread evaluates it.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    tags.iter().fold(splitmix(seed), |acc, &t| splitmix(acc ^ splitmix(t)))
}
