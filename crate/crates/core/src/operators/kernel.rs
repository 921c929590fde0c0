//! Convolution form of the Hilbert operator, used as an independent oracle.
//!
//! At resolution `N` the principal-value integral
//! `Γ⁻¹ ∫ K(x − y) f(y) dy` over `ℤ_p` becomes a circular sum over residues
//! mod `p^N` with the diagonal coset omitted. For `f` of level at most `N` the
//! omitted shells integrate a constant against `sgn`, so the sum is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};
use crate::function_space::{fourier_forward, fourier_inverse, FourierSpectrum, LocallyConstantFn};
use crate::padic::{legendre_symbol, Prime, PruferElement};

/// How the printed kernel is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelReading {
    /// `K(z) = sgn(z) / |z|_p`.
    SignOverNorm,
    /// `K(z) = sin(2π{z}_p) / |z|_p`. The fractional part vanishes on `ℤ_p`,
    /// so this kernel is identically zero.
    LiteralSine,
}

impl KernelReading {
    pub fn name(self) -> &'static str {
        match self {
            KernelReading::SignOverNorm => "sign_over_norm",
            KernelReading::LiteralSine => "literal_sine",
        }
    }
}

/// Kernel value at the nonzero residue `z` mod `p^N`.
fn kernel(z: u64, p: Prime, reading: KernelReading) -> f64 {
    match reading {
        KernelReading::LiteralSine => 0.0,
        KernelReading::SignOverNorm => {
            let (mut unit, mut scale) = (z, 1.0);
            while unit % p.get() == 0 {
                unit /= p.get();
                scale *= p.get() as f64;
            }
            legendre_symbol((unit % p.get()) as i64, p).to_f64() * scale
        }
    }
}

/// `Γ⁻¹ Σ_{y ≢ x} K(x − y) f(y) p^{−N}` at every `x` mod `p^N`.
pub fn hilbert_kernel_apply(
    f: &LocallyConstantFn,
    level: u32,
    gamma: Complex64,
    reading: KernelReading,
) -> Result<LocallyConstantFn> {
    let p = f.prime();
    let len = p.check_level(level)?;
    let values = f.promote(level)?.into_values();
    let k: Vec<f64> = (0..len).map(|z| if z == 0 { 0.0 } else { kernel(z, p, reading) }).collect();
    let scale = 1.0 / (len as f64 * gamma);
    let n = len as usize;
    let out = (0..n)
        .map(|x| {
            let sum: Complex64 = values.iter().enumerate().map(|(y, v)| v * k[(x + n - y) % n]).sum();
            sum * scale
        })
        .collect();
    LocallyConstantFn::new(p, level, out)
}

/// Γ chosen so the kernel form reproduces `S χ_probe = sgn(probe) χ_probe`.
pub fn calibrate_gamma(p: Prime, level: u32, probe: PruferElement, reading: KernelReading) -> Result<Complex64> {
    crate::function_space::check_prime(p, probe.prime())?;
    let sign = probe.sgn().to_f64();
    if sign == 0.0 {
        return Err(PqcError::InvalidSpec("the probe character must be non-constant".into()));
    }
    let chi = fourier_inverse(&FourierSpectrum::character(probe));
    let raw = hilbert_kernel_apply(&chi, level, Complex64::new(1.0, 0.0), reading)?;
    let coeff = fourier_forward(&raw).get(&probe);
    if coeff.norm() < 1e-300 {
        return Err(PqcError::DegenerateKernel(reading.name()));
    }
    Ok(coeff / sign)
}

/// Quadratic Gauss sum `Σ_t (t|p) e^{2πit/p}`: `√p` for `p ≡ 1 (mod 4)`,
/// `i√p` for `p ≡ 3 (mod 4)`.
pub fn gauss_sum(p: Prime) -> Complex64 {
    let q = p.get();
    (1..q)
        .map(|t| {
            let angle = 2.0 * std::f64::consts::PI * t as f64 / q as f64;
            Complex64::from_polar(1.0, angle) * legendre_symbol(t as i64, p).to_f64()
        })
        .sum()
}

/// The normalizing constant as usually quoted: the Gauss sum in closed form.
pub fn reference_gamma(p: Prime) -> Complex64 {
    let root = (p.get() as f64).sqrt();
    if p.get() % 4 == 1 {
        Complex64::new(root, 0.0)
    } else {
        Complex64::new(0.0, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::fourier_forward;
    use crate::operators::hilbert_apply;
    use crate::padic::enumerate_dual;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn gauss_sum_closed_form() {
        for q in [3u64, 5, 7, 11, 13] {
            let g = gauss_sum(p(q));
            assert!((g - reference_gamma(p(q))).norm() < 1e-12, "p = {q}");
        }
    }

    #[test]
    fn constants_map_to_zero() {
        let f = LocallyConstantFn::constant(p(5), 0, Complex64::new(2.0, 1.0));
        let out = hilbert_kernel_apply(&f, 2, Complex64::new(1.0, 0.0), KernelReading::SignOverNorm).unwrap();
        assert!(out.values().iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn calibrated_gamma_matches_gauss_sum() {
        for (q, level) in [(3u64, 2u32), (5, 2), (7, 2), (11, 1)] {
            let q = p(q);
            let probe = PruferElement::reduce(1, 1, q);
            let gamma = calibrate_gamma(q, level, probe, KernelReading::SignOverNorm).unwrap();
            let minus_one = legendre_symbol(-1, q).to_f64();
            let expected = gauss_sum(q) * minus_one / q.get() as f64;
            assert!((gamma - expected).norm() < 1e-12, "p = {q:?}: {gamma} vs {expected}");
        }
    }

    #[test]
    fn agrees_with_spectral_definition() {
        for (q, level) in [(3u64, 3u32), (5, 2)] {
            let q = p(q);
            let gamma = calibrate_gamma(q, level, PruferElement::reduce(1, 1, q), KernelReading::SignOverNorm).unwrap();
            for a in enumerate_dual(q, level) {
                let spec = FourierSpectrum::character(a);
                let chi = fourier_inverse(&spec);
                let kernel_side =
                    fourier_forward(&hilbert_kernel_apply(&chi, level, gamma, KernelReading::SignOverNorm).unwrap());
                let spectral = hilbert_apply(&spec.promote(level).unwrap());
                for (x, y) in kernel_side.dense().iter().zip(spectral.dense()) {
                    assert!((x - y).norm() < 1e-9, "a = {a}");
                }
            }
        }
    }

    #[test]
    fn literal_sine_reading_is_degenerate() {
        let q = p(3);
        let probe = PruferElement::reduce(1, 1, q);
        assert!(matches!(calibrate_gamma(q, 2, probe, KernelReading::LiteralSine), Err(PqcError::DegenerateKernel(_))));
    }
}
