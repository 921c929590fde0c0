//! The Hilbert operator `S` and the quantum derivative `df = [M_f, S]`.
//!
//! `S` is diagonal in the character basis with eigenvalue `sgn(α)` on `χ_α`
//! (zero on constants). In that basis `df` has entries
//! `M[β, α] = f̂_{β−α} (sgn α − sgn β)`.

mod derivative;
pub mod exact;
pub mod export;
pub mod kernel;

use crate::function_space::FourierSpectrum;
use crate::padic::{sign_table, Prime, Sign};

pub use derivative::{
    derivative_apply, derivative_matrix, multiplication_matrix, numerical_rank, DerivativeApplier, DerivativeOperator,
    LinearOperator, DENSE_CAP,
};
pub use exact::exact_rank;
pub use kernel::{calibrate_gamma, gauss_sum, hilbert_kernel_apply, reference_gamma, KernelReading};

/// `S = P⁺ − P⁻` at level `N`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertOperator {
    p: Prime,
    level: u32,
    diagonal: Vec<Sign>,
}

impl HilbertOperator {
    pub fn new(p: Prime, level: u32) -> Self {
        HilbertOperator { p, level, diagonal: sign_table(p, level) }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn diagonal(&self) -> &[Sign] {
        &self.diagonal
    }

    /// Diagonal of `S²`: 1 everywhere except 0 on the constants.
    pub fn square_diagonal(&self) -> Vec<i8> {
        self.diagonal.iter().map(|s| s.to_i8() * s.to_i8()).collect()
    }

    /// Applies `S` to a spectrum of level at most `N`; the result is at level `N`.
    pub fn apply(&self, spec: &FourierSpectrum) -> crate::Result<FourierSpectrum> {
        crate::function_space::check_prime(self.p, spec.prime())?;
        let spec = spec.promote(self.level)?;
        let coeffs = spec.dense().iter().zip(&self.diagonal).map(|(c, s)| c * s.to_f64()).collect();
        FourierSpectrum::from_dense(self.p, self.level, coeffs)
    }
}

/// `S` on a spectrum: multiplies `f̂_α` by `sgn(α)`.
pub fn hilbert_apply(spec: &FourierSpectrum) -> FourierSpectrum {
    HilbertOperator::new(spec.prime(), spec.level()).apply(spec).expect("same prime and level")
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::function_space::{fourier_forward, LocallyConstantFn};
    use crate::padic::PruferElement;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let f = LocallyConstantFn::constant(p(3), 2, Complex64::new(4.0, 1.0));
        let s = hilbert_apply(&fourier_forward(&f));
        assert!(s.dense().iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn characters_are_eigenvectors() {
        let q = p(3);
        let third = PruferElement::parse("1/3", q).unwrap();
        let two_thirds = PruferElement::parse("2/3", q).unwrap();
        let s1 = hilbert_apply(&FourierSpectrum::character(third));
        assert_eq!(s1.get(&third), Complex64::new(1.0, 0.0));
        let s2 = hilbert_apply(&FourierSpectrum::character(two_thirds));
        assert_eq!(s2.get(&two_thirds), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn square_is_identity_off_constants() {
        for (pr, level) in [(3u64, 4u32), (5, 3), (7, 2)] {
            let s = HilbertOperator::new(p(pr), level);
            let sq = s.square_diagonal();
            assert_eq!(sq[0], 0);
            assert!(sq[1..].iter().all(|&v| v == 1));
            // P⁺ and P⁻ split the non-constant characters evenly
            let plus = s.diagonal().iter().filter(|&&x| x == Sign::Plus).count();
            let minus = s.diagonal().iter().filter(|&&x| x == Sign::Minus).count();
            assert_eq!(plus, minus);
            assert_eq!(plus + minus + 1, s.diagonal().len());
        }
    }
}
