use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PqcError, Result};
use crate::function_space::{check_prime, FftPlan, FourierSpectrum, LocallyConstantFn};
use crate::padic::{sign_table, Prime};
use crate::spectral::singular_values;

/// Largest `p^N` for which dense matrices are built.
pub const DENSE_CAP: usize = 2000;

/// A linear map on coefficient vectors in dual-enumeration order.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64>;
}

/// Dense `df` at level `N` in the character basis.
#[derive(Debug, Clone)]
pub struct DerivativeOperator {
    p: Prime,
    level: u32,
    spectrum: FourierSpectrum,
    matrix: DMatrix<Complex64>,
    exact: bool,
}

/// Re-levels a spectrum to `level`, rejecting frequencies above it.
fn spectrum_at(spec: &FourierSpectrum, level: u32) -> Result<FourierSpectrum> {
    let support = spec.support_level();
    if support > level {
        return Err(PqcError::NormExceedsLevel { norm: spec.prime().pow(support), level });
    }
    if spec.level() <= level {
        return spec.promote(level);
    }
    FourierSpectrum::from_entries(spec.prime(), level, spec.iter_nonzero())
}

fn check_dense(p: Prime, level: u32) -> Result<usize> {
    let dim = p.check_level(level)? as usize;
    if dim > DENSE_CAP {
        return Err(PqcError::DenseCapExceeded { dim, cap: DENSE_CAP });
    }
    Ok(dim)
}

/// `M[β, α] = f̂_{β−α} (sgn α − sgn β)`.
pub fn derivative_matrix(spec: &FourierSpectrum, level: u32) -> Result<DerivativeOperator> {
    DerivativeOperator::build(spec, level, false)
}

/// Multiplication by `g` in the character basis: `M_g[β, α] = ĝ_{β−α}`.
pub fn multiplication_matrix(spec: &FourierSpectrum, level: u32) -> Result<DMatrix<Complex64>> {
    let dim = check_dense(spec.prime(), level)?;
    let spec = spectrum_at(spec, level)?;
    let c = spec.dense();
    Ok(DMatrix::from_fn(dim, dim, |beta, alpha| c[(beta + dim - alpha) % dim]))
}

impl DerivativeOperator {
    fn build(spec: &FourierSpectrum, level: u32, exact: bool) -> Result<Self> {
        let p = spec.prime();
        let dim = check_dense(p, level)?;
        let spectrum = spectrum_at(spec, level)?;
        let signs: Vec<f64> = sign_table(p, level).iter().map(|s| s.to_f64()).collect();
        let c = spectrum.dense();
        let matrix = DMatrix::from_fn(dim, dim, |beta, alpha| {
            let diff = signs[alpha] - signs[beta];
            if diff == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c[(beta + dim - alpha) % dim] * diff
            }
        });
        Ok(DerivativeOperator { p, level, spectrum, matrix, exact })
    }

    /// Builds `df` from coefficients that are known exactly (characters,
    /// user-supplied rational spectra). Such operators support [`crate::operators::exact_rank`].
    pub fn from_exact_spectrum(spec: &FourierSpectrum, level: u32) -> Result<Self> {
        Self::build(spec, level, true)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self) -> &FourierSpectrum {
        &self.spectrum
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Image of a spectrum of level at most `N`.
    pub fn apply_spectrum(&self, v: &FourierSpectrum) -> Result<FourierSpectrum> {
        check_prime(self.p, v.prime())?;
        let v = spectrum_at(v, self.level)?;
        FourierSpectrum::from_dense(self.p, self.level, LinearOperator::apply(self, v.dense()))
    }
}

impl LinearOperator for DerivativeOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(x);
        self.matrix.ad_mul(&v).as_slice().to_vec()
    }
}

/// Count of singular values above `tol · σ_max`; `tol` defaults to `1e-10 · p^N`.
pub fn numerical_rank(op: &DerivativeOperator, tol: Option<f64>) -> Result<usize> {
    let tol = tol.unwrap_or(1e-10 * op.dim() as f64);
    Ok(singular_values(op)?.numerical_rank(tol))
}

/// Matrix-free `df` at level `N`: two FFT round trips and two sign multiplies
/// per application, `O(p^N · N · p)` work.
#[derive(Debug, Clone)]
pub struct DerivativeApplier {
    p: Prime,
    level: u32,
    values: Vec<Complex64>,
    conj_values: Vec<Complex64>,
    signs: Vec<f64>,
    plan: FftPlan,
}

impl DerivativeApplier {
    pub fn new(f: &LocallyConstantFn, level: u32) -> Result<Self> {
        let p = f.prime();
        p.check_level(level)?;
        let values = f.promote(level)?.into_values();
        let conj_values = values.iter().map(|v| v.conj()).collect();
        Ok(DerivativeApplier {
            p,
            level,
            values,
            conj_values,
            signs: sign_table(p, level).iter().map(|s| s.to_f64()).collect(),
            plan: FftPlan::new(p, level),
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    fn multiply(&self, f: &[Complex64], coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.plan.inverse(coeffs);
        buf.iter_mut().zip(f).for_each(|(b, v)| *b *= v);
        self.plan.forward_in_place(&mut buf);
        buf
    }

    /// `M_f S x − S M_f x` with `f` given by its values.
    fn commutator(&self, f: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let sx: Vec<Complex64> = x.iter().zip(&self.signs).map(|(c, s)| c * s).collect();
        let a = self.multiply(f, &sx);
        let b = self.multiply(f, x);
        a.iter().zip(&b).zip(&self.signs).map(|((a, b), s)| a - b * s).collect()
    }
}

impl LinearOperator for DerivativeApplier {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.commutator(&self.values, x)
    }

    /// `(df)^* = [S, M_{f̄}] = −d(f̄)`.
    fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.commutator(&self.conj_values, x).into_iter().map(|c| -c).collect()
    }
}

/// `(df) v` without forming the matrix.
pub fn derivative_apply(f: &LocallyConstantFn, v: &FourierSpectrum, level: u32) -> Result<FourierSpectrum> {
    check_prime(f.prime(), v.prime())?;
    let applier = DerivativeApplier::new(f, level)?;
    let v = spectrum_at(v, level)?;
    FourierSpectrum::from_dense(f.prime(), level, applier.apply(v.dense()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{fourier_forward, fourier_inverse, BuiltinFunction, RandomDist};
    use crate::padic::{enumerate_dual, PruferElement};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_fn(pr: u64, level: u32, seed: u64, dist: RandomDist) -> LocallyConstantFn {
        BuiltinFunction::RandomValues { seed, dist }.realize(p(pr), level).unwrap()
    }

    #[test]
    fn constant_gives_zero_matrix() {
        let f = LocallyConstantFn::constant(p(5), 2, Complex64::new(3.0, -2.0));
        let d = derivative_matrix(&fourier_forward(&f), 2).unwrap();
        assert!(d.matrix().iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn character_matrix_hand_example() {
        // p = 3, f = χ_{1/3}, N = 1
        let q = p(3);
        let a = PruferElement::parse("1/3", q).unwrap();
        let d = derivative_matrix(&FourierSpectrum::character(a), 1).unwrap();
        let m = d.matrix();
        let mut expected = DMatrix::from_element(3, 3, c(0.0));
        expected[(1, 0)] = c(-1.0);
        expected[(2, 1)] = c(2.0);
        expected[(0, 2)] = c(-1.0);
        assert_eq!(*m, expected);
    }

    #[test]
    fn character_columns_follow_shift_rule() {
        for (pr, level) in [(3u64, 3u32), (5, 2), (7, 2)] {
            let q = p(pr);
            for a in enumerate_dual(q, level).into_iter().skip(1) {
                let d = derivative_matrix(&FourierSpectrum::character(a), level).unwrap();
                for alpha in enumerate_dual(q, level) {
                    let col = alpha.to_index(level).unwrap();
                    let target = alpha.checked_add(&a).unwrap();
                    let row = target.to_index(level).unwrap();
                    let expected = alpha.sgn().to_f64() - target.sgn().to_f64();
                    for r in 0..d.dim() {
                        let v = d.matrix()[(r, col)];
                        let e = if r == row { expected } else { 0.0 };
                        assert_eq!(v, c(e));
                    }
                }
            }
        }
    }

    #[test]
    fn level_too_low_is_rejected() {
        let q = p(3);
        let a = PruferElement::parse("1/9", q).unwrap();
        assert!(derivative_matrix(&FourierSpectrum::character(a), 1).is_err());
        assert!(derivative_matrix(&FourierSpectrum::character(a), 8).is_err());
    }

    #[test]
    fn matrix_free_agrees_with_dense() {
        for (pr, n, level) in [(3u64, 2u32, 4u32), (5, 2, 3), (7, 1, 2)] {
            let f = random_fn(pr, n, 11, RandomDist::Disk);
            let d = derivative_matrix(&fourier_forward(&f), level).unwrap();
            let v = random_fn(pr, level, 12, RandomDist::Disk);
            let vs = fourier_forward(&v);
            let dense = d.apply_spectrum(&vs).unwrap();
            let free = derivative_apply(&f, &vs, level).unwrap();
            for (x, y) in dense.dense().iter().zip(free.dense()) {
                assert!((x - y).norm() < 1e-10);
            }
            let applier = DerivativeApplier::new(&f, level).unwrap();
            let adj_dense = d.apply_adjoint(vs.dense());
            let adj_free = applier.apply_adjoint(vs.dense());
            for (x, y) in adj_dense.iter().zip(&adj_free) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn matrix_free_character_example() {
        let q = p(5);
        let a = PruferElement::parse("2/5", q).unwrap();
        let chi = fourier_inverse(&FourierSpectrum::character(a));
        for alpha in enumerate_dual(q, 2) {
            let out = derivative_apply(&chi, &FourierSpectrum::character(alpha), 2).unwrap();
            let target = alpha.checked_add(&a).unwrap();
            let coeff = alpha.sgn().to_f64() - target.sgn().to_f64();
            for (t, v) in out.dense().iter().enumerate() {
                let e = if PruferElement::from_index(t, 2, q) == target { coeff } else { 0.0 };
                assert!((v - c(e)).norm() < 1e-12);
            }
        }
        let constant = LocallyConstantFn::constant(q, 1, c(2.0));
        let v = fourier_forward(&random_fn(5, 2, 1, RandomDist::Disk));
        assert!(derivative_apply(&constant, &v, 2).unwrap().dense().iter().all(|x| x.norm() < 1e-13));
    }

    #[test]
    fn real_functions_give_skew_adjoint_matrices() {
        let f = random_fn(3, 3, 5, RandomDist::Real);
        let d = derivative_matrix(&fourier_forward(&f), 3).unwrap();
        let m = d.matrix();
        let skew = m + m.adjoint();
        assert!(skew.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn leibniz_rule() {
        let f = random_fn(3, 2, 1, RandomDist::Disk);
        let g = random_fn(3, 3, 2, RandomDist::Disk);
        let level = 3;
        let fg = f.mul(&g).unwrap();
        let (sf, sg) = (fourier_forward(&f), fourier_forward(&g));
        let lhs = derivative_matrix(&fourier_forward(&fg), level).unwrap();
        let df = derivative_matrix(&sf, level).unwrap();
        let dg = derivative_matrix(&sg, level).unwrap();
        let rhs = df.matrix() * multiplication_matrix(&sg, level).unwrap()
            + multiplication_matrix(&sf, level).unwrap() * dg.matrix();
        assert!((lhs.matrix() - rhs).iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn dense_cap_enforced() {
        let f = LocallyConstantFn::constant(p(3), 0, c(1.0));
        assert!(matches!(derivative_matrix(&fourier_forward(&f), 7), Err(PqcError::DenseCapExceeded { .. })));
        assert!(DerivativeApplier::new(&f, 7).is_ok());
    }
}
