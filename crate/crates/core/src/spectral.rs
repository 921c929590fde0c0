//! Singular values, Schatten norms and approximation numbers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{PqcError, Result};
use crate::function_space::Exponent;
use crate::operators::{DerivativeOperator, LinearOperator};

/// Values below this fraction of `σ₁` count as zero in Schatten sums.
pub const CLAMP: f64 = 1e-13;

/// Singular values sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(PqcError::NonFinite);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SingularSpectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `σ₁`, or 0 for the empty spectrum.
    pub fn sigma_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `s_n = σ_{n+1}`, zero beyond the dimension.
    pub fn approximation_number(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    /// Count of values above `tol · σ₁`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let cut = tol * self.sigma_max();
        self.values.iter().filter(|&&v| v > cut).count()
    }

    /// The values with float dust below `CLAMP · σ₁` removed.
    pub fn nonzero(&self) -> &[f64] {
        let cut = CLAMP * self.sigma_max();
        let k = self.values.iter().take_while(|&&v| v > cut).count();
        &self.values[..k]
    }

    /// `(Σ σ^q)^{1/q}`; `σ₁` for `q = ∞`.
    pub fn schatten_norm(&self, q: impl Into<Exponent>) -> Result<f64> {
        match q.into() {
            Exponent::Infinity => Ok(self.sigma_max()),
            Exponent::Finite(q) if q.is_nan() || q <= 0.0 => Err(PqcError::InvalidExponent(q)),
            Exponent::Finite(q) => {
                let nz = self.nonzero();
                // fold from +0.0: an empty f64 sum is -0.0
                if q == 2.0 {
                    return Ok(nz.iter().fold(0.0, |acc, v| acc + v * v).sqrt());
                }
                Ok(nz.iter().fold(0.0, |acc, v| acc + v.powf(q)).powf(1.0 / q))
            }
        }
    }

    /// `Σ σ²` without clamping.
    pub fn frobenius_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `p^{n/q} · s_{p^n}` for `n = 0, 1, …` while `p^n < dim`.
    pub fn dyadic_sequence(&self, p: u64, q: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut pn = 1usize;
        let mut n = 0i32;
        while pn < self.dim() {
            out.push((p as f64).powf(n as f64 / q) * self.approximation_number(pn));
            pn *= p as usize;
            n += 1;
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,sigma\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{:e}\n", i + 1, v));
        }
        s
    }

    /// Values plus Schatten norms for each requested `q`.
    pub fn to_json(&self, qs: &[f64]) -> Result<Value> {
        let norms =
            qs.iter().map(|&q| Ok(json!({ "q": q, "norm": self.schatten_norm(q)? }))).collect::<Result<Vec<_>>>()?;
        Ok(json!({ "dim": self.dim(), "sigma": self.values, "schatten": norms }))
    }
}

fn check_finite(m: &DMatrix<Complex64>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(PqcError::NonFinite)
    }
}

pub fn singular_values_matrix(m: &DMatrix<Complex64>) -> Result<SingularSpectrum> {
    check_finite(m)?;
    if m.is_empty() {
        return SingularSpectrum::new(Vec::new());
    }
    let sv = m.clone().svd(false, false).singular_values;
    SingularSpectrum::new(sv.iter().map(|v| v.max(0.0)).collect())
}

pub fn singular_values(op: &DerivativeOperator) -> Result<SingularSpectrum> {
    singular_values_matrix(op.matrix())
}

/// Cross-checks of an SVD against the Gram matrix `DᴴD`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvdValidation {
    /// Largest `|σᵢ² − λᵢ(DᴴD)|`, relative to `max(1, σ₁²)`.
    pub gram_eigen_error: f64,
    /// `‖V Σ² Vᴴ − DᴴD‖_F / max(1, ‖DᴴD‖_F)`.
    pub backward_error: f64,
}

pub fn validate_svd(m: &DMatrix<Complex64>) -> Result<(SingularSpectrum, SvdValidation)> {
    check_finite(m)?;
    let svd = m.clone().svd(false, true);
    let spectrum = SingularSpectrum::new(svd.singular_values.iter().map(|v| v.max(0.0)).collect())?;
    let gram = m.ad_mul(m);
    let mut eig: Vec<f64> = gram.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let scale = spectrum.sigma_max().powi(2).max(1.0);
    let gram_eigen_error =
        spectrum.values().iter().zip(&eig).map(|(s, l)| (s * s - l).abs()).fold(0.0, f64::max) / scale;
    let v_t = svd.v_t.expect("requested V");
    let sigma_sqr = DMatrix::from_diagonal(&svd.singular_values.map(|s| Complex64::new(s * s, 0.0)));
    let rebuilt = v_t.adjoint() * sigma_sqr * &v_t;
    let backward_error = (rebuilt - &gram).norm() / gram.norm().max(1.0);
    Ok((spectrum, SvdValidation { gram_eigen_error, backward_error }))
}

/// Outcome of [`power_iteration`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `σ₁` of a matrix-free operator by power iteration on `DᴴD`, starting from
/// a Gaussian vector drawn from `seed`. Stops when the Rayleigh quotient
/// changes by at most `rel_tol` relative.
pub fn power_iteration(op: &impl LinearOperator, iters: usize, seed: u64, rel_tol: f64) -> Result<PowerEstimate> {
    if iters == 0 {
        return Err(PqcError::InvalidSpec("power iteration needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..op.dim())
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut lambda = 0.0;
    for k in 1..=iters {
        let nx = norm(&x);
        if nx == 0.0 {
            return Ok(PowerEstimate { sigma: 0.0, iterations: k, converged: true });
        }
        x.iter_mut().for_each(|c| *c /= nx);
        let y = op.apply(&x);
        let next = y.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if !next.is_finite() {
            return Err(PqcError::NonFinite);
        }
        if next == 0.0 {
            return Ok(PowerEstimate { sigma: 0.0, iterations: k, converged: true });
        }
        let done = k > 1 && (next - lambda).abs() <= rel_tol * next;
        lambda = next;
        if done {
            return Ok(PowerEstimate { sigma: lambda.sqrt(), iterations: k, converged: true });
        }
        x = op.apply_adjoint(&y);
    }
    Ok(PowerEstimate { sigma: lambda.sqrt(), iterations: iters, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{fourier_forward, BuiltinFunction, FourierSpectrum, RandomDist};
    use crate::operators::{derivative_matrix, DerivativeApplier};
    use crate::padic::{enumerate_dual, Prime, PruferElement};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hand_example_spectrum() {
        let q = p(3);
        let a = PruferElement::parse("1/3", q).unwrap();
        let s = singular_values(&derivative_matrix(&FourierSpectrum::character(a), 1).unwrap()).unwrap();
        let v = s.values();
        assert!(close(v[0], 2.0, 1e-12) && close(v[1], 1.0, 1e-12) && close(v[2], 1.0, 1e-12));
        assert_eq!(s.schatten_norm(f64::INFINITY).unwrap(), v[0]);
        assert!(close(s.schatten_norm(2.0).unwrap().powi(2), 6.0, 1e-12));
    }

    #[test]
    fn zero_operator() {
        let d = derivative_matrix(&FourierSpectrum::zeros(p(5), 1), 1).unwrap();
        let s = singular_values(&d).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        assert_eq!(s.schatten_norm(1.0).unwrap(), 0.0);
        assert!(s.schatten_norm(2.0).unwrap().is_sign_positive());
        assert!(s.schatten_norm(4.0).unwrap().is_sign_positive());
        assert_eq!(s.numerical_rank(1e-10), 0);
    }

    #[test]
    fn character_closed_form() {
        for (pr, level) in [(3u64, 3u32), (5, 2), (7, 2)] {
            let q = p(pr);
            for a in enumerate_dual(q, level).into_iter().skip(1) {
                let norm = a.norm() as usize;
                let s = singular_values(&derivative_matrix(&FourierSpectrum::character(a), level).unwrap()).unwrap();
                let twos = (norm + norm / pr as usize) / 2 - 1;
                let v = s.values();
                assert!(v[..twos].iter().all(|&x| close(x, 2.0, 1e-10)));
                assert!(v[twos..twos + 2].iter().all(|&x| close(x, 1.0, 1e-10)));
                assert!(v[twos + 2..].iter().all(|&x| x < 1e-10));
                let coarse = (norm / pr as usize) as f64;
                assert!(close(s.schatten_norm(1.0).unwrap(), norm as f64 + coarse, 1e-9));
                assert!(close(s.frobenius_sqr(), 2.0 * (norm as f64 + coarse) - 2.0, 1e-9));
            }
        }
    }

    #[test]
    fn schatten_rules() {
        let s = SingularSpectrum::new(vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.values(), &[2.0, 1.0, 1.0]);
        assert!(s.schatten_norm(0.0).is_err());
        assert!(s.schatten_norm(-1.0).is_err());
        let mut last = f64::INFINITY;
        for q in [0.5, 1.0, 1.5, 2.0, 4.0, 8.0] {
            let n = s.schatten_norm(q).unwrap();
            assert!(n <= last + 1e-12);
            last = n;
        }
        assert_eq!(s.approximation_number(0), 2.0);
        assert_eq!(s.approximation_number(3), 0.0);
        assert!(SingularSpectrum::new(vec![f64::NAN]).is_err());
        let dusty = SingularSpectrum::new(vec![1.0, 1e-15]).unwrap();
        assert_eq!(dusty.schatten_norm(0.5).unwrap(), 1.0);
    }

    #[test]
    fn svd_validation_and_gram() {
        let f = BuiltinFunction::RandomValues { seed: 4, dist: RandomDist::Disk }.realize(p(3), 3).unwrap();
        let d = derivative_matrix(&fourier_forward(&f), 3).unwrap();
        let (s, check) = validate_svd(d.matrix()).unwrap();
        assert!(check.gram_eigen_error < 1e-10);
        assert!(check.backward_error < 1e-8);
        let frob = d.matrix().norm_squared();
        assert!(close(s.frobenius_sqr(), frob, 1e-10 * frob));
    }

    #[test]
    fn rank_of_finite_level_function() {
        let f = BuiltinFunction::RandomValues { seed: 9, dist: RandomDist::Disk }.realize(p(3), 2).unwrap();
        let d = derivative_matrix(&fourier_forward(&f), 4).unwrap();
        let s = singular_values(&d).unwrap();
        assert!(s.numerical_rank(1e-10 * 81.0) <= 9);
        let seq = s.dyadic_sequence(3, 1.0);
        assert_eq!(seq.len(), 4);
        assert!(seq[2] < 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense() {
        let q = p(3);
        let a = PruferElement::parse("1/9", q).unwrap();
        let chi = crate::function_space::fourier_inverse(&FourierSpectrum::character(a));
        let est = power_iteration(&DerivativeApplier::new(&chi, 3).unwrap(), 200, 1, 1e-14).unwrap();
        assert!(est.converged);
        assert!(close(est.sigma, 2.0, 1e-6));
        for seed in 0..5 {
            let f = BuiltinFunction::RandomValues { seed, dist: RandomDist::Disk }.realize(q, 2).unwrap();
            let dense = singular_values(&derivative_matrix(&fourier_forward(&f), 3).unwrap()).unwrap();
            let est = power_iteration(&DerivativeApplier::new(&f, 3).unwrap(), 2000, seed, 1e-15).unwrap();
            assert!(close(est.sigma, dense.sigma_max(), 1e-6 * dense.sigma_max()), "seed {seed}");
        }
        let zero = crate::function_space::LocallyConstantFn::constant(q, 0, Complex64::new(1.0, 0.0));
        let est = power_iteration(&DerivativeApplier::new(&zero, 2).unwrap(), 10, 0, 1e-12).unwrap();
        assert!(est.sigma < 1e-12);
    }

    #[test]
    fn csv_and_json() {
        let s = SingularSpectrum::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(s.to_csv(), "index,sigma\n1,2e0\n2,1e0\n");
        let v = s.to_json(&[1.0, 2.0]).unwrap();
        assert_eq!(v["schatten"][0]["norm"], 3.0);
    }
}
