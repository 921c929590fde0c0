//! Radix-p Cooley–Tukey transform over `Z/p^n Z`.
//!
//! Normalization follows the integral convention on `Z_p`: the forward
//! transform carries the factor `p^{-n}` (so `f̂_α = ⟨f, χ_α⟩`), the inverse
//! carries none.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::padic::Prime;

/// Precomputed twiddles and digit-reversal permutation for one `(p, n)`.
#[derive(Debug, Clone)]
pub struct FftPlan {
    p: usize,
    level: u32,
    len: usize,
    /// `roots[k] = exp(-2πi k / len)`
    roots: Vec<Complex64>,
    digit_rev: Vec<usize>,
}

impl FftPlan {
    pub fn new(p: Prime, level: u32) -> Self {
        let len = p.dim(level);
        let pp = p.get() as usize;
        let roots = (0..len)
            .map(|k| {
                let theta = -TAU * k as f64 / len as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let digit_rev = (0..len)
            .map(|mut j| {
                let mut r = 0;
                for _ in 0..level {
                    r = r * pp + j % pp;
                    j /= pp;
                }
                r
            })
            .collect();
        FftPlan { p: pp, level, len, roots, digit_rev }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Unnormalized DFT in place: `X[t] = Σ_j x[j] exp(sign·2πi t j / len)`.
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "FFT input length");
        if self.len <= 1 {
            return;
        }
        for i in 0..self.len {
            let r = self.digit_rev[i];
            if i < r {
                data.swap(i, r);
            }
        }
        let p = self.p;
        let mut scratch = vec![Complex64::new(0.0, 0.0); p];
        let mut sub = 1;
        while sub < self.len {
            let block = sub * p;
            let stride = self.len / block;
            for start in (0..self.len).step_by(block) {
                for k in 0..sub {
                    for (q, out) in scratch.iter_mut().enumerate() {
                        let freq = k + q * sub;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for r in 0..p {
                            let e = (r * freq % block) * stride;
                            let w = if inverse { self.roots[e].conj() } else { self.roots[e] };
                            acc += data[start + r * sub + k] * w;
                        }
                        *out = acc;
                    }
                    for (q, v) in scratch.iter().enumerate() {
                        data[start + k + q * sub] = *v;
                    }
                }
            }
            sub = block;
        }
    }

    /// Values on level-n cosets to Fourier coefficients (with `p^{-n}`).
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.forward_in_place(&mut data);
        data
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / self.len as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Fourier coefficients to coset values (no normalization).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.inverse_in_place(&mut data);
        data
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }
}

/// Direct `O(p^{2n})` forward transform with the same normalization as
/// [`FftPlan::forward`]. Kept as a reference for the fast path.
pub fn naive_dft(values: &[Complex64]) -> Vec<Complex64> {
    let len = values.len();
    (0..len)
        .map(|t| {
            let acc: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let e = (t * j) % len;
                    let theta = -TAU * e as f64 / len as f64;
                    v * Complex64::new(theta.cos(), theta.sin())
                })
                .sum();
            acc / len as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(len: usize) -> Vec<Complex64> {
        (0..len).map(|j| Complex64::new((j as f64 * 0.37).sin() + 0.1, (j as f64 * 1.3).cos())).collect()
    }

    #[test]
    fn fft_matches_naive() {
        for (p, n) in [(3u64, 0u32), (3, 1), (3, 2), (3, 4), (5, 3), (7, 2), (11, 2)] {
            let plan = FftPlan::new(Prime::new(p).unwrap(), n);
            let x = signal(plan.len());
            let fast = plan.forward(&x);
            let slow = naive_dft(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let plan = FftPlan::new(Prime::new(5).unwrap(), 4);
        let x = signal(plan.len());
        let back = plan.inverse(&plan.forward(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
