use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, ensure_finite, param, Result};
use crate::operator::LinearMap;

/// Dimension at and above which matvecs go through the FFT.
pub const DEFAULT_FAST_THRESHOLD: usize = 64;

/// The circulant matrix `Γ_x` generated by `x`.
///
/// With 1-based indices, entry `(i, j)` is `x_{(j - i) mod N}` where
/// `x_0 ≡ x_N`; the first row is `(x_N, x_1, …, x_{N-1})` and the first
/// column is `(x_N, x_{N-1}, …, x_1)`. A matvec is a length-`N` circular
/// correlation, so the fast path uses an exact length-`N` transform and
/// never zero-pads.
#[derive(Clone)]
pub struct CirculantOperator {
    generator: Vec<f64>,
    fast_threshold: usize,
    fast: Option<Spectral>,
}

#[derive(Clone)]
struct Spectral {
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantOperator")
            .field("dim", &self.generator.len())
            .field("fast_threshold", &self.fast_threshold)
            .field("fast", &self.fast.is_some())
            .finish()
    }
}

impl CirculantOperator {
    pub fn new(generator: Vec<f64>) -> Result<Self> {
        Self::with_threshold(generator, DEFAULT_FAST_THRESHOLD)
    }

    pub fn with_threshold(generator: Vec<f64>, fast_threshold: usize) -> Result<Self> {
        if generator.is_empty() {
            return param("circulant generator must be nonempty");
        }
        if fast_threshold == 0 {
            return param("fast threshold must be positive");
        }
        ensure_finite(&generator)?;
        let n = generator.len();
        let fast = (n >= fast_threshold).then(|| {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            // c[d] = x_{d} (1-based, x_0 = x_N), i.e. generator[(d - 1) mod n]
            let mut spectrum: Vec<Complex<f64>> = (0..n)
                .map(|d| Complex::new(generator[(d + n - 1) % n], 0.0))
                .collect();
            forward.process(&mut spectrum);
            Spectral {
                spectrum,
                forward,
                inverse,
            }
        });
        Ok(CirculantOperator {
            generator,
            fast_threshold,
            fast,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    pub fn fast_threshold(&self) -> usize {
        self.fast_threshold
    }

    pub fn uses_fft(&self) -> bool {
        self.fast.is_some()
    }

    /// Entry `(i, j)` with 0-based indices.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        self.generator[(j + 2 * n - i - 1) % n]
    }

    /// `Γ_x z`.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), z.len())?;
        Ok(match &self.fast {
            Some(sp) => sp.run(z, true),
            None => self.apply_dense(z),
        })
    }

    /// `Γ_xᵀ z`.
    pub fn adjoint_apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), z.len())?;
        Ok(match &self.fast {
            Some(sp) => sp.run(z, false),
            None => self.adjoint_dense(z),
        })
    }

    /// O(N²) reference matvec.
    pub fn apply_dense(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j) * z[j]).sum())
            .collect()
    }

    /// O(N²) reference adjoint matvec.
    pub fn adjoint_dense(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.entry(i, j) * w[i]).sum())
            .collect()
    }

    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }
}

impl Spectral {
    fn run(&self, z: &[f64], correlate: bool) -> Vec<f64> {
        let n = z.len();
        let mut buf: Vec<Complex<f64>> = z.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, c) in buf.iter_mut().zip(&self.spectrum) {
            *b *= if correlate { c.conj() } else { *c };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

impl LinearMap for CirculantOperator {
    fn rows(&self) -> usize {
        self.dim()
    }

    fn cols(&self) -> usize {
        self.dim()
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        CirculantOperator::apply(self, z)
    }

    fn adjoint(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.adjoint_apply(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dot, norm1, norm2};
    use crate::seeding::stream_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        crate::model::dist2(a, b) / norm2(b).max(1e-300)
    }

    #[test]
    fn display_layout() {
        let op = CirculantOperator::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(op.apply(&[1.0, 0.0, 0.0]).unwrap(), vec![3.0, 2.0, 1.0]);
        assert_eq!(
            op.adjoint_apply(&[1.0, 0.0, 0.0]).unwrap(),
            vec![3.0, 1.0, 2.0]
        );
        assert_eq!(op.apply(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(op.adjoint_apply(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        // rows are successive right shifts
        let m = op.dense_matrix();
        assert_eq!(
            m.row(0).iter().copied().collect::<Vec<_>>(),
            vec![3.0, 1.0, 2.0]
        );
        assert_eq!(
            m.row(1).iter().copied().collect::<Vec<_>>(),
            vec![2.0, 3.0, 1.0]
        );
        assert_eq!(
            m.row(2).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn fft_path_matches_dense_on_awkward_sizes() {
        for &n in &[8usize, 64, 257, 1024] {
            let op = CirculantOperator::with_threshold(gaussian(n, n as u64), 1).unwrap();
            assert!(op.uses_fft());
            let z = gaussian(n, 1000 + n as u64);
            assert!(rel_err(&op.apply(&z).unwrap(), &op.apply_dense(&z)) <= 1e-10);
            assert!(rel_err(&op.adjoint_apply(&z).unwrap(), &op.adjoint_dense(&z)) <= 1e-10);
        }
    }

    #[test]
    fn threshold_selects_path() {
        assert!(!CirculantOperator::new(vec![1.0; 63]).unwrap().uses_fft());
        assert!(CirculantOperator::new(vec![1.0; 64]).unwrap().uses_fft());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let op = CirculantOperator::new(vec![1.0, 2.0]).unwrap();
        assert!(op.apply(&[1.0]).is_err());
        assert!(op.adjoint_apply(&[1.0, 2.0, 3.0]).is_err());
        assert!(CirculantOperator::new(vec![]).is_err());
        assert!(CirculantOperator::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn commutation_young_and_frobenius() {
        for seed in 0..20 {
            let n = 5 + seed as usize * 7;
            let g = gaussian(n, seed);
            let y = gaussian(n, seed + 100);
            let gy = CirculantOperator::new(g.clone())
                .unwrap()
                .apply(&y)
                .unwrap();
            let yg = CirculantOperator::new(y.clone())
                .unwrap()
                .apply(&g)
                .unwrap();
            // with this row layout the two products agree up to the row reversal r -> -r - 2 (mod N)
            let flipped: Vec<f64> = (0..n).map(|r| yg[(2 * n - r - 2) % n]).collect();
            assert!(crate::model::dist2(&gy, &flipped) <= 1e-12 * norm2(&gy).max(1.0));
            assert!((norm2(&gy) - norm2(&yg)).abs() <= 1e-12 * norm2(&gy).max(1.0));
            assert!((norm1(&gy) - norm1(&yg)).abs() <= 1e-12 * norm1(&gy).max(1.0));
            let z = gaussian(n, seed + 200);
            let op = CirculantOperator::new(y.clone()).unwrap();
            assert!(norm2(&op.apply(&z).unwrap()) <= norm1(&y) * norm2(&z) * (1.0 + 1e-12));
            let fro = op.dense_matrix().norm();
            assert!((fro - (n as f64).sqrt() * norm2(&y)).abs() <= 1e-10 * fro);
        }
    }

    #[test]
    fn adjoint_identity() {
        let n = 300;
        let op = CirculantOperator::new(gaussian(n, 1)).unwrap();
        let (z, w) = (gaussian(n, 2), gaussian(n, 3));
        let lhs = dot(&op.apply(&z).unwrap(), &w);
        let rhs = dot(&z, &op.adjoint_apply(&w).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }
}
