//! Signal-domain types: norms, sparsity classes, hard thresholding and
//! seeded test-signal generation.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::seeding::{stream, stream_rng};

/// Fraction of `sqrt(s)` targeted by generated effectively sparse signals.
pub const EFFECTIVE_FILL: f64 = 0.95;

const MIN_NORM: f64 = 1e-12;

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn support_size(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// `‖a − b‖₂`.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Returns `x / ‖x‖₂`, or `None` for the zero vector.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(x);
    (n > 0.0).then(|| x.iter().map(|v| v / n).collect())
}

/// Distance between the directions of two nonzero vectors.
pub fn direction_error(truth: &[f64], estimate: &[f64]) -> Option<f64> {
    Some(dist2(&normalized(truth)?, &normalized(estimate)?))
}

/// Keeps the `s` entries of largest magnitude; ties go to the lowest index.
pub fn hard_threshold(x: &[f64], s: usize) -> Result<Vec<f64>> {
    if s == 0 || s > x.len() {
        return param(format!("sparsity {s} outside 1..={}", x.len()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let mut out = vec![0.0; x.len()];
    for &i in &order[..s] {
        out[i] = x[i];
    }
    Ok(out)
}

/// Best `s`-term approximation error in ℓ1, `σ_s(x)₁`.
pub fn best_term_error_l1(x: &[f64], s: usize) -> Result<f64> {
    let kept = hard_threshold(x, s)?;
    Ok(x.iter().zip(&kept).map(|(a, b)| (a - b).abs()).sum())
}

/// `(‖x‖₁ / ‖x‖₂)²`; `x` is `s`-effectively sparse iff this is at most `s`.
pub fn effective_sparsity_ratio(x: &[f64]) -> Result<f64> {
    let n2 = norm2(x);
    if n2 == 0.0 {
        return Err(Error::Domain(
            "effective sparsity of the zero vector".into(),
        ));
    }
    let r = norm1(x) / n2;
    Ok(r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityClass {
    ExactSparse,
    EffectivelySparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportLaw {
    Uniform,
    /// `s` cyclically consecutive indices from a uniform start.
    Contiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeLaw {
    Gaussian,
    FlatSigns,
}

/// How a test signal is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub ambient_dim: usize,
    pub sparsity: usize,
    pub class: SparsityClass,
    pub norm_l2: f64,
    pub support_law: SupportLaw,
    pub magnitude_law: MagnitudeLaw,
}

impl SignalSpec {
    pub fn exact(ambient_dim: usize, sparsity: usize, norm_l2: f64) -> Self {
        SignalSpec {
            ambient_dim,
            sparsity,
            class: SparsityClass::ExactSparse,
            norm_l2,
            support_law: SupportLaw::Uniform,
            magnitude_law: MagnitudeLaw::Gaussian,
        }
    }

    pub fn effective(ambient_dim: usize, sparsity: usize, norm_l2: f64) -> Self {
        SignalSpec {
            class: SparsityClass::EffectivelySparse,
            ..Self::exact(ambient_dim, sparsity, norm_l2)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 {
            return param("ambient dimension must be positive");
        }
        if self.sparsity == 0 || self.sparsity > self.ambient_dim {
            return param(format!(
                "sparsity {} outside 1..={}",
                self.sparsity, self.ambient_dim
            ));
        }
        if !(self.norm_l2.is_finite() && self.norm_l2 > 0.0) {
            return param("signal norm must be positive and finite");
        }
        Ok(())
    }
}

/// Draws a signal from `spec`; deterministic in `(spec, seed)`.
pub fn generate_signal(spec: &SignalSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = stream_rng(seed, stream::SIGNAL);
    let x = match spec.class {
        SparsityClass::ExactSparse => sparse_unit(spec, &mut rng),
        SparsityClass::EffectivelySparse => effective_unit(spec, EFFECTIVE_FILL, &mut rng),
    };
    Ok(x.into_iter().map(|v| v * spec.norm_l2).collect())
}

fn draw_support<R: Rng>(spec: &SignalSpec, rng: &mut R) -> Vec<usize> {
    let (n, s) = (spec.ambient_dim, spec.sparsity);
    match spec.support_law {
        SupportLaw::Uniform => {
            let mut idx = index::sample(rng, n, s).into_vec();
            idx.sort_unstable();
            idx
        }
        SupportLaw::Contiguous => {
            let start = rng.random_range(0..n);
            (0..s).map(|k| (start + k) % n).collect()
        }
    }
}

fn draw_magnitude<R: Rng>(law: MagnitudeLaw, rng: &mut R) -> f64 {
    match law {
        MagnitudeLaw::Gaussian => rng.sample(StandardNormal),
        MagnitudeLaw::FlatSigns => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Unit-norm `s`-sparse vector; redraws while the raw norm is below 1e-12.
pub(crate) fn sparse_unit<R: Rng>(spec: &SignalSpec, rng: &mut R) -> Vec<f64> {
    loop {
        let mut x = vec![0.0; spec.ambient_dim];
        for i in draw_support(spec, rng) {
            x[i] = draw_magnitude(spec.magnitude_law, rng);
        }
        if norm2(&x) >= MIN_NORM {
            return normalized(&x).expect("nonzero");
        }
    }
}

/// Unit-norm member of `Σ^eff_s` with `‖x‖₁ ≈ fill·√s` when reachable.
///
/// An `s`-sparse head receives a flat random-sign tail on the complement,
/// scaled by bisection until the ℓ1/ℓ2 ratio meets `fill·√s`. Heads that
/// already exceed the target (flat heads, `s = 1`) are returned as-is.
pub(crate) fn effective_unit<R: Rng>(spec: &SignalSpec, fill: f64, rng: &mut R) -> Vec<f64> {
    let head = sparse_unit(spec, rng);
    let target = fill * (spec.sparsity as f64).sqrt();
    let tail: Vec<f64> = head
        .iter()
        .map(|&h| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            if h == 0.0 {
                sign
            } else {
                0.0
            }
        })
        .collect();
    let ratio = |alpha: f64| {
        let v: Vec<f64> = head.iter().zip(&tail).map(|(h, t)| h + alpha * t).collect();
        norm1(&v) / norm2(&v)
    };
    if tail.iter().all(|t| *t == 0.0) || ratio(0.0) >= target {
        return head;
    }
    // ratio(alpha) tends to sqrt(N - s) as alpha grows
    let mut hi = 1.0;
    while ratio(hi) < target && hi < 1e6 {
        hi *= 2.0;
    }
    if ratio(hi) < target {
        return finish(&head, &tail, hi);
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    finish(&head, &tail, lo)
}

fn finish(head: &[f64], tail: &[f64], alpha: f64) -> Vec<f64> {
    let v: Vec<f64> = head.iter().zip(tail).map(|(h, t)| h + alpha * t).collect();
    normalized(&v).expect("head is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_examples() {
        assert_eq!(
            hard_threshold(&[3.0, 1.0, -5.0, 0.0], 2).unwrap(),
            vec![3.0, 0.0, -5.0, 0.0]
        );
        assert_eq!(
            hard_threshold(&[3.0, 1.0, -5.0, 0.0], 4).unwrap(),
            vec![3.0, 1.0, -5.0, 0.0]
        );
        assert_eq!(
            hard_threshold(&[2.0, -2.0, 0.0], 1).unwrap(),
            vec![2.0, 0.0, 0.0]
        );
    }

    #[test]
    fn threshold_rejects_bad_sparsity() {
        assert!(matches!(
            hard_threshold(&[1.0, 2.0], 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            hard_threshold(&[1.0, 2.0], 3),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(effective_sparsity_ratio(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((effective_sparsity_ratio(&[0.5; 4]).unwrap() - 4.0).abs() < 1e-14);
        // (1.5 / sqrt(1.25))^2 = 2.25 / 1.25
        assert!((effective_sparsity_ratio(&[1.0, 0.5, 0.0, 0.0]).unwrap() - 1.8).abs() < 1e-14);
        assert!(matches!(
            effective_sparsity_ratio(&[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn one_sparse_unit_is_signed_basis_vector() {
        let x = generate_signal(&SignalSpec::exact(4, 1, 1.0), 7).unwrap();
        assert_eq!(support_size(&x), 1);
        let v = x.iter().find(|v| **v != 0.0).unwrap();
        assert!((v.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SignalSpec::effective(64, 4, 2.0);
        assert_eq!(
            generate_signal(&spec, 3).unwrap(),
            generate_signal(&spec, 3).unwrap()
        );
        assert_ne!(
            generate_signal(&spec, 3).unwrap(),
            generate_signal(&spec, 4).unwrap()
        );
    }

    #[test]
    fn effective_signal_in_class() {
        let x = generate_signal(&SignalSpec::effective(64, 4, 1.0), 1).unwrap();
        let r = norm1(&x) / norm2(&x);
        assert!(r <= 2.0, "ratio {r}");
        // nontrivial: the tail is populated
        assert!(support_size(&x) > 4);
        assert!((r - EFFECTIVE_FILL * 2.0).abs() < 1e-9);
    }

    #[test]
    fn contiguous_support_wraps() {
        let spec = SignalSpec {
            support_law: SupportLaw::Contiguous,
            magnitude_law: MagnitudeLaw::FlatSigns,
            ..SignalSpec::exact(8, 3, 1.0)
        };
        for seed in 0..20 {
            let x = generate_signal(&spec, seed).unwrap();
            let nz: Vec<usize> = (0..8).filter(|&i| x[i] != 0.0).collect();
            assert_eq!(nz.len(), 3);
            let runs = (0..8)
                .filter(|&i| x[i] != 0.0 && x[(i + 7) % 8] == 0.0)
                .count();
            assert_eq!(runs, 1);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(generate_signal(&SignalSpec::exact(4, 5, 1.0), 0).is_err());
        assert!(generate_signal(&SignalSpec::exact(4, 2, 0.0), 0).is_err());
    }

    fn brute_best_error(x: &[f64], s: usize) -> f64 {
        let n = x.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize > s {
                continue;
            }
            let err: f64 = (0..n)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| x[i] * x[i])
                .sum();
            best = best.min(err.sqrt());
        }
        best
    }

    proptest! {
        #[test]
        fn threshold_is_best_s_term(x in prop::collection::vec(-10.0f64..10.0, 1..=8), s in 1usize..=8) {
            let s = s.min(x.len());
            let h = hard_threshold(&x, s).unwrap();
            prop_assert!(support_size(&h) <= s);
            prop_assert!(dist2(&x, &h) <= brute_best_error(&x, s) + 1e-12);
            prop_assert_eq!(hard_threshold(&h, s).unwrap(), h);
        }

        #[test]
        fn generated_signals_meet_class(seed in any::<u64>(), n in 2usize..80, s in 1usize..6, norm in 0.1f64..5.0) {
            let s = s.min(n);
            let x = generate_signal(&SignalSpec::exact(n, s, norm), seed).unwrap();
            prop_assert!(support_size(&x) <= s);
            prop_assert!((norm2(&x) - norm).abs() <= 1e-12 * norm);
            prop_assert!(effective_sparsity_ratio(&x).unwrap() <= s as f64 * (1.0 + 1e-12));
            let y = generate_signal(&SignalSpec::effective(n, s, norm), seed).unwrap();
            prop_assert!(effective_sparsity_ratio(&y).unwrap() <= s as f64 * (1.0 + 1e-12));
            prop_assert!((norm2(&y) - norm).abs() <= 1e-12 * norm);
        }
    }
}
