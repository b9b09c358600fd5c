//! Empirical restricted-isometry estimates and Monte Carlo tail checks.
//!
//! ℓ1/ℓ2 defects use the normalization `(1/m)√(π/2)` with `m` the expected
//! row count; the ℓ2 upper estimate uses `1/√m`. Sampled and grid estimates
//! are lower bounds on the true supremum; grid estimates carry a Lipschitz
//! slack that makes them upper bounds once added.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{CirculantOperator, MeasurementEnsemble};
use crate::error::{param, Error, Result};
use crate::model::{effective_unit, norm1, norm2, sparse_unit, SignalSpec};
use crate::operator::LinearMap;
use crate::seeding::{derive_seed, stream, stream_rng};
use crate::SQRT_HALF_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipProperty {
    L1L2Sparse,
    L1L2Effective,
    L2Upper,
}

impl RipProperty {
    pub fn name(self) -> &'static str {
        match self {
            RipProperty::L1L2Sparse => "rip12",
            RipProperty::L1L2Effective => "rip12_eff",
            RipProperty::L2Upper => "l2_upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    RandomSample(usize),
    /// Angles per hyperspherical coordinate on every support.
    GridOverSupports(usize),
    ExactSupportEnum,
}

impl RipMethod {
    pub fn name(self) -> &'static str {
        match self {
            RipMethod::RandomSample(_) => "random_sample",
            RipMethod::GridOverSupports(_) => "grid",
            RipMethod::ExactSupportEnum => "exact",
        }
    }
}

impl fmt::Display for RipMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RipMethod::RandomSample(n) => write!(f, "random_sample({n})"),
            RipMethod::GridOverSupports(g) => write!(f, "grid({g})"),
            RipMethod::ExactSupportEnum => f.write_str("exact"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipEstimate {
    pub property: RipProperty,
    pub sparsity: usize,
    pub defect: f64,
    pub method: RipMethod,
    /// Candidates evaluated.
    pub evaluated: u128,
    pub slack: f64,
    pub seed: u64,
}

impl RipEstimate {
    /// Upper bound on the true defect for grid and exact methods.
    pub fn certified_upper(&self) -> Option<f64> {
        match self.method {
            RipMethod::RandomSample(_) => None,
            _ => Some(self.defect + self.slack),
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Lexicographic `k`-subsets of `0..n`.
pub fn supports(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Unit vectors in `R^s` on a hyperspherical angle grid with `g` points per
/// angle: polar angles at `(k + ½)π/g`, the azimuth at `2πk/g`.
pub fn sphere_grid(s: usize, g: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    if s == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let polar: Vec<f64> = (0..g).map(|k| (k as f64 + 0.5) * PI / g as f64).collect();
    let azimuth: Vec<f64> = (0..g).map(|k| 2.0 * PI * k as f64 / g as f64).collect();
    let mut out = Vec::new();
    let mut angles = vec![0usize; s - 1];
    loop {
        let mut v = vec![0.0; s];
        let mut prod = 1.0;
        for (d, &a) in angles.iter().enumerate() {
            let phi = if d == s - 2 { azimuth[a] } else { polar[a] };
            v[d] = prod * phi.cos();
            prod *= phi.sin();
        }
        v[s - 1] = prod;
        out.push(v);
        let mut d = 0;
        loop {
            if d == s - 1 {
                return out;
            }
            angles[d] += 1;
            if angles[d] < g {
                break;
            }
            angles[d] = 0;
            d += 1;
        }
    }
}

/// ℓ2 covering radius of [`sphere_grid`] on the unit sphere.
pub fn sphere_grid_radius(s: usize, g: usize) -> f64 {
    use std::f64::consts::PI;
    if s == 1 {
        return 0.0;
    }
    let polar = PI / (2.0 * g as f64);
    let azimuth = PI / g as f64;
    ((s - 2) as f64 * polar * polar + azimuth * azimuth).sqrt()
}

/// Which functional of `‖Mz‖` a defect measures.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Functional {
    /// `|scale·‖Mz‖₁ − 1|`
    L1,
    /// `scale·‖Mz‖₂ − 1`
    L2Upper,
}

impl Functional {
    fn defect(self, mz: &[f64], scale: f64) -> f64 {
        match self {
            Functional::L1 => (scale * norm1(mz) - 1.0).abs(),
            Functional::L2Upper => scale * norm2(mz) - 1.0,
        }
    }
}

fn sparse_product(dense: &DMatrix<f64>, support: &[usize], coef: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dense.nrows()];
    for (&j, &c) in support.iter().zip(coef) {
        for (o, a) in out.iter_mut().zip(dense.column(j).iter()) {
            *o += c * a;
        }
    }
    out
}

fn split_sparse(z: &[f64]) -> (Vec<usize>, Vec<f64>) {
    z.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, *v))
        .unzip()
}

fn check_common(n: usize, s: usize, budget: u128) -> Result<()> {
    if budget == 0 {
        return param("budget must be positive");
    }
    if s == 0 || s > n {
        return param(format!("sparsity must lie in 1..={n}, got {s}"));
    }
    Ok(())
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetOverflow { needed, budget });
    }
    Ok(())
}

fn fold_max(values: impl ParallelIterator<Item = f64>) -> f64 {
    values.reduce(|| f64::NEG_INFINITY, f64::max)
}

/// The `k`-th sparse sample; the sequence is nested in the budget.
fn sparse_sample(n: usize, s: usize, seed: u64, k: usize) -> Vec<f64> {
    let spec = SignalSpec::exact(n, s, 1.0);
    let mut rng = stream_rng(derive_seed(seed, &[0, k as u64]), stream::SAMPLES);
    sparse_unit(&spec, &mut rng)
}

/// The `k`-th extra effective sample: even `k` on the boundary
/// `‖z‖₁ = √s`, odd `k` in the interior.
fn effective_sample(n: usize, s: usize, seed: u64, k: usize) -> Vec<f64> {
    let spec = SignalSpec::effective(n, s, 1.0);
    let fill = if k.is_multiple_of(2) {
        1.0
    } else {
        crate::model::EFFECTIVE_FILL
    };
    let mut rng = stream_rng(derive_seed(seed, &[1, k as u64]), stream::SAMPLES);
    effective_unit(&spec, fill, &mut rng)
}

#[allow(clippy::too_many_arguments)]
fn estimate<M: LinearMap + ?Sized>(
    map: &M,
    scale: f64,
    functional: Functional,
    property: RipProperty,
    s: usize,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    let n = map.cols();
    check_common(n, s, budget)?;
    let dense = map.to_dense();
    let effective = property == RipProperty::L1L2Effective;
    let (defect, evaluated, slack) = match method {
        RipMethod::RandomSample(count) => {
            if count == 0 {
                return param("sample count must be positive");
            }
            let needed = if effective {
                2 * count as u128
            } else {
                count as u128
            };
            check_budget(needed, budget)?;
            let sparse = fold_max((0..count).into_par_iter().map(|k| {
                let z = sparse_sample(n, s, seed, k);
                let (sup, coef) = split_sparse(&z);
                functional.defect(&sparse_product(&dense, &sup, &coef), scale)
            }));
            let extra = if effective {
                fold_max((0..count).into_par_iter().map(|k| {
                    let z = effective_sample(n, s, seed, k);
                    let mz = map.apply(&z).expect("sample matches map width");
                    functional.defect(&mz, scale)
                }))
            } else {
                f64::NEG_INFINITY
            };
            (sparse.max(extra), needed, 0.0)
        }
        RipMethod::GridOverSupports(g) => {
            if effective {
                return param("effective-sparse sets are only estimated by sampling");
            }
            if g == 0 {
                return param("grid resolution must be positive");
            }
            let per_support = if s == 1 {
                2
            } else {
                (g as u128).saturating_pow(s as u32 - 1)
            };
            let needed = binomial(n, s).saturating_mul(per_support);
            check_budget(needed, budget)?;
            let grid = sphere_grid(s, g);
            let defect = fold_max(supports(n, s).into_par_iter().map(|sup| {
                grid.iter()
                    .map(|coef| functional.defect(&sparse_product(&dense, &sup, coef), scale))
                    .fold(f64::NEG_INFINITY, f64::max)
            }));
            let lipschitz = match functional {
                Functional::L1 => max_column_l1(&dense) * (s as f64).sqrt(),
                Functional::L2Upper => schur_bound(&dense),
            };
            (defect, needed, scale * lipschitz * sphere_grid_radius(s, g))
        }
        RipMethod::ExactSupportEnum => match functional {
            Functional::L1 => {
                if s != 1 {
                    return param("exact ℓ1 enumeration is only available for s = 1");
                }
                check_budget(n as u128, budget)?;
                let defect = (0..n)
                    .map(|j| {
                        (scale * dense.column(j).iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                (defect, n as u128, 0.0)
            }
            Functional::L2Upper => {
                let needed = binomial(n, s);
                check_budget(needed, budget)?;
                let defect = fold_max(supports(n, s).into_par_iter().map(|sup| {
                    let sub = dense.select_columns(&sup);
                    let gram = sub.tr_mul(&sub);
                    let top = SymmetricEigen::new(gram).eigenvalues.max().max(0.0);
                    scale * top.sqrt() - 1.0
                }));
                (defect, needed, 0.0)
            }
        },
    };
    Ok(RipEstimate {
        property,
        sparsity: s,
        defect,
        method,
        evaluated,
        slack,
        seed,
    })
}

fn max_column_l1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `√(‖A‖₁‖A‖∞) ≥ ‖A‖₂`.
fn schur_bound(a: &DMatrix<f64>) -> f64 {
    let row = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    (max_column_l1(a) * row).sqrt()
}

/// `(1/m)√(π/2)` with `m` the expected row count.
pub fn l1_normalization(e: &MeasurementEnsemble) -> f64 {
    SQRT_HALF_PI / e.expected_rows() as f64
}

/// RIP_{1,2} defect of an arbitrary map under a given normalization: the
/// largest `|scale·‖Mz‖₁ − 1|` over the method's unit candidates.
#[allow(clippy::too_many_arguments)]
pub fn rip12_of_map<M: LinearMap + ?Sized>(
    map: &M,
    scale: f64,
    s: usize,
    effective: bool,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    let property = if effective {
        RipProperty::L1L2Effective
    } else {
        RipProperty::L1L2Sparse
    };
    estimate(
        map,
        scale,
        Functional::L1,
        property,
        s,
        method,
        budget,
        seed,
    )
}

/// Largest `scale·‖Mz‖₂ − 1` over the method's unit candidates.
pub fn l2_upper_of_map<M: LinearMap + ?Sized>(
    map: &M,
    scale: f64,
    s: usize,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    estimate(
        map,
        scale,
        Functional::L2Upper,
        RipProperty::L2Upper,
        s,
        method,
        budget,
        seed,
    )
}

pub fn estimate_rip12(
    e: &MeasurementEnsemble,
    s: usize,
    effective: bool,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    rip12_of_map(
        &e.measurement_map(),
        l1_normalization(e),
        s,
        effective,
        method,
        budget,
        seed,
    )
}

/// Same as [`estimate_rip12`] over `R^{N+1}` through `B = R_I [Γ_g h]`.
pub fn estimate_rip12_extended(
    e: &MeasurementEnsemble,
    s: usize,
    effective: bool,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    rip12_of_map(
        &e.extended_map()?,
        l1_normalization(e),
        s,
        effective,
        method,
        budget,
        seed,
    )
}

pub fn estimate_l2_upper(
    e: &MeasurementEnsemble,
    s: usize,
    method: RipMethod,
    budget: u128,
    seed: u64,
) -> Result<RipEstimate> {
    let scale = 1.0 / (e.expected_rows() as f64).sqrt();
    l2_upper_of_map(&e.measurement_map(), scale, s, method, budget, seed)
}

/// CSV with columns `property,s,method,budget,defect_or_t,value,slack,seed`.
pub fn write_estimates_csv<W: Write>(
    estimates: &[RipEstimate],
    budget: u128,
    mut w: W,
) -> Result<()> {
    writeln!(w, "property,s,method,budget,defect_or_t,value,slack,seed")?;
    for e in estimates {
        writeln!(
            w,
            "{},{},{},{},defect,{},{},{}",
            e.property.name(),
            e.sparsity,
            e.method,
            budget,
            e.defect,
            e.slack,
            e.seed
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatistic {
    /// `(1/N)√(π/2)‖Γ_g y‖₁`
    L1,
    /// `(1/N)√(π/2)‖[Γ_g h] y_ext‖₁`
    L1Extended,
    /// `(1/N)‖Γ_g y‖₂²`
    L2Squared,
}

impl TailStatistic {
    pub fn name(self) -> &'static str {
        match self {
            TailStatistic::L1 => "l1",
            TailStatistic::L1Extended => "l1_ext",
            TailStatistic::L2Squared => "l2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub statistic: TailStatistic,
    pub t: f64,
    pub frequency: f64,
    /// `2exp(−Nt²/(πs))`; `None` for the ℓ2 statistic, whose constant is unspecified.
    pub bound: Option<f64>,
    /// Three binomial standard deviations at `p = min(bound, 1)`.
    pub band: Option<f64>,
}

impl TailRow {
    pub fn within_bound(&self) -> bool {
        match (self.bound, self.band) {
            (Some(b), Some(band)) => self.frequency <= b + band,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationTable {
    pub ambient_dim: usize,
    pub sparsity: f64,
    pub draws: usize,
    pub rows: Vec<TailRow>,
    pub l1_mean: f64,
    pub l1_std_error: f64,
    pub l1_ext_mean: f64,
    pub l1_ext_std_error: f64,
}

/// `2exp(−Nt²/(πs))`.
pub fn l1_tail_bound(n: usize, s: f64, t: f64) -> f64 {
    2.0 * (-(n as f64) * t * t / (std::f64::consts::PI * s)).exp()
}

pub fn binomial_band(p: f64, draws: usize) -> f64 {
    let p = p.min(1.0);
    3.0 * (p * (1.0 - p) / draws as f64).sqrt()
}

/// Unit extension `[y cos θ, sin θ]` with `θ = π/4`.
pub fn extend_unit(y: &[f64]) -> Vec<f64> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    y.iter().map(|v| v * c).chain([c]).collect()
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Empirical tail frequencies of the circulant concentration statistics
/// over `draws` fresh Gaussian `g` (and `h` for the extended variant).
///
/// `s` is the declared sparsity with `‖y‖₁ ≤ √s`; the extended bound uses
/// `s_ext = ‖y_ext‖₁²`.
pub fn concentration_trial(
    y: &[f64],
    s: f64,
    draws: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<ConcentrationTable> {
    let n = y.len();
    if n == 0 || draws < 2 {
        return param("need a nonempty y and at least two draws");
    }
    if ((norm2(y) - 1.0).abs()) > 1e-9 {
        return param("y must have unit norm");
    }
    if norm1(y) > s.sqrt() * (1.0 + 1e-12) {
        return param("y violates ‖y‖₁ ≤ √s");
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return param("thresholds must be nonnegative");
    }
    let y_ext = extend_unit(y);
    let s_ext = norm1(&y_ext).powi(2);
    // ‖Γ_g y‖ = ‖Γ_y g‖ in both norms, so one operator serves every draw
    let op = CirculantOperator::new(y.to_vec())?;
    let tail_weight = y_ext[n];
    let head: Vec<f64> = y_ext[..n].to_vec();
    let head_op = CirculantOperator::new(head)?;
    let stats: Vec<(f64, f64, f64)> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let child = derive_seed(seed, &[k as u64]);
            let mut rg = stream_rng(child, stream::GENERATOR);
            let g: Vec<f64> = (0..n).map(|_| rg.sample(StandardNormal)).collect();
            let mut rh = stream_rng(child, stream::EXTRA_COLUMN);
            let h: Vec<f64> = (0..n).map(|_| rh.sample(StandardNormal)).collect();
            let v = op.apply(&g).expect("length n");
            let l1 = SQRT_HALF_PI * norm1(&v) / n as f64;
            let l2 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
            // [Γ_g h] y_ext = Γ_g y_head + y_{N+1} h, and Γ_g y_head is a permutation of Γ_{y_head} g
            let w = head_op.apply(&g).expect("length n");
            let corr = reverse_rows(&w);
            let ext: f64 = corr
                .iter()
                .zip(&h)
                .map(|(a, b)| (a + tail_weight * b).abs())
                .sum();
            (l1, SQRT_HALF_PI * ext / n as f64, l2)
        })
        .collect();
    let l1: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let l1_ext: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let l2: Vec<f64> = stats.iter().map(|s| s.2).collect();
    let freq = |vals: &[f64], t: f64| {
        vals.iter().filter(|v| (*v - 1.0).abs() >= t).count() as f64 / draws as f64
    };
    let mut rows = Vec::new();
    for &t in t_grid {
        for (stat, vals, sd) in [
            (TailStatistic::L1, &l1, Some(s)),
            (TailStatistic::L1Extended, &l1_ext, Some(s_ext)),
            (TailStatistic::L2Squared, &l2, None),
        ] {
            let bound = sd.map(|sv| l1_tail_bound(n, sv, t));
            rows.push(TailRow {
                statistic: stat,
                t,
                frequency: freq(vals, t),
                bound,
                band: bound.map(|b| binomial_band(b, draws)),
            });
        }
    }
    let (l1_mean, l1_std_error) = mean_and_se(&l1);
    let (l1_ext_mean, l1_ext_std_error) = mean_and_se(&l1_ext);
    Ok(ConcentrationTable {
        ambient_dim: n,
        sparsity: s,
        draws,
        rows,
        l1_mean,
        l1_std_error,
        l1_ext_mean,
        l1_ext_std_error,
    })
}

/// Maps `Γ_y g` to `Γ_g y` under the row layout `x_{(j−i) mod N}`.
fn reverse_rows(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|r| v[(2 * n - r - 2) % n]).collect()
}

/// Least-squares slope of `ln(frequency)` against `t²` over rows of one
/// statistic with nonzero frequency.
pub fn log_tail_slope(rows: &[TailRow], stat: TailStatistic) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.statistic == stat && r.frequency > 0.0 && r.t > 0.0)
        .map(|r| (r.t * r.t, r.frequency.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_concentration_csv<W: Write>(tables: &[ConcentrationTable], mut w: W) -> Result<()> {
    writeln!(w, "N,s,statistic,t,empirical_freq,paper_bound")?;
    for tab in tables {
        for r in &tab.rows {
            let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                tab.ambient_dim,
                tab.sparsity,
                r.statistic.name(),
                r.t,
                r.frequency,
                bound
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::GeneratorLaw;

    #[test]
    fn subsets_and_grid_sizes() {
        assert_eq!(supports(4, 2).len(), 6);
        assert_eq!(binomial(24, 3), 2024);
        assert_eq!(supports(5, 5), vec![vec![0, 1, 2, 3, 4]]);
        let grid = sphere_grid(3, 8);
        assert_eq!(grid.len(), 64);
        assert!(grid.iter().all(|v| (norm2(v) - 1.0).abs() < 1e-12));
        assert_eq!(sphere_grid(1, 5).len(), 2);
    }

    #[test]
    fn grid_radius_covers_random_points() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (s, g) in [(2, 16), (3, 12)] {
            let grid = sphere_grid(s, g);
            let r = sphere_grid_radius(s, g);
            for _ in 0..500 {
                let v: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
                let v = crate::model::normalized(&v).unwrap();
                let best = grid
                    .iter()
                    .map(|p| crate::model::dist2(p, &v))
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= r + 1e-12, "s={s}: {best} > {r}");
            }
        }
    }

    #[test]
    fn identity_map_has_zero_defect() {
        let id = DMatrix::<f64>::identity(8, 8);
        let e = rip12_of_map(&id, 1.0, 1, false, RipMethod::ExactSupportEnum, 100, 0).unwrap();
        assert_eq!(e.defect, 0.0);
        assert_eq!(e.slack, 0.0);
        let r = rip12_of_map(&id, 1.0, 1, false, RipMethod::RandomSample(50), 100, 0).unwrap();
        assert!(r.defect < 1e-15);
    }

    #[test]
    fn doubled_identity_l2_upper() {
        let a = DMatrix::<f64>::identity(6, 6) * 2.0;
        let e = l2_upper_of_map(&a, 1.0, 1, RipMethod::ExactSupportEnum, 100, 0).unwrap();
        assert!((e.defect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_l1_matches_column_sums() {
        let e = MeasurementEnsemble::sample(30, 20, GeneratorLaw::Gaussian, false, 5).unwrap();
        let est = estimate_rip12(&e, 1, false, RipMethod::ExactSupportEnum, 1000, 0).unwrap();
        let scale = l1_normalization(&e);
        let want = crate::operator::column_l1_norms(&e.measurement_map())
            .iter()
            .map(|c| (scale * c - 1.0).abs())
            .fold(0.0, f64::max);
        assert!((est.defect - want).abs() <= 1e-12);
        assert!(estimate_rip12(&e, 2, false, RipMethod::ExactSupportEnum, 1000, 0).is_err());
    }

    #[test]
    fn budget_errors() {
        let e = MeasurementEnsemble::sample(30, 20, GeneratorLaw::Gaussian, false, 5).unwrap();
        assert!(estimate_rip12(&e, 1, false, RipMethod::RandomSample(10), 0, 0).is_err());
        let over = estimate_l2_upper(&e, 3, RipMethod::ExactSupportEnum, 100, 0);
        assert!(matches!(
            over,
            Err(Error::BudgetOverflow {
                needed: 4060,
                budget: 100
            })
        ));
    }

    #[test]
    fn nested_samples_are_monotone() {
        let e = MeasurementEnsemble::sample(40, 20, GeneratorLaw::Gaussian, true, 3).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for count in [10, 100, 1000] {
            let sp =
                estimate_rip12(&e, 3, false, RipMethod::RandomSample(count), u128::MAX, 9).unwrap();
            let ef =
                estimate_rip12(&e, 3, true, RipMethod::RandomSample(count), u128::MAX, 9).unwrap();
            assert!(sp.defect >= prev);
            assert!(sp.defect <= ef.defect);
            prev = sp.defect;
        }
    }

    #[test]
    fn extended_agrees_on_first_block() {
        let e = MeasurementEnsemble::sample(20, 12, GeneratorLaw::Gaussian, true, 3).unwrap();
        let ext =
            estimate_rip12_extended(&e, 1, false, RipMethod::ExactSupportEnum, 100, 0).unwrap();
        let base = estimate_rip12(&e, 1, false, RipMethod::ExactSupportEnum, 100, 0).unwrap();
        let scale = l1_normalization(&e);
        let h = e.extra_column().unwrap();
        let hcol = (scale * e.index_set().iter().map(|&i| h[i].abs()).sum::<f64>() - 1.0).abs();
        assert!((ext.defect - base.defect.max(hcol)).abs() < 1e-12);
    }

    #[test]
    fn concentration_basics() {
        let mut y = vec![0.0; 256];
        y[0] = 1.0;
        let tab = concentration_trial(&y, 1.0, 400, &[0.0, 0.1, 0.3], 4).unwrap();
        for r in tab.rows.iter().filter(|r| r.t == 0.0) {
            assert_eq!(r.frequency, 1.0);
        }
        assert!(tab.rows.iter().all(|r| r.within_bound()));
        assert!((tab.l1_mean - 1.0).abs() <= 4.0 * tab.l1_std_error);
        assert!((tab.l1_ext_mean - 1.0).abs() <= 4.0 * tab.l1_ext_std_error);
        assert!(concentration_trial(&[0.6, 0.8], 1.0, 10, &[0.1], 0).is_err());
    }

    #[test]
    fn reversed_rows_give_gamma_g_y() {
        let g: Vec<f64> = (0..7).map(|i| (i as f64 * 1.3).sin()).collect();
        let y: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).cos()).collect();
        let direct = CirculantOperator::new(g.clone())
            .unwrap()
            .apply(&y)
            .unwrap();
        let via = reverse_rows(&CirculantOperator::new(y).unwrap().apply(&g).unwrap());
        assert!(crate::model::dist2(&direct, &via) < 1e-12);
    }
}
