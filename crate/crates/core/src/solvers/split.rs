use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::{SolveReport, SolveStatus};
use crate::error::{check_len, ensure_finite, param, Result};
use crate::operator::LinearMap;

/// Interval constraints `lo_i ≤ (Mz)_i ≤ hi_i` on the mapped vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedConstraints {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl MappedConstraints {
    pub fn unconstrained(rows: usize) -> Self {
        MappedConstraints {
            lo: vec![f64::NEG_INFINITY; rows],
            hi: vec![f64::INFINITY; rows],
        }
    }

    pub fn boxes(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| l.is_nan() || h.is_nan() || l > h)
        {
            return param("box constraints need lo <= hi");
        }
        Ok(MappedConstraints { lo, hi })
    }

    /// `sign_i · ((Mz)_i + offset_i) ≥ margin` for each listed `(row, sign)`.
    pub fn signs(rows: usize, pairs: &[(usize, f64)], offset: &[f64], margin: f64) -> Result<Self> {
        check_len(rows, offset.len())?;
        let mut c = Self::unconstrained(rows);
        for &(i, s) in pairs {
            if i >= rows {
                return param(format!("sign constraint on row {i} of {rows}"));
            }
            if s > 0.0 {
                c.lo[i] = c.lo[i].max(margin - offset[i]);
            } else if s < 0.0 {
                c.hi[i] = c.hi[i].min(-margin - offset[i]);
            } else {
                return param("sign constraints need a nonzero sign");
            }
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Largest violation of the intervals by `v`.
    pub fn violation(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (l, h))| (l - x).max(x - h).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSettings {
    pub primal_eps: f64,
    pub dual_eps: f64,
    pub max_iters: usize,
    /// Initial penalty `ρ`.
    pub penalty: f64,
    pub relaxation: f64,
    pub adaptive_penalty: bool,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            primal_eps: 1e-7,
            dual_eps: 1e-7,
            max_iters: 50_000,
            penalty: 1.0,
            relaxation: 1.6,
            adaptive_penalty: true,
        }
    }
}

/// `min w‖z‖₁  s.t.  ‖z‖₂ ≤ R,  lo ≤ Mz ≤ hi`.
pub struct SplitProblem<'a> {
    pub l1_weight: f64,
    pub map: &'a dyn LinearMap,
    /// `f64::INFINITY` drops the ball.
    pub ball_radius: f64,
    pub constraints: MappedConstraints,
    pub settings: SplitSettings,
}

impl<'a> SplitProblem<'a> {
    pub fn new(map: &'a dyn LinearMap, constraints: MappedConstraints) -> Self {
        SplitProblem {
            l1_weight: 1.0,
            map,
            ball_radius: f64::INFINITY,
            constraints,
            settings: SplitSettings::default(),
        }
    }

    pub fn with_ball(mut self, radius: f64) -> Self {
        self.ball_radius = radius;
        self
    }

    pub fn with_settings(mut self, settings: SplitSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if !(self.l1_weight > 0.0 && self.l1_weight.is_finite()) {
            return param("l1 weight must be positive");
        }
        if self.ball_radius.is_nan() || self.ball_radius <= 0.0 {
            return param("ball radius must be positive");
        }
        if !(s.primal_eps > 0.0 && s.dual_eps > 0.0 && s.penalty > 0.0) {
            return param("tolerances and penalty must be positive");
        }
        if !(s.relaxation > 0.0 && s.relaxation < 2.0) {
            return param("relaxation must lie in (0, 2)");
        }
        check_len(self.map.rows(), self.constraints.len())?;
        if self
            .constraints
            .lo
            .iter()
            .zip(&self.constraints.hi)
            .any(|(l, h)| l > h)
        {
            return param("empty box constraint");
        }
        Ok(())
    }
}

fn prox_l1_ball(v: &[f64], thresh: f64, radius: f64) -> Vec<f64> {
    let mut p: Vec<f64> = v
        .iter()
        .map(|&x| x.signum() * (x.abs() - thresh).max(0.0))
        .collect();
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > radius {
        let f = radius / norm;
        p.iter_mut().for_each(|x| *x *= f);
    }
    p
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Over-relaxed ADMM on `f(p) + g(v)` subject to `p = x`, `v = Mx`, with
/// `f = w‖·‖₁ + ι_ball` and `g` the box indicator. The map is scaled to unit
/// spectral norm and the `x`-update uses a precomputed `(I + MᵀM)⁻¹`.
///
/// The returned point is the proximal iterate `p`, so it always lies in the
/// ball; `primal_residual` is its box violation in original units. Optimal
/// also requires the duality gap against the multiplier of `v = Mx` to be
/// within `dual_eps` relative to the objective.
pub fn split_solve(p: &SplitProblem<'_>) -> Result<SolveReport> {
    p.validate()?;
    let start = Instant::now();
    let st = p.settings;
    let n = p.map.cols();
    let m = p.map.rows();
    let dense = p.map.to_dense();
    ensure_finite(dense.as_slice())?;
    let sigma = spectral_norm(&dense).max(1e-300);
    let mc = &dense / sigma;
    let lo: Vec<f64> = p.constraints.lo.iter().map(|l| l / sigma).collect();
    let hi: Vec<f64> = p.constraints.hi.iter().map(|h| h / sigma).collect();
    let kinv = (DMatrix::identity(n, n) + mc.tr_mul(&mc))
        .cholesky()
        .expect("I + MᵀM is positive definite")
        .inverse();

    let alpha = st.relaxation;
    let mut rho = st.penalty;
    let mut pz = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; m];
    let mut status = SolveStatus::MaxIters;
    let mut r_norm = f64::INFINITY;
    let mut s_norm = f64::INFINITY;
    let mut iterations = 0;
    // penalty changes get rarer so the scheme settles on a fixed ρ
    let mut adapt_gap = 20;
    let mut next_adapt = adapt_gap;

    while iterations < st.max_iters {
        iterations += 1;
        let a = DVector::from_iterator(n, pz.iter().zip(&u1).map(|(a, b)| a - b));
        let b = DVector::from_iterator(m, v.iter().zip(&u2).map(|(a, b)| a - b));
        let x = &kinv * (a + mc.tr_mul(&b));
        let mx = &mc * &x;

        let xr: Vec<f64> = x
            .iter()
            .zip(&pz)
            .map(|(xi, pi)| alpha * xi + (1.0 - alpha) * pi)
            .collect();
        let vr: Vec<f64> = mx
            .iter()
            .zip(&v)
            .map(|(xi, vi)| alpha * xi + (1.0 - alpha) * vi)
            .collect();

        let shifted: Vec<f64> = xr.iter().zip(&u1).map(|(a, b)| a + b).collect();
        let p_new = prox_l1_ball(&shifted, p.l1_weight / rho, p.ball_radius);
        let v_new: Vec<f64> = vr
            .iter()
            .zip(&u2)
            .zip(lo.iter().zip(&hi))
            .map(|((a, b), (l, h))| (a + b).clamp(*l, *h))
            .collect();

        for i in 0..n {
            u1[i] += xr[i] - p_new[i];
        }
        for i in 0..m {
            u2[i] += vr[i] - v_new[i];
        }

        let check = iterations % 10 == 0 || iterations == st.max_iters;
        if check {
            let dp = DVector::from_iterator(n, p_new.iter().zip(&pz).map(|(a, b)| a - b));
            let dv = DVector::from_iterator(m, v_new.iter().zip(&v).map(|(a, b)| a - b));
            let dual = (dp + mc.tr_mul(&dv)) * rho;
            s_norm = dual.amax();
            r_norm = max_abs_diff(x.as_slice(), &p_new).max(max_abs_diff(mx.as_slice(), &v_new));
        }
        pz = p_new;
        v = v_new;

        if check {
            if r_norm <= st.primal_eps && s_norm <= st.dual_eps {
                let mp = &dense * DVector::from_column_slice(&pz);
                let objective = p.l1_weight * pz.iter().map(|v| v.abs()).sum::<f64>();
                let lambda: Vec<f64> = u2.iter().map(|u| rho * u).collect();
                let bound = dual_bound(&mc, &lambda, &lo, &hi, p.l1_weight, p.ball_radius);
                if p.constraints.violation(mp.as_slice()) <= st.primal_eps
                    && objective - bound <= st.dual_eps * (1.0 + objective.abs())
                {
                    status = SolveStatus::Optimal;
                    break;
                }
            }
            if st.adaptive_penalty && iterations >= next_adapt {
                let factor = if r_norm > 10.0 * s_norm {
                    2.0
                } else if s_norm > 10.0 * r_norm {
                    0.5
                } else {
                    1.0
                };
                let next = (rho * factor).clamp(1e-6, 1e6);
                if next != rho {
                    let scale = rho / next;
                    u1.iter_mut().for_each(|u| *u *= scale);
                    u2.iter_mut().for_each(|u| *u *= scale);
                    rho = next;
                    adapt_gap *= 2;
                }
                next_adapt = iterations + adapt_gap;
            }
        }
    }

    let mapped = p.map.apply(&pz)?;
    let primal_residual = p.constraints.violation(&mapped);
    Ok(SolveReport {
        objective: p.l1_weight * pz.iter().map(|v| v.abs()).sum::<f64>(),
        solution: pz,
        status,
        primal_residual,
        dual_residual: s_norm,
        iterations,
        runtime_ms: start.elapsed().as_millis() as u64,
        farkas: None,
    })
}

/// Lagrange dual value at the multiplier `λ` of `v = Mx`, after projecting
/// `λ` onto the dual domain; a lower bound on the optimum.
fn dual_bound(
    mc: &DMatrix<f64>,
    lambda: &[f64],
    lo: &[f64],
    hi: &[f64],
    w: f64,
    radius: f64,
) -> f64 {
    let lambda: Vec<f64> = lambda
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&l, (lo, hi))| {
            if (l > 0.0 && hi.is_infinite()) || (l < 0.0 && lo.is_infinite()) {
                0.0
            } else {
                l
            }
        })
        .collect();
    let mut mt = mc.tr_mul(&DVector::from_column_slice(&lambda));
    let mut scale = 1.0;
    if radius.is_infinite() {
        let peak = mt.amax();
        if peak > w {
            scale = w / peak;
            mt *= scale;
        }
    }
    let support: f64 = lambda
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&l, (lo, hi))| {
            let l = l * scale;
            if l > 0.0 {
                l * hi
            } else if l < 0.0 {
                l * lo
            } else {
                0.0
            }
        })
        .sum();
    let excess: f64 = if radius.is_infinite() {
        0.0
    } else {
        mt.iter()
            .map(|v| (v.abs() - w).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
            * radius
    };
    -excess - support
}

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = a.tr_mul(a);
    let mut v = DVector::from_element(a.ncols(), 1.0 / (a.ncols() as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / norm;
        if (next - lambda).abs() <= 1e-12 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{lp_solve, LpProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_space_on_the_ball() {
        let id = DMatrix::<f64>::identity(4, 4);
        let mut c = MappedConstraints::unconstrained(4);
        c.lo[0] = 0.5;
        let r = split_solve(&SplitProblem::new(&id, c).with_ball(1.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.solution[0] - 0.5).abs() < 1e-6, "{:?}", r.solution);
        assert!(r.solution[1..].iter().all(|v| v.abs() < 1e-6));
        assert!(r.primal_residual <= 1e-6);
    }

    #[test]
    fn equality_without_ball() {
        let id = DMatrix::<f64>::identity(3, 3);
        let mut c = MappedConstraints::unconstrained(3);
        c.lo[0] = 1.0;
        c.hi[0] = 1.0;
        let r = split_solve(&SplitProblem::new(&id, c)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(dist(&r.solution, &[1.0, 0.0, 0.0]) < 1e-6);
    }

    #[test]
    fn sign_constraints_translate_to_boxes() {
        let c =
            MappedConstraints::signs(3, &[(0, 1.0), (2, -1.0)], &[0.5, 0.0, -1.0], 0.0).unwrap();
        assert_eq!(c.lo, vec![-0.5, f64::NEG_INFINITY, f64::NEG_INFINITY]);
        assert_eq!(c.hi, vec![f64::INFINITY, f64::INFINITY, 1.0]);
        assert!(MappedConstraints::signs(3, &[(3, 1.0)], &[0.0; 3], 0.0).is_err());
        assert!(MappedConstraints::boxes(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn rejects_bad_settings() {
        let id = DMatrix::<f64>::identity(2, 2);
        let mut p = SplitProblem::new(&id, MappedConstraints::unconstrained(2));
        p.settings.penalty = 0.0;
        assert!(split_solve(&p).is_err());
        let q = SplitProblem::new(&id, MappedConstraints::unconstrained(3));
        assert!(split_solve(&q).is_err());
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Random sign-consistency instance whose planted point has at least unit margin.
    fn tiny_instance(seed: u64) -> (DMatrix<f64>, Vec<(usize, f64)>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=6);
        let m = rng.random_range(2..=6);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax = &a * DVector::from_column_slice(&x);
        let offset: Vec<f64> = (0..m)
            .map(|i| -ax[i] + rng.random_range(-1.0..1.0))
            .collect();
        let signs: Vec<(usize, f64)> = (0..m)
            .map(|i| (i, if ax[i] + offset[i] >= 0.0 { 1.0 } else { -1.0 }))
            .collect();
        (a, signs, offset)
    }

    /// The same program as an LP over `z = z⁺ − z⁻`.
    fn lp_reformulation(a: &DMatrix<f64>, c: &MappedConstraints) -> LpProblem {
        let (m, n) = a.shape();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..m {
            let row: Vec<f64> = (0..n)
                .map(|j| a[(i, j)])
                .chain((0..n).map(|j| -a[(i, j)]))
                .collect();
            if c.hi[i].is_finite() {
                rows.push(row.clone());
                rhs.push(c.hi[i]);
            }
            if c.lo[i].is_finite() {
                rows.push(row.iter().map(|v| -v).collect());
                rhs.push(-c.lo[i]);
            }
        }
        let g = DMatrix::from_fn(rows.len(), 2 * n, |i, j| rows[i][j]);
        LpProblem::new(vec![1.0; 2 * n]).with_inequalities(g, rhs)
    }

    #[test]
    fn agrees_with_lp_when_ball_is_inactive() {
        let mut compared = 0;
        for seed in 0..60 {
            let (a, signs, offset) = tiny_instance(seed);
            let c = MappedConstraints::signs(a.nrows(), &signs, &offset, 0.0).unwrap();
            let lp = lp_solve(&lp_reformulation(&a, &c)).unwrap();
            assert!(lp.is_optimal());
            let n = a.ncols();
            let z: Vec<f64> = (0..n)
                .map(|j| lp.solution[j] - lp.solution[n + j])
                .collect();
            let radius = 10.0;
            if dist(&z, &vec![0.0; n]) > 0.5 * radius {
                continue;
            }
            let r = split_solve(&SplitProblem::new(&a, c.clone()).with_ball(radius)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
            assert!(
                (r.objective - lp.objective).abs() <= 1e-6,
                "seed {seed}: {} vs {}",
                r.objective,
                lp.objective
            );
            compared += 1;
        }
        assert!(compared >= 50);
    }

    #[test]
    fn never_beaten_by_sampled_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 100..120 {
            let (a, signs, offset) = tiny_instance(seed);
            let c = MappedConstraints::signs(a.nrows(), &signs, &offset, 0.0).unwrap();
            let radius = 3.0;
            let r = split_solve(&SplitProblem::new(&a, c.clone()).with_ball(radius)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            let n = a.ncols();
            for _ in 0..2000 {
                let z: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
                if dist(&z, &vec![0.0; n]) > radius {
                    continue;
                }
                let mz = &a * DVector::from_column_slice(&z);
                if c.violation(mz.as_slice()) == 0.0 {
                    let obj: f64 = z.iter().map(|v| v.abs()).sum();
                    assert!(r.objective <= obj + 1e-6, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn deterministic_reports() {
        let (a, signs, offset) = tiny_instance(3);
        let c = MappedConstraints::signs(a.nrows(), &signs, &offset, 0.0).unwrap();
        let mut r1 = split_solve(&SplitProblem::new(&a, c.clone()).with_ball(2.0)).unwrap();
        let mut r2 = split_solve(&SplitProblem::new(&a, c).with_ball(2.0)).unwrap();
        r1.runtime_ms = 0;
        r2.runtime_ms = 0;
        assert_eq!(r1, r2);
    }
}
