//! Reconstruction programs.
//!
//! Each program assembles a solver problem from an ensemble and an
//! observation, solves it, and re-checks the estimate against its own
//! constraints on an independent code path (the FFT operator).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circulant::{GeneratorLaw, MeasurementEnsemble};
use crate::error::{check_len, ensure_finite, param, Error, Result};
use crate::model::{
    best_term_error_l1, direction_error, dist2, hard_threshold, norm1, norm2, normalized,
};
use crate::operator::LinearMap;
use crate::quantize::{quantize_scalar, scalar_quantize, sign, QuantizedObservation};
use crate::solvers::{
    lp_solve, split_solve, LpProblem, MappedConstraints, SolveReport, SolveStatus, SplitProblem,
    SplitSettings,
};
use crate::SQRT_HALF_PI;

/// Per-side shrink of half-open and strict constraints in the LP programs.
pub const CONSISTENCY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ht")]
    HardThreshold,
    #[serde(rename = "lp")]
    OneBitLp,
    #[serde(rename = "cp")]
    OneBitCp,
    #[serde(rename = "cpusc")]
    DitheredScalarCp,
    #[serde(rename = "linf_bp")]
    LinfBp,
    #[serde(rename = "l1_bpdn")]
    L1Bpdn,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::HardThreshold,
        Method::OneBitLp,
        Method::OneBitCp,
        Method::DitheredScalarCp,
        Method::LinfBp,
        Method::L1Bpdn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::HardThreshold => "ht",
            Method::OneBitLp => "lp",
            Method::OneBitCp => "cp",
            Method::DitheredScalarCp => "cpusc",
            Method::LinfBp => "linf_bp",
            Method::L1Bpdn => "l1_bpdn",
        }
    }

    pub fn needs_sparsity(self) -> bool {
        self == Method::HardThreshold
    }

    pub fn needs_energy_bound(self) -> bool {
        matches!(self, Method::OneBitCp | Method::DitheredScalarCp)
    }

    pub fn needs_resolution(self) -> bool {
        matches!(self, Method::DitheredScalarCp | Method::LinfBp)
    }

    pub fn needs_noise_budget(self) -> bool {
        self == Method::L1Bpdn
    }

    /// Programs fed by sign measurements.
    pub fn is_one_bit(self) -> bool {
        matches!(
            self,
            Method::HardThreshold | Method::OneBitLp | Method::OneBitCp
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Parameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub method: Method,
    /// Unit-norm for the direction-only programs (HT, LP).
    pub estimate: Vec<f64>,
    /// The solver's optimizer before any normalization.
    pub raw_estimate: Vec<f64>,
    pub consistency_ok: bool,
    pub report: SolveReport,
    pub l2_error: Option<f64>,
    /// `‖x − raw‖₂`; differs from `l2_error` only for LP.
    pub raw_l2_error: Option<f64>,
    pub direction_error: Option<f64>,
    /// Set by [`score`](Self::score) when the truth violates the energy bound.
    pub model_mismatch: bool,
    pub energy_bound: Option<f64>,
}

impl RecoveryResult {
    fn new(
        method: Method,
        estimate: Vec<f64>,
        raw: Vec<f64>,
        consistency_ok: bool,
        report: SolveReport,
    ) -> Self {
        RecoveryResult {
            method,
            estimate,
            raw_estimate: raw,
            consistency_ok,
            report,
            l2_error: None,
            raw_l2_error: None,
            direction_error: None,
            model_mismatch: false,
            energy_bound: None,
        }
    }

    /// Fills the error metrics against a known ground truth.
    pub fn score(&mut self, truth: &[f64]) {
        if truth.len() != self.estimate.len() {
            return;
        }
        self.l2_error = Some(dist2(truth, &self.estimate));
        self.raw_l2_error = Some(dist2(truth, &self.raw_estimate));
        self.direction_error = direction_error(truth, &self.estimate);
        if let Some(r) = self.energy_bound {
            self.model_mismatch = norm2(truth) > r;
        }
    }
}

/// A program together with its method-specific parameters.
#[derive(Debug, Clone)]
pub struct RecoveryProblem<'a> {
    pub method: Method,
    pub ensemble: &'a MeasurementEnsemble,
    pub observation: &'a QuantizedObservation,
    pub sparsity: Option<usize>,
    pub energy_bound: Option<f64>,
    pub resolution: Option<f64>,
    pub noise_budget: Option<f64>,
}

impl<'a> RecoveryProblem<'a> {
    pub fn new(
        method: Method,
        ensemble: &'a MeasurementEnsemble,
        observation: &'a QuantizedObservation,
    ) -> Self {
        RecoveryProblem {
            method,
            ensemble,
            observation,
            sparsity: None,
            energy_bound: None,
            resolution: None,
            noise_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.method;
        let check = |name: &str, needed: bool, present: bool| {
            if needed != present {
                let verb = if needed { "requires" } else { "does not take" };
                param(format!("method {m} {verb} {name}"))
            } else {
                Ok(())
            }
        };
        check("sparsity", m.needs_sparsity(), self.sparsity.is_some())?;
        check(
            "an energy bound",
            m.needs_energy_bound(),
            self.energy_bound.is_some(),
        )?;
        check(
            "a resolution",
            m.needs_resolution(),
            self.resolution.is_some(),
        )?;
        check(
            "a noise budget",
            m.needs_noise_budget(),
            self.noise_budget.is_some(),
        )?;
        check_len(self.ensemble.realized_rows(), self.observation.codes.len())
    }

    pub fn solve(&self) -> Result<RecoveryResult> {
        self.validate()?;
        let e = self.ensemble;
        let obs = self.observation;
        match self.method {
            Method::HardThreshold => recover_ht(e, &obs.codes, self.sparsity.unwrap_or(0)),
            Method::OneBitLp => recover_lp(e, &obs.codes),
            Method::OneBitCp => {
                recover_cp(e, &obs.codes, &obs.tau, self.energy_bound.unwrap_or(0.0))
            }
            Method::DitheredScalarCp => recover_cpusc(
                e,
                &obs.codes,
                &obs.tau,
                &obs.uniform,
                self.energy_bound.unwrap_or(0.0),
                self.resolution.unwrap_or(0.0),
            ),
            Method::LinfBp => recover_linf_bp(e, &obs.codes, self.resolution.unwrap_or(0.0)),
            Method::L1Bpdn => recover_l1_bpdn(e, &obs.codes, self.noise_budget.unwrap_or(0.0)),
        }
    }
}

fn check_signs(y: &[f64]) -> Result<()> {
    if y.iter().any(|v| *v != 1.0 && *v != -1.0) {
        return param("one-bit observations must be ±1");
    }
    Ok(())
}

fn closed_form_report(solution: Vec<f64>) -> SolveReport {
    SolveReport {
        objective: norm1(&solution),
        solution,
        status: SolveStatus::Optimal,
        primal_residual: 0.0,
        dual_residual: 0.0,
        iterations: 0,
        runtime_ms: 0,
        farkas: None,
    }
}

/// `normalize(H_s(A* y))`.
pub fn recover_ht(e: &MeasurementEnsemble, y: &[f64], s: usize) -> Result<RecoveryResult> {
    check_len(e.realized_rows(), y.len())?;
    check_signs(y)?;
    let back = e.adjoint(y, false)?;
    let thresholded = hard_threshold(&back, s)?;
    let estimate = normalized(&thresholded).ok_or(Error::DegenerateEstimate)?;
    let ax = e.apply(&estimate, false)?;
    let consistent = ax.iter().zip(y).all(|(a, b)| sign(*a) == *b);
    Ok(RecoveryResult::new(
        Method::HardThreshold,
        estimate,
        thresholded,
        consistent,
        closed_form_report(back),
    ))
}

/// `[A, −A]` as a dense LP block over `z = z⁺ − z⁻`.
fn split_block(a: &DMatrix<f64>, row_scale: &[f64]) -> DMatrix<f64> {
    let (m, n) = a.shape();
    DMatrix::from_fn(m, 2 * n, |i, j| {
        if j < n {
            row_scale[i] * a[(i, j)]
        } else {
            -row_scale[i] * a[(i, j - n)]
        }
    })
}

fn merge_split(x: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|j| x[j] - x[n + j]).collect()
}

/// `min ‖z‖₁  s.t.  y_i (Az)_i ≥ 0,  Σ y_i (Az)_i = 1`.
pub fn recover_lp(e: &MeasurementEnsemble, y: &[f64]) -> Result<RecoveryResult> {
    check_len(e.realized_rows(), y.len())?;
    check_signs(y)?;
    let n = e.ambient_dim();
    let a = e.measurement_map().to_dense();
    let neg_y: Vec<f64> = y.iter().map(|v| -v).collect();
    let g = split_block(&a, &neg_y);
    let signed = split_block(&a, y);
    let eq = DMatrix::from_fn(1, 2 * n, |_, j| signed.column(j).sum());
    let lp = LpProblem::new(vec![1.0; 2 * n])
        .with_inequalities(g, vec![0.0; y.len()])
        .with_equalities(eq, vec![1.0]);
    let report = lp_solve(&lp)?;
    if !report.is_optimal() {
        let zeros = vec![0.0; n];
        return Ok(RecoveryResult::new(
            Method::OneBitLp,
            zeros.clone(),
            zeros,
            false,
            report,
        ));
    }
    let raw = merge_split(&report.solution, n);
    let az = e.apply(&raw, false)?;
    let consistent = az.iter().zip(y).all(|(v, s)| v * s >= -1e-8);
    let estimate = normalized(&raw).ok_or(Error::DegenerateEstimate)?;
    Ok(RecoveryResult::new(
        Method::OneBitLp,
        estimate,
        raw,
        consistent,
        report,
    ))
}

fn admm_margin(settings: &SplitSettings) -> f64 {
    (2.0 * settings.primal_eps).max(CONSISTENCY_SLACK)
}

fn check_energy_bound(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return param("energy bound R must be positive");
    }
    Ok(())
}

/// `min ‖z‖₁  s.t.  lo ≤ Mz ≤ hi,  ‖z‖₂ ≤ R`. The ball-free LP is solved
/// first; its optimum solves the full program whenever it lies in the ball.
/// Otherwise the splitting solver handles the ball.
fn ball_program(
    map: &dyn LinearMap,
    constraints: MappedConstraints,
    r: f64,
    settings: SplitSettings,
) -> Result<SolveReport> {
    let a = map.to_dense();
    let n = a.ncols();
    let upper: Vec<usize> = (0..a.nrows())
        .filter(|&i| constraints.hi[i].is_finite())
        .collect();
    let lower: Vec<usize> = (0..a.nrows())
        .filter(|&i| constraints.lo[i].is_finite())
        .collect();
    let rows = upper.len() + lower.len();
    let g = DMatrix::from_fn(rows, 2 * n, |k, j| {
        let (i, s) = if k < upper.len() {
            (upper[k], 1.0)
        } else {
            (lower[k - upper.len()], -1.0)
        };
        let v = if j < n { a[(i, j)] } else { -a[(i, j - n)] };
        s * v
    });
    let h: Vec<f64> = upper
        .iter()
        .map(|&i| constraints.hi[i])
        .chain(lower.iter().map(|&i| -constraints.lo[i]))
        .collect();
    let mut report = lp_solve(&LpProblem::new(vec![1.0; 2 * n]).with_inequalities(g, h))?;
    match report.status {
        SolveStatus::Optimal => {
            let z = merge_split(&report.solution, n);
            if norm2(&z) <= r {
                report.solution = z;
                return Ok(report);
            }
        }
        SolveStatus::Infeasible => {
            report.solution = vec![0.0; n];
            return Ok(report);
        }
        _ => {}
    }
    split_solve(
        &SplitProblem::new(map, constraints)
            .with_ball(r)
            .with_settings(settings),
    )
}

/// `min ‖z‖₁  s.t.  sign(Az + τ) = y,  ‖z‖₂ ≤ R`.
pub fn recover_cp(
    e: &MeasurementEnsemble,
    y: &[f64],
    tau: &[f64],
    r: f64,
) -> Result<RecoveryResult> {
    let m = e.realized_rows();
    check_len(m, y.len())?;
    check_len(m, tau.len())?;
    check_signs(y)?;
    ensure_finite(tau)?;
    check_energy_bound(r)?;
    let settings = SplitSettings::default();
    let pairs: Vec<(usize, f64)> = y.iter().copied().enumerate().collect();
    let constraints = MappedConstraints::signs(m, &pairs, tau, admm_margin(&settings))?;
    let map = e.measurement_map();
    let report = ball_program(&map, constraints, r, settings)?;
    let z = report.solution.clone();
    let az = e.apply(&z, false)?;
    let consistent = az
        .iter()
        .zip(tau)
        .zip(y)
        .all(|((a, t), s)| sign(a + t) == *s);
    let mut out = RecoveryResult::new(Method::OneBitCp, z.clone(), z, consistent, report);
    out.energy_bound = Some(r);
    Ok(out)
}

/// Consistent reconstruction from `Q_δ(√(π/2)Ax + τ + u)`:
/// `min ‖z‖₁  s.t.  Q_δ(√(π/2)Az + τ + u) = codes,  ‖z‖₂ ≤ R`.
pub fn recover_cpusc(
    e: &MeasurementEnsemble,
    codes: &[f64],
    tau: &[f64],
    u: &[f64],
    r: f64,
    delta: f64,
) -> Result<RecoveryResult> {
    let m = e.realized_rows();
    check_len(m, codes.len())?;
    check_len(m, tau.len())?;
    check_len(m, u.len())?;
    ensure_finite(codes)?;
    check_energy_bound(r)?;
    if !(delta.is_finite() && delta > 0.0) {
        return param("resolution must be positive");
    }
    let settings = SplitSettings::default();
    let margin = admm_margin(&settings).min(delta / 4.0);
    let offset: Vec<f64> = tau.iter().zip(u).map(|(a, b)| a + b).collect();
    let lo = codes
        .iter()
        .zip(&offset)
        .map(|(c, o)| c - delta / 2.0 - o + margin)
        .collect();
    let hi = codes
        .iter()
        .zip(&offset)
        .map(|(c, o)| c + delta / 2.0 - o - margin)
        .collect();
    let constraints = MappedConstraints::boxes(lo, hi)?;
    let map = e.measurement_map();
    let scaled = crate::operator::Scaled {
        inner: &map,
        factor: SQRT_HALF_PI,
    };
    let report = ball_program(&scaled, constraints, r, settings)?;
    let z = report.solution.clone();
    let mapped: Vec<f64> = e
        .apply(&z, false)?
        .iter()
        .map(|v| SQRT_HALF_PI * v)
        .collect();
    let requant = scalar_quantize(&mapped, delta, Some(&offset))?;
    let consistent = requant == codes;
    let mut out = RecoveryResult::new(Method::DitheredScalarCp, z.clone(), z, consistent, report);
    out.energy_bound = Some(r);
    Ok(out)
}

/// `min ‖z‖₁  s.t.  ‖Az − codes‖∞ ≤ δ/2` with the half-open cell closed by
/// [`CONSISTENCY_SLACK`] per side.
pub fn recover_linf_bp(
    e: &MeasurementEnsemble,
    codes: &[f64],
    delta: f64,
) -> Result<RecoveryResult> {
    let m = e.realized_rows();
    check_len(m, codes.len())?;
    ensure_finite(codes)?;
    if !(delta.is_finite() && delta > 2.0 * CONSISTENCY_SLACK) {
        return param("resolution must be positive");
    }
    let n = e.ambient_dim();
    let a = e.measurement_map().to_dense();
    let ones = vec![1.0; m];
    let neg = vec![-1.0; m];
    let upper = split_block(&a, &ones);
    let lower = split_block(&a, &neg);
    let g = DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        if i < m {
            upper[(i, j)]
        } else {
            lower[(i - m, j)]
        }
    });
    let half = delta / 2.0 - CONSISTENCY_SLACK;
    let h: Vec<f64> = codes
        .iter()
        .map(|c| c + half)
        .chain(codes.iter().map(|c| -(c - half)))
        .collect();
    let report = lp_solve(&LpProblem::new(vec![1.0; 2 * n]).with_inequalities(g, h))?;
    if !report.is_optimal() {
        let zeros = vec![0.0; n];
        return Ok(RecoveryResult::new(
            Method::LinfBp,
            zeros.clone(),
            zeros,
            false,
            report,
        ));
    }
    let z = merge_split(&report.solution, n);
    let az = e.apply(&z, false)?;
    let consistent = az
        .iter()
        .zip(codes)
        .all(|(v, c)| quantize_scalar(*v, delta) == *c);
    Ok(RecoveryResult::new(
        Method::LinfBp,
        z.clone(),
        z,
        consistent,
        report,
    ))
}

/// `min ‖z‖₁  s.t.  ‖y − Az‖₁ ≤ ε`, with slack variables `t ≥ |y − Az|`.
pub fn recover_l1_bpdn(e: &MeasurementEnsemble, y: &[f64], eps: f64) -> Result<RecoveryResult> {
    let m = e.realized_rows();
    check_len(m, y.len())?;
    ensure_finite(y)?;
    if !(eps.is_finite() && eps >= 0.0) {
        return param("noise budget must be nonnegative");
    }
    let n = e.ambient_dim();
    let a = e.measurement_map().to_dense();
    let cols = 2 * n + m;
    let g = DMatrix::from_fn(2 * m + 1, cols, |i, j| {
        if i == 2 * m {
            return if j >= 2 * n { 1.0 } else { 0.0 };
        }
        let (row, s) = if i < m { (i, 1.0) } else { (i - m, -1.0) };
        if j < n {
            s * a[(row, j)]
        } else if j < 2 * n {
            -s * a[(row, j - n)]
        } else if j - 2 * n == row {
            -1.0
        } else {
            0.0
        }
    });
    let h: Vec<f64> = y
        .iter()
        .copied()
        .chain(y.iter().map(|v| -v))
        .chain([eps])
        .collect();
    let cost: Vec<f64> = (0..cols)
        .map(|j| if j < 2 * n { 1.0 } else { 0.0 })
        .collect();
    let report = lp_solve(&LpProblem::new(cost).with_inequalities(g, h))?;
    if !report.is_optimal() {
        let zeros = vec![0.0; n];
        return Ok(RecoveryResult::new(
            Method::L1Bpdn,
            zeros.clone(),
            zeros,
            false,
            report,
        ));
    }
    let z = merge_split(&report.solution, n);
    let az = e.apply(&z, false)?;
    let misfit: f64 = az.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    let consistent = misfit <= eps + 1e-7 * (1.0 + norm1(y));
    Ok(RecoveryResult::new(
        Method::L1Bpdn,
        z.clone(),
        z,
        consistent,
        report,
    ))
}

/// Error scale `σ_s(x)₁/√s + ε/m` of the ℓ1-BPDN guarantee.
pub fn bpdn_error_scale(truth: &[f64], s: usize, eps: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return param("need at least one measurement");
    }
    Ok(best_term_error_l1(truth, s)? / (s as f64).sqrt() + eps / m as f64)
}

/// `x_{±λ} = (1+λ²)^{−1/2} (1, ±λ, 0, …, 0)`.
pub fn counterexample_pair(n: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return param("counterexample needs N >= 2");
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return param(format!("lambda must lie in (0, 1), got {lambda}"));
    }
    let c = 1.0 / (1.0 + lambda * lambda).sqrt();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    plus[0] = c;
    minus[0] = c;
    plus[1] = c * lambda;
    minus[1] = -c * lambda;
    Ok((plus, minus))
}

/// Whether `x_{+λ}` and `x_{−λ}` produce identical one-bit measurements
/// under a fully sampled circulant ensemble with generator `law` and τ = 0.
pub fn counterexample_check(n: usize, lambda: f64, law: GeneratorLaw, seed: u64) -> Result<bool> {
    let (plus, minus) = counterexample_pair(n, lambda)?;
    let e = MeasurementEnsemble::sample(n, n, law, false, seed)?;
    let a = e.apply(&plus, false)?;
    let b = e.apply(&minus, false)?;
    Ok(a.iter().zip(&b).all(|(p, q)| sign(*p) == sign(*q)))
}
