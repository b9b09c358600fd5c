use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::{SolveReport, SolveStatus};
use crate::error::{ensure_finite, param, Result};

/// `min cᵀx  s.t.  Gx ≤ h,  Ex = b,  x ≥ lb` with `lb_j ∈ R ∪ {−∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub ineq_lhs: DMatrix<f64>,
    pub ineq_rhs: Vec<f64>,
    pub eq_lhs: DMatrix<f64>,
    pub eq_rhs: Vec<f64>,
    pub lower_bounds: Vec<f64>,
}

/// Infeasibility proof in terms of the original constraints.
///
/// With `λ ≥ 0` on the inequalities and free `μ` on the equalities,
/// `λᵀG + μᵀE` is nonnegative on bounded variables and zero on free ones,
/// while `λᵀ(h − G·lb) + μᵀ(b − E·lb) < 0` (free variables count as `lb = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub ineq: Vec<f64>,
    pub eq: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub max_iters: usize,
    /// Pivots between refactorizations, raised to the row count on larger problems.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub tolerance: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iters: 100_000,
            refactor_every: 64,
            bland_after: 40,
            tolerance: 1e-9,
        }
    }
}

impl LpProblem {
    /// Unconstrained problem over `x ≥ 0`.
    pub fn new(cost: Vec<f64>) -> Self {
        let n = cost.len();
        LpProblem {
            cost,
            ineq_lhs: DMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq_lhs: DMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            lower_bounds: vec![0.0; n],
        }
    }

    pub fn with_inequalities(mut self, lhs: DMatrix<f64>, rhs: Vec<f64>) -> Self {
        self.ineq_lhs = lhs;
        self.ineq_rhs = rhs;
        self
    }

    pub fn with_equalities(mut self, lhs: DMatrix<f64>, rhs: Vec<f64>) -> Self {
        self.eq_lhs = lhs;
        self.eq_rhs = rhs;
        self
    }

    pub fn with_lower_bounds(mut self, lb: Vec<f64>) -> Self {
        self.lower_bounds = lb;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.ineq_lhs.ncols() != n || self.eq_lhs.ncols() != n || self.lower_bounds.len() != n {
            return param("LP column counts disagree with the cost vector");
        }
        if self.ineq_lhs.nrows() != self.ineq_rhs.len() || self.eq_lhs.nrows() != self.eq_rhs.len()
        {
            return param("LP row counts disagree with right-hand sides");
        }
        ensure_finite(&self.cost)?;
        ensure_finite(&self.ineq_rhs)?;
        ensure_finite(&self.eq_rhs)?;
        ensure_finite(self.ineq_lhs.as_slice())?;
        ensure_finite(self.eq_lhs.as_slice())?;
        if self
            .lower_bounds
            .iter()
            .any(|l| l.is_nan() || *l == f64::INFINITY)
        {
            return param("lower bounds must be finite or -inf");
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let gi = &self.ineq_lhs * &xv;
        let ge = &self.eq_lhs * &xv;
        let ineq = gi.iter().zip(&self.ineq_rhs).map(|(a, b)| (a - b).max(0.0));
        let eq = ge.iter().zip(&self.eq_rhs).map(|(a, b)| (a - b).abs());
        let bounds = x
            .iter()
            .zip(&self.lower_bounds)
            .map(|(v, l)| (l - v).max(0.0));
        ineq.chain(eq).chain(bounds).fold(0.0, f64::max)
    }

    pub fn verify_farkas(&self, cert: &FarkasCertificate, tol: f64) -> bool {
        if cert.ineq.len() != self.ineq_rhs.len() || cert.eq.len() != self.eq_rhs.len() {
            return false;
        }
        if cert.ineq.iter().any(|l| *l < -tol) {
            return false;
        }
        let lam = DVector::from_column_slice(&cert.ineq);
        let mu = DVector::from_column_slice(&cert.eq);
        let coef = self.ineq_lhs.tr_mul(&lam) + self.eq_lhs.tr_mul(&mu);
        let scale = 1.0 + lam.amax() + mu.amax();
        for (c, lb) in coef.iter().zip(&self.lower_bounds) {
            let ok = if lb.is_finite() {
                *c >= -tol * scale
            } else {
                c.abs() <= tol * scale
            };
            if !ok {
                return false;
            }
        }
        let shift: Vec<f64> = self
            .lower_bounds
            .iter()
            .map(|l| if l.is_finite() { *l } else { 0.0 })
            .collect();
        let s = DVector::from_vec(shift);
        let h = DVector::from_column_slice(&self.ineq_rhs) - &self.ineq_lhs * &s;
        let b = DVector::from_column_slice(&self.eq_rhs) - &self.eq_lhs * &s;
        lam.dot(&h) + mu.dot(&b) < -tol * scale
    }

    /// Plain-text canonical form for cross-checking with external tools.
    pub fn write_canonical<W: Write>(&self, mut w: W) -> Result<()> {
        let join = |v: &mut dyn Iterator<Item = f64>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        writeln!(w, "# minimize c'x subject to G x <= h, E x = b, x >= lb")?;
        writeln!(w, "vars {}", self.num_vars())?;
        writeln!(w, "cost {}", join(&mut self.cost.iter().copied()))?;
        writeln!(w, "lb {}", join(&mut self.lower_bounds.iter().copied()))?;
        for i in 0..self.ineq_rhs.len() {
            writeln!(
                w,
                "le {} | {}",
                join(&mut self.ineq_lhs.row(i).iter().copied()),
                self.ineq_rhs[i]
            )?;
        }
        for i in 0..self.eq_rhs.len() {
            writeln!(
                w,
                "eq {} | {}",
                join(&mut self.eq_lhs.row(i).iter().copied()),
                self.eq_rhs[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum VarCols {
    Shifted(usize),
    Split(usize, usize),
}

/// `A x = b, x ≥ 0` with `b ≥ 0`, slacks and artificials appended.
struct StandardForm {
    a: DMatrix<f64>,
    b: Vec<f64>,
    cost: Vec<f64>,
    vars: Vec<VarCols>,
    /// `+1` or `−1` per row: the factor applied to the original row.
    flip: Vec<f64>,
    first_artificial: usize,
    initial_basis: Vec<usize>,
    shift: Vec<f64>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mi = p.ineq_rhs.len();
        let me = p.eq_rhs.len();
        let m = mi + me;
        let mut vars = Vec::with_capacity(n);
        let mut ncols = 0;
        for lb in &p.lower_bounds {
            if lb.is_finite() {
                vars.push(VarCols::Shifted(ncols));
                ncols += 1;
            } else {
                vars.push(VarCols::Split(ncols, ncols + 1));
                ncols += 2;
            }
        }
        let n_struct = ncols;
        let shift: Vec<f64> = p
            .lower_bounds
            .iter()
            .map(|l| if l.is_finite() { *l } else { 0.0 })
            .collect();
        let sv = DVector::from_column_slice(&shift);
        let mut rhs: Vec<f64> = (DVector::from_column_slice(&p.ineq_rhs) - &p.ineq_lhs * &sv)
            .iter()
            .copied()
            .collect();
        rhs.extend((DVector::from_column_slice(&p.eq_rhs) - &p.eq_lhs * &sv).iter());
        let flip: Vec<f64> = rhs
            .iter()
            .map(|r| if *r < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let needs_artificial: Vec<bool> = (0..m).map(|r| r >= mi || flip[r] < 0.0).collect();
        let n_art = needs_artificial.iter().filter(|b| **b).count();
        let first_artificial = n_struct + mi;
        let total = first_artificial + n_art;

        let mut a = DMatrix::zeros(m, total);
        let orig_row = |r: usize, j: usize| {
            if r < mi {
                p.ineq_lhs[(r, j)]
            } else {
                p.eq_lhs[(r - mi, j)]
            }
        };
        for r in 0..m {
            for (j, vc) in vars.iter().enumerate() {
                let v = flip[r] * orig_row(r, j);
                match *vc {
                    VarCols::Shifted(c) => a[(r, c)] = v,
                    VarCols::Split(cp, cn) => {
                        a[(r, cp)] = v;
                        a[(r, cn)] = -v;
                    }
                }
            }
            if r < mi {
                a[(r, n_struct + r)] = flip[r];
            }
        }
        let mut initial_basis = vec![0; m];
        let mut next_art = first_artificial;
        for r in 0..m {
            if needs_artificial[r] {
                a[(r, next_art)] = 1.0;
                initial_basis[r] = next_art;
                next_art += 1;
            } else {
                initial_basis[r] = n_struct + r;
            }
        }
        let b: Vec<f64> = rhs.iter().zip(&flip).map(|(r, f)| r * f).collect();
        let mut cost = vec![0.0; total];
        for (j, vc) in vars.iter().enumerate() {
            match *vc {
                VarCols::Shifted(c) => cost[c] = p.cost[j],
                VarCols::Split(cp, cn) => {
                    cost[cp] = p.cost[j];
                    cost[cn] = -p.cost[j];
                }
            }
        }
        StandardForm {
            a,
            b,
            cost,
            vars,
            flip,
            first_artificial,
            initial_basis,
            shift,
        }
    }

    fn recover_x(&self, xs: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .zip(&self.shift)
            .map(|(vc, s)| match *vc {
                VarCols::Shifted(c) => s + xs[c],
                VarCols::Split(cp, cn) => xs[cp] - xs[cn],
            })
            .collect()
    }
}

enum Phase {
    Optimal { dual_residual: f64 },
    Unbounded,
    MaxIters,
    Singular,
}

/// Revised simplex state with an explicit dense basis inverse, rebuilt
/// from an LU factorization every `refactor_every` pivots.
struct Simplex<'a> {
    sf: &'a StandardForm,
    opts: LpOptions,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm, opts: LpOptions) -> Self {
        let m = sf.b.len();
        let mut is_basic = vec![false; sf.a.ncols()];
        for &j in &sf.initial_basis {
            is_basic[j] = true;
        }
        // the initial basis is an identity
        Simplex {
            sf,
            opts,
            basis: sf.initial_basis.clone(),
            is_basic,
            binv: DMatrix::identity(m, m),
            xb: sf.b.clone(),
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
            iterations: 0,
        }
    }

    fn refactor(&mut self) -> bool {
        let m = self.basis.len();
        let mut bmat = DMatrix::zeros(m, m);
        for (r, &j) in self.basis.iter().enumerate() {
            bmat.set_column(r, &self.sf.a.column(j));
        }
        match bmat.lu().try_inverse() {
            Some(inv) => {
                self.binv = inv;
                let xb = &self.binv * DVector::from_column_slice(&self.sf.b);
                self.xb = xb.iter().copied().collect();
                self.since_refactor = 0;
                true
            }
            None => false,
        }
    }

    fn duals(&self, cost: &[f64]) -> DVector<f64> {
        let cb = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
        self.binv.tr_mul(&cb)
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: &DVector<f64>) {
        let m = self.basis.len();
        let piv = alpha[r];
        let theta = self.xb[r].max(0.0) / piv;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        let pivot_row = self.binv.row(r) / piv;
        let mut col = alpha.clone();
        col[r] = 0.0;
        self.binv.ger(-1.0, &col, &pivot_row.transpose(), 1.0);
        self.binv.set_row(r, &pivot_row);
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        if theta <= self.opts.tolerance {
            self.degenerate_run += 1;
            if self.degenerate_run >= self.opts.bland_after {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    /// Minimizes `cost` with entering candidates restricted to `0..enter_limit`.
    fn run(&mut self, cost: &[f64], enter_limit: usize) -> Phase {
        let tol = self.opts.tolerance;
        let cscale = 1.0 + cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        loop {
            if self.since_refactor >= self.opts.refactor_every.max(self.basis.len())
                && !self.refactor()
            {
                return Phase::Singular;
            }
            let y = self.duals(cost);
            let reduced = self.sf.a.tr_mul(&y);
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..enter_limit {
                if self.is_basic[j] {
                    continue;
                }
                let d = cost[j] - reduced[j];
                if d < -tol * cscale {
                    if self.bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                let worst = (0..enter_limit)
                    .filter(|&j| !self.is_basic[j])
                    .map(|j| (reduced[j] - cost[j]).max(0.0))
                    .fold(0.0, f64::max);
                return Phase::Optimal {
                    dual_residual: worst,
                };
            };
            if self.iterations >= self.opts.max_iters {
                return Phase::MaxIters;
            }
            let alpha = &self.binv * self.sf.a.column(q);
            let mut best: Option<(usize, f64)> = None;
            for (i, &ai) in alpha.iter().enumerate() {
                if ai > tol {
                    let t = self.xb[i].max(0.0) / ai;
                    if best.is_none_or(|(_, bt)| t < bt) {
                        best = Some((i, t));
                    }
                }
            }
            let Some((_, tmin)) = best else {
                return Phase::Unbounded;
            };
            let slack = 1e-12 * (1.0 + tmin);
            let mut leave = None::<usize>;
            for (i, &ai) in alpha.iter().enumerate() {
                if ai > tol && self.xb[i].max(0.0) / ai <= tmin + slack {
                    leave = Some(match leave {
                        None => i,
                        Some(l) if self.bland => {
                            if self.basis[i] < self.basis[l] {
                                i
                            } else {
                                l
                            }
                        }
                        Some(l) => {
                            if ai > alpha[l] {
                                i
                            } else {
                                l
                            }
                        }
                    });
                }
            }
            self.pivot(q, leave.expect("ratio test found a row"), &alpha);
        }
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn expel_artificials(&mut self) {
        let first_art = self.sf.first_artificial;
        for r in 0..self.basis.len() {
            if self.basis[r] < first_art {
                continue;
            }
            let row = self.binv.row(r) * &self.sf.a;
            let cand = (0..first_art)
                .filter(|&j| !self.is_basic[j] && row[j].abs() > 1e-9)
                .max_by(|&i, &j| row[i].abs().total_cmp(&row[j].abs()));
            if let Some(q) = cand {
                let alpha = &self.binv * self.sf.a.column(q);
                self.pivot(q, r, &alpha);
            }
        }
    }

    fn solution(&self) -> Vec<f64> {
        let mut xs = vec![0.0; self.sf.a.ncols()];
        for (r, &j) in self.basis.iter().enumerate() {
            xs[j] = self.xb[r].max(0.0);
        }
        xs
    }
}

/// Solves an LP with the two-phase revised simplex method.
///
/// Pricing is Dantzig's rule; a long run of degenerate pivots switches to
/// Bland's rule, which cannot cycle, until the objective moves again.
pub fn lp_solve(p: &LpProblem) -> Result<SolveReport> {
    lp_solve_with(p, LpOptions::default())
}

pub fn lp_solve_with(p: &LpProblem, opts: LpOptions) -> Result<SolveReport> {
    p.validate()?;
    let start = Instant::now();
    let sf = StandardForm::build(p);
    let report = |x: Vec<f64>, status, dual_residual, iterations, farkas| {
        let primal_residual = if status == SolveStatus::Infeasible {
            f64::INFINITY
        } else {
            p.max_violation(&x)
        };
        SolveReport {
            objective: p.objective(&x),
            solution: x,
            status,
            primal_residual,
            dual_residual,
            iterations,
            runtime_ms: start.elapsed().as_millis() as u64,
            farkas,
        }
    };
    let m = sf.b.len();
    if m == 0 {
        let unbounded = sf.cost.iter().any(|c| *c < 0.0);
        let x = sf.recover_x(&vec![0.0; sf.a.ncols()]);
        let status = if unbounded {
            SolveStatus::Unbounded
        } else {
            SolveStatus::Optimal
        };
        return Ok(report(x, status, 0.0, 0, None));
    }

    let mut sx = Simplex::new(&sf, opts);
    let total = sf.a.ncols();
    if sf.first_artificial < total {
        let phase_one: Vec<f64> = (0..total)
            .map(|j| if j >= sf.first_artificial { 1.0 } else { 0.0 })
            .collect();
        match sx.run(&phase_one, sf.first_artificial) {
            Phase::Optimal { .. } => {}
            Phase::Unbounded | Phase::Singular | Phase::MaxIters => {
                let x = sf.recover_x(&sx.solution());
                return Ok(report(
                    x,
                    SolveStatus::MaxIters,
                    f64::NAN,
                    sx.iterations,
                    None,
                ));
            }
        }
        sx.refactor();
        let infeas: f64 = sx
            .basis
            .iter()
            .zip(&sx.xb)
            .filter(|(j, _)| **j >= sf.first_artificial)
            .map(|(_, v)| v.max(0.0))
            .sum();
        let bscale = 1.0 + sf.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > 1e-9 * bscale {
            let y = sx.duals(&phase_one);
            let mi = p.ineq_rhs.len();
            let orig: Vec<f64> = (0..m).map(|r| -sf.flip[r] * y[r]).collect();
            let cert = FarkasCertificate {
                ineq: orig[..mi].iter().map(|v| v.max(0.0)).collect(),
                eq: orig[mi..].to_vec(),
            };
            let x = sf.recover_x(&sx.solution());
            return Ok(report(
                x,
                SolveStatus::Infeasible,
                f64::NAN,
                sx.iterations,
                Some(cert),
            ));
        }
        sx.expel_artificials();
        sx.degenerate_run = 0;
    }

    let outcome = sx.run(&sf.cost, sf.first_artificial);
    let refreshed = sx.refactor();
    let x = sf.recover_x(&sx.solution());
    Ok(match outcome {
        Phase::Optimal { dual_residual } if refreshed => {
            report(x, SolveStatus::Optimal, dual_residual, sx.iterations, None)
        }
        Phase::Unbounded => report(x, SolveStatus::Unbounded, f64::NAN, sx.iterations, None),
        _ => report(x, SolveStatus::MaxIters, f64::NAN, sx.iterations, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]], n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
    }

    #[test]
    fn single_lower_bound() {
        // min x s.t. x >= 1, written as -x <= -1 over a free variable
        let p = LpProblem::new(vec![1.0])
            .with_inequalities(mat(&[&[-1.0]], 1), vec![-1.0])
            .with_lower_bounds(vec![f64::NEG_INFINITY]);
        let r = lp_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.solution[0] - 1.0).abs() < 1e-12);
        assert!((r.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l1_split_on_a_line() {
        // min z+ + z- over z1 + z2 = 1 with z = z+ - z-
        let e = mat(&[&[1.0, 1.0, -1.0, -1.0]], 4);
        let p = LpProblem::new(vec![1.0; 4]).with_equalities(e, vec![1.0]);
        let r = lp_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
        let z1 = r.solution[0] - r.solution[2];
        let z2 = r.solution[1] - r.solution[3];
        // a vertex: one coordinate carries the whole mass
        assert!(
            (z1 - 1.0).abs() < 1e-12 && z2.abs() < 1e-12
                || (z2 - 1.0).abs() < 1e-12 && z1.abs() < 1e-12
        );
    }

    #[test]
    fn unbounded_is_distinct_from_infeasible() {
        let p =
            LpProblem::new(vec![-1.0, 0.0]).with_inequalities(mat(&[&[0.0, 1.0]], 2), vec![1.0]);
        assert_eq!(lp_solve(&p).unwrap().status, SolveStatus::Unbounded);
        let q = LpProblem::new(vec![1.0]).with_inequalities(mat(&[&[1.0]], 1), vec![-1.0]);
        let r = lp_solve(&q).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(q.verify_farkas(r.farkas.as_ref().unwrap(), 1e-9));
    }

    #[test]
    fn infeasible_equalities_have_certificate() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let e = mat(&[&[1.0, 1.0], &[1.0, 1.0]], 2);
        let p = LpProblem::new(vec![1.0, 1.0])
            .with_equalities(e, vec![1.0, 2.0])
            .with_lower_bounds(vec![f64::NEG_INFINITY; 2]);
        let r = lp_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(p.verify_farkas(r.farkas.as_ref().unwrap(), 1e-9));
        let bogus = FarkasCertificate {
            ineq: vec![],
            eq: vec![1.0, 1.0],
        };
        assert!(!p.verify_farkas(&bogus, 1e-9));
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let e = mat(&[&[1.0, 1.0], &[2.0, 2.0]], 2);
        let p = LpProblem::new(vec![1.0, 2.0]).with_equalities(e, vec![1.0, 2.0]);
        let r = lp_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_problems() {
        let p = LpProblem::new(vec![1.0, 1.0]).with_inequalities(DMatrix::zeros(1, 3), vec![0.0]);
        assert!(lp_solve(&p).is_err());
        let q = LpProblem::new(vec![f64::NAN]);
        assert!(lp_solve(&q).is_err());
    }

    #[test]
    fn canonical_dump_lists_rows() {
        let p =
            LpProblem::new(vec![1.0, 2.0]).with_inequalities(mat(&[&[1.0, -1.0]], 2), vec![3.0]);
        let mut out = Vec::new();
        p.write_canonical(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("vars 2"));
        assert!(text.contains("le 1 -1 | 3"));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale cycling example
        let g = mat(
            &[
                &[0.25, -8.0, -1.0, 9.0],
                &[0.5, -12.0, -0.5, 3.0],
                &[0.0, 0.0, 1.0, 0.0],
            ],
            4,
        );
        let p =
            LpProblem::new(vec![-0.75, 20.0, -0.5, 6.0]).with_inequalities(g, vec![0.0, 0.0, 1.0]);
        let r = lp_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective + 1.25).abs() < 1e-9, "{}", r.objective);
    }
}
