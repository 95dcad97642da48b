//! Dense two-phase simplex.
//!
//! Problems are brought to standard form (shifted/split variables, slacks,
//! non-negative right-hand sides, equilibrated rows) and solved on a full
//! tableau. Entering columns follow Dantzig's rule and fall back to Bland's
//! rule after a run of degenerate pivots, which rules out cycling. The final
//! basis is re-solved with LU and checked against the original rows.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    /// Minimize cᵀx.
    pub c: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    /// (lower, upper); infinities allowed. Empty means x ≥ 0 for all.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

/// x_i = offset + Σ coef·y_k over the standard-form columns.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct StdForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Column of a usable initial basic slack per row.
    slack_basis: Vec<Option<usize>>,
    vars: Vec<VarMap>,
}

fn to_standard(p: &LpProblem) -> Result<StdForm, LpError> {
    let n = p.c.len();
    let bounds: Vec<(f64, f64)> = if p.bounds.is_empty() { vec![(0.0, f64::INFINITY); n] } else { p.bounds.clone() };
    if bounds.len() != n || p.a_eq.len() != p.b_eq.len() || p.a_ub.len() != p.b_ub.len() {
        return Err(LpError::Malformed("dimension mismatch".into()));
    }
    let all_rows = p.a_eq.iter().chain(&p.a_ub);
    for r in all_rows {
        if r.len() != n || r.iter().any(|x| !x.is_finite()) {
            return Err(LpError::Malformed("row length or non-finite entry".into()));
        }
    }
    if p.c.iter().chain(&p.b_eq).chain(&p.b_ub).any(|x| !x.is_finite()) {
        return Err(LpError::Malformed("non-finite cost or rhs".into()));
    }

    let mut vars = Vec::with_capacity(n);
    let mut ncol = 0usize;
    // Extra rows y ≤ u coming from finite upper bounds.
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &bounds {
        if lo > hi {
            return Err(LpError::Malformed(format!("bound {lo} > {hi}")));
        }
        if lo.is_finite() {
            vars.push(VarMap { offset: lo, terms: vec![(ncol, 1.0)] });
            if hi.is_finite() {
                bound_rows.push((ncol, hi - lo));
            }
            ncol += 1;
        } else if hi.is_finite() {
            vars.push(VarMap { offset: hi, terms: vec![(ncol, -1.0)] });
            ncol += 1;
        } else {
            vars.push(VarMap { offset: 0.0, terms: vec![(ncol, 1.0), (ncol + 1, -1.0)] });
            ncol += 2;
        }
    }
    let n_slack = p.a_ub.len() + bound_rows.len();
    let total = ncol + n_slack;

    let mut c = vec![0.0; total];
    for (i, v) in vars.iter().enumerate() {
        for &(k, s) in &v.terms {
            c[k] += p.c[i] * s;
        }
    }

    let map_row = |row: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; total];
        let mut shift = 0.0;
        for (i, v) in vars.iter().enumerate() {
            shift += row[i] * v.offset;
            for &(k, s) in &v.terms {
                out[k] += row[i] * s;
            }
        }
        (out, shift)
    };

    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut slack_basis = Vec::new();
    for (row, rhs) in p.a_eq.iter().zip(&p.b_eq) {
        let (r, shift) = map_row(row);
        a.push(r);
        b.push(rhs - shift);
        slack_basis.push(None);
    }
    let mut slack = ncol;
    for (row, rhs) in p.a_ub.iter().zip(&p.b_ub) {
        let (mut r, shift) = map_row(row);
        r[slack] = 1.0;
        a.push(r);
        b.push(rhs - shift);
        slack_basis.push(Some(slack));
        slack += 1;
    }
    for &(k, u) in &bound_rows {
        let mut r = vec![0.0; total];
        r[k] = 1.0;
        r[slack] = 1.0;
        a.push(r);
        b.push(u);
        slack_basis.push(Some(slack));
        slack += 1;
    }

    for i in 0..a.len() {
        if b[i] < 0.0 {
            a[i].iter_mut().for_each(|x| *x = -*x);
            b[i] = -b[i];
            slack_basis[i] = None;
        }
        let scale = a[i].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale > 0.0 {
            a[i].iter_mut().for_each(|x| *x /= scale);
            b[i] /= scale;
        }
    }
    Ok(StdForm { a, b, c, slack_basis, vars })
}

struct Tableau {
    m: usize,
    n: usize,
    /// (m + 1) rows of n + 1 entries; the last row is the reduced cost row and
    /// the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    rows: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.n + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.n)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.n + 1;
        let piv = self.t[pr * w + pc];
        for j in 0..w {
            self.t[pr * w + j] /= piv;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                let row = &mut self.t[r * w..(r + 1) * w];
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Loads `cost` into the objective row, reduced against the basis.
    fn set_cost(&mut self, cost: &[f64]) {
        let w = self.n + 1;
        let m = self.m;
        for j in 0..w {
            self.t[m * w + j] = if j < self.n { cost[j] } else { 0.0 };
        }
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[m * w + j] -= cb * self.t[r * w + j];
                }
            }
        }
    }

    /// Runs simplex iterations on columns `< active`. Returns false if unbounded.
    fn optimize(&mut self, active: usize, max_iter: usize) -> Result<bool, LpError> {
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let m = self.m;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..active {
                let d = self.at(m, j);
                if d < -COST_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if d < best {
                        best = d;
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.at(r, q);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-14 * (1.0 + lratio.abs());
                            let better = if tie {
                                if bland {
                                    self.basis[r] < self.basis[lr]
                                } else {
                                    a > self.at(lr, q)
                                }
                            } else {
                                ratio < lratio
                            };
                            if better {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else { return Ok(false) };
            degenerate = if ratio <= 1e-14 { degenerate + 1 } else { 0 };
            self.pivot(pr, q);
        }
        Err(LpError::NumericalBreakdown("iteration limit reached".into()))
    }
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    let sf = to_standard(p)?;
    let m = sf.a.len();
    let n_real = sf.c.len();
    let n_art = sf.slack_basis.iter().filter(|s| s.is_none()).count();
    let n = n_real + n_art;
    let max_iter = 50 * (m + n) + 1000;

    let mut tab = Tableau { m, n, t: vec![0.0; (m + 1) * (n + 1)], basis: vec![0; m], rows: (0..m).collect() };
    let mut art = n_real;
    for r in 0..m {
        for j in 0..n_real {
            tab.t[r * (n + 1) + j] = sf.a[r][j];
        }
        tab.t[r * (n + 1) + n] = sf.b[r];
        match sf.slack_basis[r] {
            Some(s) => {
                // The slack appears only in this row; normalize it to a unit column.
                let coef = sf.a[r][s];
                for j in 0..=n {
                    tab.t[r * (n + 1) + j] /= coef;
                }
                tab.basis[r] = s;
            }
            None => {
                tab.t[r * (n + 1) + art] = 1.0;
                tab.basis[r] = art;
                art += 1;
            }
        }
    }

    if n_art > 0 {
        let mut cost1 = vec![0.0; n];
        cost1[n_real..].iter_mut().for_each(|x| *x = 1.0);
        tab.set_cost(&cost1);
        tab.optimize(n, max_iter)?;
        let infeas = -tab.rhs(m);
        let bscale = 1.0 + sf.b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if infeas > FEAS_TOL * bscale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: vec![], objective: f64::NAN });
        }
        // Drive remaining artificials out of the basis; rows where that is
        // impossible are redundant and dropped.
        let mut r = 0;
        while r < tab.m {
            if tab.basis[r] >= n_real {
                let col = (0..n_real)
                    .filter(|&j| tab.at(r, j).abs() > 1e-9)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
                match col {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        remove_row(&mut tab, r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; n];
    let cscale = sf.c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let cscale = if cscale > 0.0 { cscale } else { 1.0 };
    for j in 0..n_real {
        cost[j] = sf.c[j] / cscale;
    }
    tab.set_cost(&cost);
    if !tab.optimize(n_real, max_iter)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![], objective: f64::NEG_INFINITY });
    }

    let y = refine_basis(&sf, &tab.basis, &tab.rows, n_real)?;
    let x: Vec<f64> = sf.vars.iter().map(|v| v.offset + v.terms.iter().map(|&(k, s)| s * y[k]).sum::<f64>()).collect();
    let objective = p.c.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>();
    Ok(LpSolution { status: LpStatus::Optimal, x, objective })
}

fn remove_row(tab: &mut Tableau, r: usize) {
    let w = tab.n + 1;
    tab.t.drain(r * w..(r + 1) * w);
    tab.basis.remove(r);
    tab.rows.remove(r);
    tab.m -= 1;
}

/// Recomputes the basic solution from the original standard-form rows with
/// an LU solve and checks feasibility and residuals.
fn refine_basis(sf: &StdForm, basis: &[usize], rows: &[usize], n_real: usize) -> Result<Vec<f64>, LpError> {
    let k = basis.len();
    let mut y = vec![0.0; n_real];
    if k > 0 {
        let bmat = DMatrix::from_fn(k, k, |i, j| sf.a[rows[i]][basis[j]]);
        let rhs = DVector::from_fn(k, |i, _| sf.b[rows[i]]);
        let sol = bmat.lu().solve(&rhs);
        let sol = sol.ok_or_else(|| LpError::NumericalBreakdown("singular final basis".into()))?;
        for (j, &col) in basis.iter().enumerate() {
            y[col] = sol[j];
        }
    }
    for v in y.iter_mut() {
        if *v < 0.0 {
            if *v < -FEAS_TOL {
                return Err(LpError::NumericalBreakdown(format!("basic variable {v:e} negative")));
            }
            *v = 0.0;
        }
    }
    let worst = sf
        .a
        .iter()
        .zip(&sf.b)
        .map(|(row, b)| (row.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>() - b).abs())
        .fold(0.0f64, f64::max);
    if worst > RESIDUAL_TOL {
        return Err(LpError::NumericalBreakdown(format!("primal residual {worst:e}")));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_variable() {
        let p = LpProblem { c: vec![-1.0], a_ub: vec![vec![1.0]], b_ub: vec![1.0], ..Default::default() };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_pair() {
        let p = LpProblem { c: vec![1.0], a_ub: vec![vec![1.0]], b_ub: vec![-1.0], ..Default::default() };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let p = LpProblem { c: vec![-1.0, 0.0], a_ub: vec![vec![-1.0, 1.0]], b_ub: vec![1.0], ..Default::default() };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x − y with −2 ≤ x ≤ 3 free y ≤ 4, x + y = 1.
        let p = LpProblem {
            c: vec![1.0, -1.0],
            a_eq: vec![vec![1.0, 1.0]],
            b_eq: vec![1.0],
            bounds: vec![(-2.0, 3.0), (f64::NEG_INFINITY, 4.0)],
            ..Default::default()
        };
        let s = solve_lp(&p).unwrap();
        assert!((s.x[0] + 2.0).abs() < 1e-12 && (s.x[1] - 3.0).abs() < 1e-12);
        assert!((s.objective + 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let p = LpProblem {
            c: vec![1.0, 2.0],
            a_eq: vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            b_eq: vec![1.0, 2.0],
            ..Default::default()
        };
        let s = solve_lp(&p).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    /// Brute-force oracle over all vertices of {Ax ≤ b, 0 ≤ x ≤ u}.
    fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64], u: f64) -> Option<f64> {
        let n = c.len();
        let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = -1.0;
            rows.push((e.clone(), 0.0));
            e[i] = 1.0;
            rows.push((e, u));
        }
        let k = rows.len();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let mmat = DMatrix::from_fn(n, n, |i, j| rows[idx[i]].0[j]);
            let rhs = DVector::from_fn(n, |i, _| rows[idx[i]].1);
            if let Some(x) = mmat.lu().solve(&rhs) {
                let feasible = rows.iter().all(|(r, bb)| r.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= bb + 1e-9);
                if feasible && x.iter().all(|v| v.is_finite()) {
                    let v: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < k - n + i {
                    idx[i] += 1;
                    for j in i + 1..n {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_vertex_enumeration(
            n in 2usize..5,
            m in 1usize..5,
            seed in proptest::collection::vec(-1.0f64..1.0, 40),
        ) {
            let c: Vec<f64> = (0..n).map(|i| seed[i]).collect();
            let a: Vec<Vec<f64>> = (0..m).map(|r| (0..n).map(|j| seed[5 + r * 5 + j]).collect()).collect();
            let b: Vec<f64> = (0..m).map(|r| seed[30 + r] + 0.5).collect();
            let u = 2.0;
            let p = LpProblem { c: c.clone(), a_ub: a.clone(), b_ub: b.clone(), bounds: vec![(0.0, u); n], ..Default::default() };
            let s = solve_lp(&p).unwrap();
            match vertex_oracle(&c, &a, &b, u) {
                Some(v) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert!((s.objective - v).abs() < 1e-9, "{} vs {}", s.objective, v);
                }
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            }
        }
    }
}
