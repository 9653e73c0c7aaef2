//! Dense two-phase simplex with Bland's pivoting rule.
//!
//! Problems are tiny (a few dozen columns), so the tableau is stored densely
//! and no scaling or presolve is attempted. After the final pivot the basic
//! variables are recomputed from the original data so that primal residuals
//! do not carry the tableau's accumulated rounding.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

/// `maximize c·x  s.t.  A_eq x = b_eq,  A_ub x ≤ b_ub,  x ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_matrix: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vec<f64>,
    pub value: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len() + self.ub_rhs.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ub(&mut self, row: Vec<f64>, rhs: f64) {
        self.ub_matrix.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.eq_matrix.len() != self.eq_rhs.len() || self.ub_matrix.len() != self.ub_rhs.len() {
            return Err(Error::InvalidParameter(
                "constraint matrix and rhs lengths differ".into(),
            ));
        }
        for row in self.eq_matrix.iter().chain(&self.ub_matrix) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        let all = self
            .objective
            .iter()
            .chain(self.eq_matrix.iter().flatten())
            .chain(self.ub_matrix.iter().flatten())
            .chain(&self.eq_rhs)
            .chain(&self.ub_rhs);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear program coefficients".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint (including `x ≥ 0`) at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut r = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
        for (row, b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            r = r.max((dot(row, x) - b).abs());
        }
        for (row, b) in self.ub_matrix.iter().zip(&self.ub_rhs) {
            r = r.max(dot(row, x) - b);
        }
        r
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

struct Tableau {
    /// `rows[i]` holds the coefficients of constraint `i` followed by its rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
    cap: usize,
}

enum Pivoted {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let mut d: Vec<f64> = cost[..allowed].to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.rows[i][j];
                }
            }
        }
        d
    }

    /// Runs Bland's rule on columns `0..allowed` maximizing `cost`.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<Pivoted> {
        loop {
            let d = self.reduced_costs(cost, allowed);
            let entering = (0..allowed).find(|&j| d[j] > PIVOT_EPS && !self.basis.contains(&j));
            let Some(c) = entering else {
                return Ok(Pivoted::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[r]) {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Pivoted::Unbounded);
            };
            self.iterations += 1;
            if self.iterations > self.cap {
                return Err(Error::IterationCap(self.cap));
            }
            self.pivot(r, c);
        }
    }
}

/// Solves `p` to optimality, or reports it infeasible or unbounded.
///
/// The only error besides malformed input is exceeding the iteration cap of
/// `10_000 · (variables + constraints)`.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let m_eq = p.eq_rhs.len();
    let m_ub = p.ub_rhs.len();
    let m = m_eq + m_ub;
    let cap = 10_000 * (n + m).max(1);

    // Column layout: originals | ub slacks | artificials.
    let slack0 = n;
    let art0 = n + m_ub;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut n_art = 0;
    let mut art_rows = Vec::new();
    for (k, (row, &b)) in p.ub_matrix.iter().zip(&p.ub_rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * sign).collect();
        r.resize(art0, 0.0);
        r[slack0 + k] = sign;
        if sign > 0.0 {
            basis.push(slack0 + k);
        } else {
            basis.push(usize::MAX);
            art_rows.push(rows.len());
            n_art += 1;
        }
        r.push(b * sign);
        rows.push(r);
    }
    for (row, &b) in p.eq_matrix.iter().zip(&p.eq_rhs) {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * sign).collect();
        r.resize(art0, 0.0);
        basis.push(usize::MAX);
        art_rows.push(rows.len());
        n_art += 1;
        r.push(b * sign);
        rows.push(r);
    }
    let cols = art0 + n_art;
    for r in rows.iter_mut() {
        let rhs = r.pop().unwrap();
        r.resize(cols, 0.0);
        r.push(rhs);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][art0 + k] = 1.0;
        basis[i] = art0 + k;
    }
    let mut t = Tableau {
        rows,
        basis,
        cols,
        iterations: 0,
        cap,
    };

    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(art0) {
            *c = -1.0;
        }
        t.optimize(&cost, cols)?;
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art0)
            .map(|(i, _)| t.rhs(i))
            .sum();
        let scale = 1.0
            + p.eq_rhs
                .iter()
                .chain(&p.ub_rhs)
                .fold(0.0_f64, |a, b| a.max(b.abs()));
        if infeas > FEAS_EPS * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                point: vec![0.0; n],
                value: f64::NAN,
            });
        }
        // Drive artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art0 {
                let col = (0..art0).find(|&j| t.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&p.objective);
    if let Pivoted::Unbounded = t.optimize(&cost, art0)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            point: vec![0.0; n],
            value: f64::INFINITY,
        });
    }

    let mut point = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            point[b] = t.rhs(i).max(0.0);
        }
    }
    if let Some(refined) = resolve_basis(p, &t.basis, n) {
        if p.residual(&refined) <= p.residual(&point) {
            point = refined;
        }
    }
    let value = p.objective_at(&point);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point,
        value,
    })
}

/// Recomputes the basic variables by solving `B x_B = b` on the original
/// (slack-augmented) constraint data with partial pivoting.
fn resolve_basis(p: &LpProblem, basis: &[usize], n: usize) -> Option<Vec<f64>> {
    let m_ub = p.ub_rhs.len();
    let rows: Vec<(Vec<f64>, f64)> = p
        .ub_matrix
        .iter()
        .zip(&p.ub_rhs)
        .enumerate()
        .map(|(k, (row, &b))| {
            let mut r = row.clone();
            r.resize(n + m_ub, 0.0);
            r[n + k] = 1.0;
            (r, b)
        })
        .chain(p.eq_matrix.iter().zip(&p.eq_rhs).map(|(row, &b)| {
            let mut r = row.clone();
            r.resize(n + m_ub, 0.0);
            (r, b)
        }))
        .collect();
    let k = basis.len();
    if k == 0 {
        return Some(vec![0.0; n]);
    }
    // Redundant rows were dropped, so the system may be overdetermined:
    // solve the normal equations of the full row set restricted to basic columns.
    let mut ata = vec![vec![0.0; k + 1]; k];
    for (r, b) in &rows {
        for i in 0..k {
            let ri = r[basis[i]];
            if ri == 0.0 {
                continue;
            }
            for j in 0..k {
                ata[i][j] += ri * r[basis[j]];
            }
            ata[i][k] += ri * b;
        }
    }
    let sol = gauss_solve(ata)?;
    let mut point = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            point[b] = sol[i].max(0.0);
        }
    }
    Some(point)
}

/// Gaussian elimination with partial pivoting on an augmented `k × (k+1)` matrix.
pub(crate) fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for i in col + 1..k {
            let (head, tail) = a.split_at_mut(i);
            let (pivot, row) = (&head[col], &mut tail[0]);
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (v, p) in row[col..=k].iter_mut().zip(&pivot[col..=k]) {
                    *v -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][k] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
