//! Maximization of dual objectives over probability densities.
//!
//! Feasible sets are intersections of the density simplex
//! `{q ≥ 0, Σ p_i q_i = 1}` with
//! * an entrywise cap `q ≤ u` (expected shortfall and its inflations), and
//! * scenario-hull constraints, either `q ∈ conv(D)` or `q ≤ s·d` for some
//!   `d ∈ conv(D)` (inflations of a scenario set).
//!
//! Scores are linear, `E^q[x]`, or entropically penalized,
//! `E^q[x] − c·KL(q)`. Linear scores go to the simplex solver. Entropic
//! scores over a capped simplex use projected gradient ascent in the
//! entropy geometry; with scenario hulls present, fully-corrective Frank–Wolfe
//! driven by linear subproblems.

use super::lp::{gauss_solve, lp_solve, LpProblem, LpStatus};
use crate::error::{Error, Result};
use crate::prob::{Density, ProbSpace, Rv};

/// Convergence threshold on the gradient-mapping norm (mirror ascent) or the
/// Frank–Wolfe gap.
pub const DUAL_TOL: f64 = 1e-8;
pub const MAX_DUAL_ITERATIONS: usize = 50_000;
/// Newton corrections per Frank–Wolfe iteration.
const MAX_CORRECTIONS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum HullKind {
    /// `q ∈ conv(D)`.
    Member,
    /// `q ≤ scale·d` entrywise for some `d ∈ conv(D)`.
    Dominated { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub scenarios: Vec<Vec<f64>>,
    pub kind: HullKind,
}

/// Polyhedral restrictions on a density, on top of the simplex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DensityConstraints {
    /// Entrywise cap; `None` or `f64::INFINITY` entries mean unbounded.
    pub upper: Option<Vec<f64>>,
    pub hulls: Vec<Hull>,
}

impl DensityConstraints {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn is_box_only(&self) -> bool {
        self.hulls.is_empty()
    }

    /// Tightens the entrywise cap.
    pub fn cap(&mut self, upper: &[f64]) {
        match &mut self.upper {
            Some(u) => u.iter_mut().zip(upper).for_each(|(a, &b)| *a = a.min(b)),
            None => self.upper = Some(upper.to_vec()),
        }
    }

    /// Adds a hull constraint, folding single-scenario dominance into the cap.
    pub fn push_hull(&mut self, hull: Hull) {
        if let (HullKind::Dominated { scale }, [d]) = (&hull.kind, hull.scenarios.as_slice()) {
            let u: Vec<f64> = d.iter().map(|v| scale * v).collect();
            self.cap(&u);
            return;
        }
        self.hulls.push(hull);
    }

    pub fn merge(&mut self, other: DensityConstraints) {
        if let Some(u) = &other.upper {
            self.cap(u);
        }
        for h in other.hulls {
            self.push_hull(h);
        }
    }

    /// Largest violation of the constraints at `q`, measured by a small LP
    /// for the hull parts.
    pub fn residual(&self, space: &ProbSpace, q: &[f64]) -> Result<f64> {
        let mut r = (space.dot(q) - 1.0).abs();
        r = q.iter().fold(r, |m, &v| m.max(-v));
        if let Some(u) = &self.upper {
            r = q.iter().zip(u).fold(r, |m, (&v, &u)| m.max(v - u));
        }
        for h in &self.hulls {
            r = r.max(hull_violation(space, h, q)?);
        }
        Ok(r)
    }

    /// Builds the LP `max Σ p_i w_i q_i` over these constraints. Variables are
    /// `q` followed by one weight block per hull.
    pub fn lp(&self, space: &ProbSpace, weights: &[f64]) -> LpProblem {
        let n = space.len();
        let total: usize = n + self.hulls.iter().map(|h| h.scenarios.len()).sum::<usize>();
        let mut obj = vec![0.0; total];
        for i in 0..n {
            obj[i] = space.probs()[i] * weights[i];
        }
        let mut p = LpProblem::new(obj);
        let mut row = vec![0.0; total];
        row[..n].copy_from_slice(space.probs());
        p.add_eq(row, 1.0);
        if let Some(u) = &self.upper {
            for (i, &ui) in u.iter().enumerate() {
                if ui.is_finite() {
                    let mut row = vec![0.0; total];
                    row[i] = 1.0;
                    p.add_ub(row, ui);
                }
            }
        }
        let mut offset = n;
        for h in &self.hulls {
            let k = h.scenarios.len();
            let mut row = vec![0.0; total];
            row[offset..offset + k].iter_mut().for_each(|v| *v = 1.0);
            p.add_eq(row, 1.0);
            for i in 0..n {
                let mut row = vec![0.0; total];
                row[i] = 1.0;
                match h.kind {
                    HullKind::Member => {
                        for (j, d) in h.scenarios.iter().enumerate() {
                            row[offset + j] = -d[i];
                        }
                        p.add_eq(row, 0.0);
                    }
                    HullKind::Dominated { scale } => {
                        for (j, d) in h.scenarios.iter().enumerate() {
                            row[offset + j] = -scale * d[i];
                        }
                        p.add_ub(row, 0.0);
                    }
                }
            }
            offset += k;
        }
        p
    }
}

/// Distance from `q` to a hull constraint: total-variation distance to
/// `conv(D)` for membership, `Σ p_i (q_i − s·d_i)^+` minimized over the hull
/// for dominance.
pub fn hull_violation(space: &ProbSpace, hull: &Hull, q: &[f64]) -> Result<f64> {
    let n = space.len();
    let k = hull.scenarios.len();
    let p = space.probs();
    // variables: λ (k), s⁺ (n), s⁻ (n, membership only)
    let member = hull.kind == HullKind::Member;
    let total = k + n + if member { n } else { 0 };
    let mut obj = vec![0.0; total];
    for i in 0..n {
        obj[k + i] = -p[i];
        if member {
            obj[k + n + i] = -p[i];
        }
    }
    let mut lp = LpProblem::new(obj);
    let mut row = vec![0.0; total];
    row[..k].iter_mut().for_each(|v| *v = 1.0);
    lp.add_eq(row, 1.0);
    for i in 0..n {
        let mut row = vec![0.0; total];
        match hull.kind {
            HullKind::Member => {
                // Σ_j λ_j d_ji + s⁺_i − s⁻_i = q_i
                for (j, d) in hull.scenarios.iter().enumerate() {
                    row[j] = d[i];
                }
                row[k + i] = 1.0;
                row[k + n + i] = -1.0;
                lp.add_eq(row, q[i]);
            }
            HullKind::Dominated { scale } => {
                // q_i − s·Σ λ_j d_ji ≤ s⁺_i
                for (j, d) in hull.scenarios.iter().enumerate() {
                    row[j] = -scale * d[i];
                }
                row[k + i] = -1.0;
                lp.add_ub(row, -q[i]);
            }
        }
    }
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let v = -sol.value;
            Ok(if member { 0.5 * v } else { v }.max(0.0))
        }
        LpStatus::Infeasible => Ok(f64::INFINITY),
        LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DualScore<'a> {
    /// `E^q[x]`.
    Linear(&'a Rv),
    /// `E^q[x] − coef·KL(q)`, `coef > 0`.
    EntropicPenalized { x: &'a Rv, coef: f64 },
}

impl DualScore<'_> {
    pub fn loss(&self) -> &Rv {
        match self {
            DualScore::Linear(x) => x,
            DualScore::EntropicPenalized { x, .. } => x,
        }
    }

    pub fn eval(&self, space: &ProbSpace, q: &[f64]) -> f64 {
        match *self {
            DualScore::Linear(x) => space.dot(&mul(q, x.values())),
            DualScore::EntropicPenalized { x, coef } => {
                entropic_objective(space, x.values(), coef, q)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOptimum {
    pub density: Density,
    pub score: f64,
    pub iterations: usize,
    /// Final gradient-mapping norm or Frank–Wolfe gap; zero for LP solves.
    pub residual: f64,
}

/// Maximizes `score` over the densities satisfying `feasible`.
///
/// Returns `Error::IllPosed` when the feasible set is empty and
/// `Error::NonConvergence` when an iterative path exhausts its budget.
pub fn maximize_over_densities(
    space: &ProbSpace,
    score: DualScore<'_>,
    feasible: &DensityConstraints,
) -> Result<DensityOptimum> {
    space.check_dim(score.loss().len())?;
    match score {
        DualScore::Linear(x) => {
            let lp = feasible.lp(space, x.values());
            let sol = lp_solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::IllPosed),
                LpStatus::Unbounded => return Err(Error::LpStatus("unbounded")),
            }
            let density = Density::normalized(space, sol.point[..space.len()].to_vec())?;
            let score = space.expect_under(&density, x)?;
            Ok(DensityOptimum {
                density,
                score,
                iterations: 0,
                residual: 0.0,
            })
        }
        DualScore::EntropicPenalized { x, coef } => {
            if !(coef > 0.0 && coef.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "entropic coefficient must be positive, got {coef}"
                )));
            }
            if feasible.is_box_only() {
                mirror_ascent(space, x.values(), coef, feasible.upper.as_deref())
            } else {
                fully_corrective_frank_wolfe(space, x.values(), coef, feasible)
            }
        }
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a * b).collect()
}

fn entropic_objective(space: &ProbSpace, x: &[f64], coef: f64, q: &[f64]) -> f64 {
    space
        .probs()
        .iter()
        .zip(q)
        .zip(x)
        .map(|((p, &q), x)| {
            let ent = if q > 0.0 { q * q.ln() } else { 0.0 };
            p * (q * x - coef * ent)
        })
        .sum()
}

/// Solves `Σ p_i min(u_i, b_i S) = 1` for `S > 0` exactly; `h(S)` is
/// piecewise linear and increasing. Returns `None` when `Σ p_i u_i < 1`.
fn capped_scale(p: &[f64], b: &[f64], u: Option<&[f64]>) -> Option<f64> {
    let n = p.len();
    let cap = |i: usize| u.map_or(f64::INFINITY, |u| u[i]);
    let capacity: f64 = (0..n).map(|i| p[i] * cap(i)).sum();
    if capacity < 1.0 - 1e-12 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| b[i] > 0.0).collect();
    order.sort_by(|&i, &j| (cap(i) / b[i]).total_cmp(&(cap(j) / b[j])).then(i.cmp(&j)));
    let mut capped_mass = 0.0;
    let mut slope: f64 = order.iter().map(|&i| p[i] * b[i]).sum();
    for &i in &order {
        let s = (1.0 - capped_mass) / slope;
        if s <= cap(i) / b[i] {
            return Some(s);
        }
        capped_mass += p[i] * cap(i);
        slope -= p[i] * b[i];
        if slope <= 0.0 {
            break;
        }
    }
    // Every state is capped: capacity is exactly one.
    Some(f64::INFINITY)
}

/// `q_i = min(u_i, exp(a_i)·S)` normalized to unit mass, computed stably.
fn capped_gibbs(space: &ProbSpace, a: &[f64], u: Option<&[f64]>) -> Result<Vec<f64>> {
    let m = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b: Vec<f64> = a.iter().map(|v| (v - m).exp()).collect();
    let s = capped_scale(space.probs(), &b, u).ok_or(Error::IllPosed)?;
    let q: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(i, &bi)| {
            let cap = u.map_or(f64::INFINITY, |u| u[i]);
            if s.is_infinite() {
                cap
            } else {
                (bi * s).min(cap)
            }
        })
        .collect();
    Ok(q)
}

/// Exact maximizer of `E^q[x] − coef·KL(q)` over `{q ≤ u}`: the Gibbs
/// density `e^{x/coef}` truncated at the cap and renormalized.
pub fn entropic_capped_optimizer(
    space: &ProbSpace,
    x: &Rv,
    coef: f64,
    upper: Option<&[f64]>,
) -> Result<Density> {
    space.check_dim(x.len())?;
    let a: Vec<f64> = x.values().iter().map(|v| v / coef).collect();
    let q = capped_gibbs(space, &a, upper)?;
    Density::normalized(space, q)
}

fn mirror_ascent(
    space: &ProbSpace,
    x: &[f64],
    coef: f64,
    upper: Option<&[f64]>,
) -> Result<DensityOptimum> {
    let p = space.probs();
    let n = p.len();
    let f = |q: &[f64]| entropic_objective(space, x, coef, q);
    // Start from the entropy projection of the uniform density onto the cap.
    let mut q = capped_gibbs(space, &vec![0.0; n], upper)?;
    let mut fq = f(&q);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_DUAL_ITERATIONS {
        iterations += 1;
        let grad: Vec<f64> = q
            .iter()
            .zip(x)
            .map(|(&qi, &xi)| {
                if qi > 0.0 {
                    xi - coef * (qi.ln() + 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let mut t = 1.0 / coef;
        let (next, f_next) = loop {
            let a: Vec<f64> = q
                .iter()
                .zip(&grad)
                .map(|(&qi, g)| {
                    if qi > 0.0 {
                        qi.ln() + t * g
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let cand = capped_gibbs(space, &a, upper)?;
            let f_cand = f(&cand);
            let lin: f64 = (0..n).map(|i| p[i] * grad[i] * (cand[i] - q[i])).sum();
            let bregman: f64 = (0..n)
                .map(|i| {
                    let (c, r) = (cand[i], q[i]);
                    let l = if c > 0.0 && r > 0.0 {
                        c * (c / r).ln()
                    } else {
                        0.0
                    };
                    p[i] * (l - c + r)
                })
                .sum();
            let slack = 1e-14 * (1.0 + fq.abs());
            if f_cand + slack >= fq + lin - bregman / t || t < 1e-12 {
                break (cand, f_cand);
            }
            t *= 0.5;
        };
        residual = q
            .iter()
            .zip(&next)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / t;
        let improved = f_next >= fq;
        if improved {
            q = next;
            fq = f_next;
        }
        if residual <= DUAL_TOL || !improved {
            break;
        }
    }
    if residual > DUAL_TOL {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    let density = Density::normalized(space, q)?;
    let score = f(density.values());
    Ok(DensityOptimum {
        density,
        score,
        iterations,
        residual,
    })
}

fn linear_oracle(
    space: &ProbSpace,
    feasible: &DensityConstraints,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let sol = lp_solve(&feasible.lp(space, weights))?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.point[..space.len()].to_vec()),
        LpStatus::Infeasible => Err(Error::IllPosed),
        LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
    }
}

/// Fully-corrective Frank–Wolfe (simplicial decomposition): the linear
/// oracle proposes vertices, and after each proposal the weights over the
/// retained vertices are re-optimized by equality-constrained Newton steps.
fn fully_corrective_frank_wolfe(
    space: &ProbSpace,
    x: &[f64],
    coef: f64,
    feasible: &DensityConstraints,
) -> Result<DensityOptimum> {
    let p = space.probs();
    let n = p.len();
    let f = |q: &[f64]| entropic_objective(space, x, coef, q);

    // Start at the average of the vertices maximizing each coordinate, which
    // is positive on every state any feasible density charges.
    let mut active: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        let mut w = vec![0.0; n];
        w[i] = 1.0 / p[i];
        let v = linear_oracle(space, feasible, &w)?;
        if !active.iter().any(|(a, _)| same_vertex(a, &v)) {
            active.push((v, 0.0));
        }
    }
    let k = active.len() as f64;
    active.iter_mut().for_each(|(_, w)| *w = 1.0 / k);
    let support: Vec<bool> = combine(&active, n).iter().map(|&v| v > 1e-14).collect();
    let gradient = |q: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if support[i] {
                    x[i] - coef * (q[i].ln() + 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    };

    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_DUAL_ITERATIONS {
        iterations += 1;
        correct_weights(p, x, coef, &mut active, &support);
        let q = combine(&active, n);
        let grad = gradient(&q);
        let ip = |v: &[f64]| -> f64 { (0..n).map(|i| p[i] * grad[i] * v[i]).sum() };
        let s = linear_oracle(space, feasible, &grad)?;
        gap = ip(&s) - ip(&q);
        if gap <= DUAL_TOL {
            break;
        }
        let step = line_search(p, x, coef, &q, &sub(&s, &q), 1.0, &support);
        if step <= 0.0 {
            break;
        }
        active.iter_mut().for_each(|(_, w)| *w *= 1.0 - step);
        match active.iter().position(|(a, _)| same_vertex(a, &s)) {
            Some(j) => active[j].1 += step,
            None => active.push((s, step)),
        }
        active.retain(|(_, w)| *w > 1e-15);
    }
    if gap > DUAL_TOL {
        return Err(Error::NonConvergence {
            iterations,
            residual: gap,
        });
    }
    let density = Density::normalized(space, combine(&active, n))?;
    let score = f(density.values());
    Ok(DensityOptimum {
        density,
        score,
        iterations,
        residual: gap,
    })
}

/// Maximizes the entropic objective over the convex hull of the active
/// vertices. Each Newton direction keeps the weights summing to one; the
/// step is an exact line search cut off where a weight reaches zero, in
/// which case that vertex leaves the active set.
fn correct_weights(
    p: &[f64],
    x: &[f64],
    coef: f64,
    active: &mut Vec<(Vec<f64>, f64)>,
    support: &[bool],
) {
    let n = p.len();
    for _ in 0..MAX_CORRECTIONS {
        let k = active.len();
        if k < 2 {
            return;
        }
        let q = combine(active, n);
        let g: Vec<f64> = (0..n)
            .map(|i| {
                if support[i] {
                    x[i] - coef * (q[i].ln() + 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let grad: Vec<f64> = active
            .iter()
            .map(|(v, _)| (0..n).map(|i| p[i] * v[i] * g[i]).sum())
            .collect();
        // KKT system [H 1; 1ᵀ 0] with H = −coef·Vᵀ diag(p/q) V, lightly
        // regularized since vertices may be affinely dependent.
        let mut h = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let v: f64 = (0..n)
                    .filter(|&i| support[i])
                    .map(|i| p[i] * active[a].0[i] * active[b].0[i] / q[i])
                    .sum();
                h[a][b] = -coef * v;
                h[b][a] = -coef * v;
            }
        }
        let scale = (0..k)
            .map(|a| h[a][a].abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut sys: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                let mut row = h[a].clone();
                row[a] -= 1e-10 * scale;
                row.push(1.0);
                row.push(-grad[a]);
                row
            })
            .collect();
        let mut last = vec![1.0; k];
        last.extend([0.0, 0.0]);
        sys.push(last);
        let Some(sol) = gauss_solve(sys) else { return };
        let d = &sol[..k];
        let ascent: f64 = d.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if !(ascent > 1e-15) {
            return;
        }
        let (limit, blocking) = d
            .iter()
            .zip(active.iter())
            .enumerate()
            .filter(|(_, (&dj, _))| dj < 0.0)
            .map(|(j, (&dj, (_, w)))| (w / -dj, j))
            .fold(
                (f64::INFINITY, usize::MAX),
                |m, c| if c.0 < m.0 { c } else { m },
            );
        let dir: Vec<f64> = (0..n)
            .map(|i| active.iter().zip(d).map(|((v, _), dj)| dj * v[i]).sum())
            .collect();
        let max_step = limit.min(1e6);
        let step = line_search(p, x, coef, &q, &dir, max_step, support);
        if step <= 0.0 {
            return;
        }
        active
            .iter_mut()
            .zip(d)
            .for_each(|((_, w), dj)| *w += step * dj);
        if step >= limit && blocking != usize::MAX {
            active[blocking].1 = 0.0;
        }
        active.retain(|(_, w)| *w > 1e-15);
        let total: f64 = active.iter().map(|(_, w)| w).sum();
        active.iter_mut().for_each(|(_, w)| *w /= total);
    }
}

fn same_vertex(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
}

fn combine(active: &[(Vec<f64>, f64)], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    for (v, w) in active {
        q.iter_mut().zip(v).for_each(|(q, v)| *q += w * v);
    }
    q
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}

/// Exact line search for the concave entropic objective on `q + s·dir`,
/// `s ∈ [0, max_step]`, by bisection on the directional derivative.
fn line_search(
    p: &[f64],
    x: &[f64],
    coef: f64,
    q: &[f64],
    dir: &[f64],
    max_step: f64,
    support: &[bool],
) -> f64 {
    let deriv = |s: f64| -> f64 {
        let mut d = 0.0;
        for i in 0..q.len() {
            if !support[i] || dir[i] == 0.0 {
                continue;
            }
            let qi = q[i] + s * dir[i];
            if qi <= 0.0 {
                return if dir[i] < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                };
            }
            d += p[i] * dir[i] * (x[i] - coef * (qi.ln() + 1.0));
        }
        d
    };
    if deriv(0.0) <= 0.0 {
        return 0.0;
    }
    if deriv(max_step) >= 0.0 {
        return max_step;
    }
    let (mut lo, mut hi) = (0.0, max_step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if deriv(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
