//! Brute-force reference implementations for cross-checking the solvers.
//!
//! These are slow and capped to small sizes. They share no code with the
//! routines they check beyond the probability primitives and risk
//! evaluation.

use crate::agents::Allocation;
use crate::convolution::Market;
use crate::error::{Error, Result};
use crate::exec::{collect_ordered, map_indexed, Execution};
use crate::opt::{lp_solve, LpProblem, LpSolution, LpStatus};
use crate::prob::{ProbSpace, Rv};

pub const ES_ORACLE_MAX_STATES: usize = 12;
pub const BRUTE_FORCE_MAX_DIMS: usize = 6;
pub const VERTEX_ENUM_MAX_VARS: usize = 6;
pub const VERTEX_ENUM_MAX_CONSTRAINTS: usize = 8;

/// Pattern search stops once the step falls below this.
const POLISH_MIN_STEP: f64 = 1e-6;
/// Number of best grid points polished.
const POLISH_STARTS: usize = 4;
/// Grid budget used by [`GridSpec::around`].
const DEFAULT_GRID_BUDGET: f64 = 2e5;

/// Expected shortfall from its defining LP:
/// `max Σ p_i q_i x_i` s.t. `Σ p_i q_i = 1`, `0 ≤ q_i ≤ 1/α`.
pub fn es_lp_oracle(space: &ProbSpace, alpha: f64, x: &Rv) -> Result<f64> {
    let n = space.len();
    if n > ES_ORACLE_MAX_STATES {
        return Err(Error::SizeCap(format!(
            "{n} states exceed the oracle cap {ES_ORACLE_MAX_STATES}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level {alpha} outside (0, 1]"
        )));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let p = space.probs();
    let mut lp = LpProblem::new(p.iter().zip(x.values()).map(|(pi, xi)| pi * xi).collect());
    lp.add_eq(p.to_vec(), 1.0);
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        lp.add_ub(row, 1.0 / alpha);
    }
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        LpStatus::Infeasible => Err(Error::LpStatus("infeasible")),
        LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
    }
}

/// Search box and resolution for [`brute_force_value`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if points < 2 {
            return Err(Error::InvalidParameter(
                "a grid needs at least two points per axis".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidParameter(format!(
                    "grid bounds [{l}, {u}] are not a finite interval"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            points,
        })
    }

    /// The box `[−2‖x‖∞, 2‖x‖∞]^dims` (or `[−1, 1]` for `x = 0`), with as
    /// many points per axis as a budget of about 2·10⁵ evaluations allows.
    pub fn around(x: &Rv, dims: usize) -> Result<Self> {
        let r = match x.sup_norm() {
            n if n > 0.0 => 2.0 * n,
            _ => 1.0,
        };
        let points = if dims == 0 {
            2
        } else {
            (DEFAULT_GRID_BUDGET.powf(1.0 / dims as f64).floor() as usize).clamp(3, 101)
        };
        Self::new(vec![-r; dims], vec![r; dims], points)
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    fn total(&self) -> usize {
        self.points.pow(self.dims() as u32)
    }

    fn point(&self, mut index: usize) -> Vec<f64> {
        (0..self.dims())
            .map(|d| {
                let k = index % self.points;
                index /= self.points;
                self.lower[d]
                    + (self.upper[d] - self.lower[d]) * k as f64 / (self.points - 1) as f64
            })
            .collect()
    }

    fn spacing(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) / (self.points - 1) as f64)
            .fold(0.0, f64::max)
    }
}

/// Free coordinates are the shares of every atom but the last; the last
/// atom absorbs the remainder of `x`.
fn allocation_from(market: &Market, x: &Rv, free: &[f64]) -> Allocation {
    let n = x.len();
    let weights: Vec<f64> = market.agents().weights().collect();
    let last = weights.len() - 1;
    let mut rows: Vec<Vec<f64>> = free.chunks(n).map(|c| c.to_vec()).collect();
    let rest: Vec<f64> = (0..n)
        .map(|i| {
            let used: f64 = rows.iter().zip(&weights).map(|(r, w)| w * r[i]).sum();
            (x.values()[i] - used) / weights[last]
        })
        .collect();
    rows.push(rest);
    Allocation::new(rows).expect("rows built with consistent lengths")
}

fn objective(market: &Market, x: &Rv, free: &[f64]) -> Result<f64> {
    market.total_risk(&allocation_from(market, x, free))
}

/// All nonzero direction vectors with entries in `{−1, 0, 1}`.
fn pattern_directions(dims: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(dims as u32);
    (0..total)
        .filter(|&k| k != (total - 1) / 2)
        .map(|mut k| {
            (0..dims)
                .map(|_| {
                    let d = (k % 3) as f64 - 1.0;
                    k /= 3;
                    d
                })
                .collect()
        })
        .collect()
}

fn polish(
    market: &Market,
    x: &Rv,
    start: Vec<f64>,
    start_val: f64,
    step: f64,
) -> Result<(f64, Vec<f64>)> {
    let dirs = pattern_directions(start.len());
    let (mut best, mut at) = (start_val, start);
    let mut h = step;
    while h >= POLISH_MIN_STEP {
        let mut moved = false;
        for d in &dirs {
            let cand: Vec<f64> = at.iter().zip(d).map(|(a, di)| a + h * di).collect();
            let v = objective(market, x, &cand)?;
            if v < best {
                best = v;
                at = cand;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok((best, at))
}

/// Minimal total risk found by exhaustive grid search over the free
/// allocation coordinates followed by a pattern-search polish.
///
/// The result is the total risk of a feasible allocation, hence never below
/// the true value.
pub fn brute_force_value(market: &Market, x: &Rv, grid: &GridSpec) -> Result<f64> {
    brute_force_value_with(market, x, grid, Execution::Parallel)
}

pub fn brute_force_value_with(
    market: &Market,
    x: &Rv,
    grid: &GridSpec,
    exec: Execution,
) -> Result<f64> {
    let n = market.space().len();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let dims = (market.agents().len() - 1) * n;
    if dims > BRUTE_FORCE_MAX_DIMS {
        return Err(Error::SizeCap(format!(
            "{dims} free coordinates exceed the brute-force cap {BRUTE_FORCE_MAX_DIMS}"
        )));
    }
    if grid.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: grid.dims(),
        });
    }
    if dims == 0 {
        return objective(market, x, &[]);
    }
    let values = collect_ordered(map_indexed(exec, grid.total(), |k| {
        objective(market, x, &grid.point(k))
    }))?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let starts: Vec<usize> = order.into_iter().take(POLISH_STARTS).collect();
    let polished = collect_ordered(map_indexed(exec, starts.len(), |s| {
        let k = starts[s];
        polish(market, x, grid.point(k), values[k], grid.spacing())
    }))?;
    Ok(polished
        .into_iter()
        .map(|(v, _)| v)
        .fold(f64::INFINITY, f64::min))
}

/// Solves `n × n` systems by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let (head, tail) = a.split_at_mut(r);
            let (pivot, row) = (&head[col], &mut tail[0]);
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (v, p) in row[col..n].iter_mut().zip(&pivot[col..n]) {
                    *v -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * out[c]).sum();
        out[r] = (b[r] - s) / a[r][r];
    }
    Some(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximizes an LP by enumerating every basic solution: each choice of
/// `n` linearly independent active constraints among the equalities,
/// inequalities and sign bounds. Assumes a bounded feasible region.
pub fn vertex_enum_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.num_constraints();
    if n > VERTEX_ENUM_MAX_VARS || m > VERTEX_ENUM_MAX_CONSTRAINTS {
        return Err(Error::SizeCap(format!(
            "{n} variables and {m} constraints exceed the enumeration caps"
        )));
    }
    const TOL: f64 = 1e-9;
    // rows: equalities, inequalities, then −x_j ≤ 0
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    rows.extend(p.eq_matrix.iter().cloned().zip(p.eq_rhs.iter().copied()));
    rows.extend(p.ub_matrix.iter().cloned().zip(p.ub_rhs.iter().copied()));
    for j in 0..n {
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        rows.push((r, 0.0));
    }
    let feasible = |q: &[f64]| -> bool {
        let dot = |r: &[f64]| r.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        q.iter().all(|&v| v >= -TOL)
            && p.eq_matrix
                .iter()
                .zip(&p.eq_rhs)
                .all(|(r, b)| (dot(r) - b).abs() <= TOL * (1.0 + b.abs()))
            && p.ub_matrix
                .iter()
                .zip(&p.ub_rhs)
                .all(|(r, b)| dot(r) - b <= TOL * (1.0 + b.abs()))
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for pick in combinations(rows.len(), n) {
        let a: Vec<Vec<f64>> = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&i| rows[i].1).collect();
        let Some(point) = solve_square(a, b) else {
            continue;
        };
        if !feasible(&point) {
            continue;
        }
        let v = p.objective_at(&point);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, point));
        }
    }
    Ok(match best {
        Some((value, point)) => LpSolution {
            status: LpStatus::Optimal,
            point,
            value,
        },
        None => LpSolution {
            status: LpStatus::Infeasible,
            point: Vec::new(),
            value: f64::NAN,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentSpace, RiskFamily};
    use crate::risk::RiskSpec;

    #[test]
    fn es_oracle_extremes() {
        let s = ProbSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let x = Rv::new(&s, vec![4.0, -2.0, 1.0, 0.5]).unwrap();
        assert!((es_lp_oracle(&s, 1.0, &x).unwrap() - s.expect(&x).unwrap()).abs() < 1e-12);
        assert!((es_lp_oracle(&s, 0.1, &x).unwrap() - 4.0).abs() < 1e-12);
        let big = ProbSpace::uniform(13).unwrap();
        assert!(matches!(
            es_lp_oracle(&big, 0.5, &Rv::zeros(13)),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn vertex_enumeration_small_cases() {
        // unit simplex: best coordinate
        let mut lp = LpProblem::new(vec![1.0, 3.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0, 1.0], 1.0);
        let sol = vertex_enum_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-12);

        let mut bad = LpProblem::new(vec![1.0, 1.0]);
        bad.add_eq(vec![1.0, 1.0], 1.0);
        bad.add_eq(vec![1.0, 1.0], 2.0);
        assert_eq!(vertex_enum_lp(&bad).unwrap().status, LpStatus::Infeasible);

        let mut textbook = LpProblem::new(vec![3.0, 5.0]);
        textbook.add_ub(vec![1.0, 0.0], 4.0);
        textbook.add_ub(vec![0.0, 2.0], 12.0);
        textbook.add_ub(vec![3.0, 2.0], 18.0);
        assert!((vertex_enum_lp(&textbook).unwrap().value - 36.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_single_atom_is_exact() {
        let s = ProbSpace::new(vec![0.5, 0.5]).unwrap();
        let x = Rv::new(&s, vec![1.0, -1.0]).unwrap();
        let m = Market::new(
            s.clone(),
            AgentSpace::finite(1).unwrap(),
            RiskFamily::general(vec![RiskSpec::entropic(1.0).unwrap()]).unwrap(),
        )
        .unwrap();
        let grid = GridSpec::around(&x, 0).unwrap();
        let want = RiskSpec::entropic(1.0).unwrap().rho(&s, &x).unwrap();
        assert_eq!(brute_force_value(&m, &x, &grid).unwrap(), want);
    }

    #[test]
    fn brute_force_matches_closed_forms() {
        let s = ProbSpace::new(vec![0.3, 0.7]).unwrap();
        let x = Rv::new(&s, vec![1.5, -0.5]).unwrap();
        let ent = Market::new(
            s.clone(),
            AgentSpace::finite(2).unwrap(),
            RiskFamily::general(vec![RiskSpec::entropic(1.0).unwrap(); 2]).unwrap(),
        )
        .unwrap();
        let grid = GridSpec::around(&x, 2).unwrap();
        let want = RiskSpec::entropic(2.0).unwrap().rho(&s, &x).unwrap();
        assert!((brute_force_value(&ent, &x, &grid).unwrap() - want).abs() < 1e-4);

        let es = Market::new(
            s.clone(),
            AgentSpace::finite(2).unwrap(),
            RiskFamily::general(vec![
                RiskSpec::expected_shortfall(0.5).unwrap(),
                RiskSpec::expected_shortfall(1.0 / 3.0).unwrap(),
            ])
            .unwrap(),
        )
        .unwrap();
        let want = RiskSpec::expected_shortfall(0.5)
            .unwrap()
            .rho(&s, &x)
            .unwrap();
        let got = brute_force_value(&es, &x, &grid).unwrap();
        assert!(got >= want - 1e-12);
        assert!(got - want < 1e-4);
    }

    #[test]
    fn directions_exclude_zero() {
        let d = pattern_directions(2);
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|v| v.iter().any(|&c| c != 0.0)));
    }
}
