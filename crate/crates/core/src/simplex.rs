//! Two-phase revised simplex over sparse columns with an explicit dense
//! basis inverse. Dantzig pricing, switching to Bland's rule during runs
//! of degenerate pivots.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// maximize objective·x subject to constraints, x ≥ 0
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
    /// largest constraint violation of `x`
    pub residual: f64,
    /// optimal w of min b·w s.t. Aᵀw ≥ c (w ≤ 0 on ≥ rows, w ≥ 0 on ≤ rows);
    /// empty unless optimal
    pub duals: Vec<f64>,
}

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;
const DEGENERATE_RUN: usize = 50;
const REFRESH: usize = 100;

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { n_vars, objective: vec![0.0; n_vars], constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Largest violation of the constraints and of x ≥ 0.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match c.relation {
                Relation::Eq => (lhs - c.rhs).abs(),
                Relation::Ge => (c.rhs - lhs).max(0.0),
                Relation::Le => (lhs - c.rhs).max(0.0),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn solve(&self) -> LpSolution {
        Solver::new(self).run(self)
    }
}

struct Solver {
    m: usize,
    n_struct: usize,
    first_art: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    flip: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    limit: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Limit,
}

impl Solver {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.n_vars;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut b = Vec::with_capacity(m);
        let mut flips = Vec::with_capacity(m);
        let mut slacks = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            let flip = c.rhs < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            for &(j, a) in &c.coeffs {
                if a != 0.0 {
                    cols[j].push((i, s * a));
                }
            }
            b.push(s * c.rhs);
            flips.push(s);
            match c.relation {
                Relation::Eq => {}
                Relation::Ge => slacks.push(vec![(i, -s)]),
                Relation::Le => slacks.push(vec![(i, s)]),
            }
        }
        for col in &mut cols {
            // merge repeated entries of a row
            col.sort_by_key(|e| e.0);
            col.dedup_by(|later, first| {
                if later.0 == first.0 {
                    first.1 += later.1;
                    true
                } else {
                    false
                }
            });
        }
        cols.extend(slacks);
        let first_art = cols.len();
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
        }
        let total = cols.len();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let basis: Vec<usize> = (first_art..total).collect();
        let mut is_basic = vec![false; total];
        basis.iter().for_each(|&j| is_basic[j] = true);
        let xb = b.clone();
        Solver { m, n_struct: n, first_art, cols, b, flip: flips, basis, is_basic, binv, xb, iterations: 0, limit: 50 * (total + m) + 1000 }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = cost[j];
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                y.iter_mut().zip(row).for_each(|(yi, bi)| *yi += c * bi);
            }
        }
        y
    }

    fn refresh_xb(&mut self) {
        let m = self.m;
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.xb[r] = row.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        }
    }

    fn column(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(k, a) in &self.cols[q] {
            for (i, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[i * m + k] * a;
            }
        }
        alpha
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        let t = self.xb[r] / ar;
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a != 0.0 {
                self.xb[i] -= t * a;
            }
        }
        self.xb[r] = t;
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / ar).collect();
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a != 0.0 {
                let row = &mut self.binv[i * m..(i + 1) * m];
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= a * p);
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = q;
        self.is_basic[q] = true;
        self.iterations += 1;
    }

    /// Minimizes cost·x over the current feasible basis.
    fn optimize(&mut self, cost: &[f64], allow_art: bool) -> Step {
        let mut degenerate = 0usize;
        let mut y = self.duals(cost);
        let mut since = 0usize;
        loop {
            if self.iterations >= self.limit {
                return Step::Limit;
            }
            if since >= REFRESH {
                self.refresh_xb();
                y = self.duals(cost);
                since = 0;
            }
            since += 1;
            let bland = degenerate >= DEGENERATE_RUN;
            let end = if allow_art { self.cols.len() } else { self.first_art };
            let mut enter = None;
            let mut best = -PRICE_TOL;
            for j in 0..end {
                if self.is_basic[j] {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>();
                if d < best {
                    enter = Some((j, d));
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some((q, dq)) = enter else { return Step::Optimal };
            let alpha = self.column(q);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, rk)) => {
                        let better = if ratio < rk - 1e-12 {
                            true
                        } else if ratio <= rk + 1e-12 {
                            if bland {
                                self.basis[i] < self.basis[k]
                            } else {
                                a > alpha[k]
                            }
                        } else {
                            false
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((k, rk))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else { return Step::Unbounded };
            if ratio < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            // y ← y + (d_q/α_r)·(row r of B⁻¹)
            let m = self.m;
            let f = dq / alpha[r];
            for (yi, bi) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                *yi += f * bi;
            }
            self.pivot(q, r, &alpha);
        }
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    fn drive_out(&mut self) {
        let m = self.m;
        for r in 0..m {
            if self.basis[r] < self.first_art {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let found = (0..self.first_art).filter(|&j| !self.is_basic[j]).find_map(|j| {
                let v: f64 = self.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                (v.abs() > 1e-7).then_some(j)
            });
            if let Some(q) = found {
                let alpha = self.column(q);
                self.pivot(q, r, &alpha);
            }
        }
        self.refresh_xb();
    }

    fn solution(&self, lp: &LinearProgram, status: LpStatus) -> LpSolution {
        self.solution_with(lp, status, None)
    }

    fn solution_with(&self, lp: &LinearProgram, status: LpStatus, cost: Option<&[f64]>) -> LpSolution {
        let mut x = vec![0.0; self.n_struct];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n_struct {
                x[j] = self.xb[r].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let residual = lp.residual(&x);
        let duals = match cost {
            Some(c) if status == LpStatus::Optimal => self.duals(c).iter().zip(&self.flip).map(|(y, s)| -s * y).collect(),
            _ => Vec::new(),
        };
        LpSolution { status, objective, x, iterations: self.iterations, residual, duals }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        let total = self.cols.len();
        let mut phase1 = vec![0.0; total];
        phase1[self.first_art..].iter_mut().for_each(|c| *c = 1.0);
        match self.optimize(&phase1, true) {
            Step::Limit => return self.solution(lp, LpStatus::IterationLimit),
            Step::Unbounded => unreachable!("phase one is bounded below"),
            Step::Optimal => {}
        }
        self.refresh_xb();
        let infeas: f64 = self.basis.iter().zip(&self.xb).filter(|(&j, _)| j >= self.first_art).map(|(_, v)| v.abs()).sum();
        let scale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > FEAS_TOL * scale {
            return self.solution(lp, LpStatus::Infeasible);
        }
        self.drive_out();
        let mut phase2 = vec![0.0; total];
        for (j, c) in lp.objective.iter().enumerate() {
            phase2[j] = -c;
        }
        let status = match self.optimize(&phase2, false) {
            Step::Limit => LpStatus::IterationLimit,
            Step::Unbounded => LpStatus::Unbounded,
            Step::Optimal => LpStatus::Optimal,
        };
        self.refresh_xb();
        self.solution_with(lp, status, Some(&phase2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_max() {
        // max 3x + 5y; x ≤ 4; 2y ≤ 12; 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn strong_duality() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        lp.add(vec![(0, 1.0), (1, 1.0)], Relation::Ge, -1.0);
        let s = lp.solve();
        let w = &s.duals;
        let bw: f64 = lp.constraints.iter().zip(w).map(|(c, w)| c.rhs * w).sum();
        assert!((bw - s.objective).abs() < 1e-9);
        for j in 0..2 {
            let col: f64 = lp.constraints.iter().zip(w).map(|(c, w)| w * c.coeffs.iter().filter(|e| e.0 == j).map(|e| e.1).sum::<f64>()).sum();
            assert!(col >= lp.objective[j] - 1e-9);
        }
        assert!(w[..3].iter().all(|&v| v >= -1e-12) && w[3] <= 1e-12);
    }

    #[test]
    fn equality_and_ge() {
        // max x − y; x + y = 1; x ≥ 0.25 with x ≤ 0.75
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, -1.0];
        lp.add(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add(vec![(0, 1.0)], Relation::Ge, 0.25);
        lp.add(vec![(0, 1.0)], Relation::Le, 0.75);
        let s = lp.solve();
        assert!((s.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add(vec![(0, 1.0)], Relation::Le, 1.0);
        lp.add(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.solve().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.add(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 2.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn beale_cycling_example() {
        // cycles under pure Dantzig with naive tie-breaking; optimum 1/20
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.add(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Relation::Le, 0.0);
        lp.add(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Relation::Le, 0.0);
        lp.add(vec![(2, 1.0)], Relation::Le, 1.0);
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.05).abs() < 1e-9);
    }
}
