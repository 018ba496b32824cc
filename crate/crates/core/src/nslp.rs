//! Eavesdropper guessing probability over non-signalling extensions
//! P(a, e | x, u) of the observed box.

use serde::{Deserialize, Serialize};

use crate::bell::Functional;
use crate::engine::{outcome_signs, ConditionalDistribution};
use crate::error::{Error, Result};
use crate::simplex::{LinearProgram, LpSolution, LpStatus, Relation};

pub const DEFAULT_SIZE_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsLpProblem {
    pub arities: Vec<usize>,
    #[serde(default = "two")]
    pub e_arity: usize,
    #[serde(default = "one")]
    pub u_arity: usize,
    /// observed P(a|x); when absent only the violation floor constrains it
    #[serde(default, with = "observed_serde")]
    pub observed: Option<ConditionalDistribution>,
    /// correlator terms (coefficient, input tuple)
    pub functional: Functional,
    pub floor: f64,
    pub target_party: usize,
    /// input tuple at which e must match the target's outcome (default all zeros)
    #[serde(default)]
    pub guess_inputs: Option<Vec<usize>>,
}

fn two() -> usize {
    2
}

fn one() -> usize {
    1
}

mod observed_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<ConditionalDistribution>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|d| d.to_json_value()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ConditionalDistribution>, D::Error> {
        let v: Option<serde_json::Value> = Option::deserialize(d)?;
        v.map(ConditionalDistribution::from_json_value).transpose().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NsLpSolution {
    pub status: LpStatus,
    pub optimum: f64,
    /// P(a, e | x, u) in [`Layout`] order
    pub argument: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Variable indexing ((x·U + u)·2ⁿ + a)·E + e.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub tuples: usize,
    pub u: usize,
    pub outcomes: usize,
    pub e: usize,
}

impl Layout {
    pub fn var(&self, x: usize, u: usize, a: usize, e: usize) -> usize {
        ((x * self.u + u) * self.outcomes + a) * self.e + e
    }

    pub fn count(&self) -> usize {
        self.tuples * self.u * self.outcomes * self.e
    }
}

impl NsLpProblem {
    pub fn n(&self) -> usize {
        self.arities.len()
    }

    pub fn layout(&self) -> Layout {
        Layout { tuples: self.arities.iter().product(), u: self.u_arity, outcomes: 1 << self.n(), e: self.e_arity }
    }

    fn tuple_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.n() || x.iter().zip(&self.arities).any(|(a, b)| a >= b) {
            return Err(Error::Domain(format!("input tuple {x:?} does not match arities {:?}", self.arities)));
        }
        Ok(x.iter().zip(&self.arities).fold(0, |acc, (xi, k)| acc * k + xi))
    }

    fn inputs_of(&self, mut t: usize) -> Vec<usize> {
        let mut x = vec![0; self.n()];
        for j in (0..self.n()).rev() {
            x[j] = t % self.arities[j];
            t /= self.arities[j];
        }
        x
    }

    /// Coefficient of P(a|x) in the functional, per (tuple, outcome).
    pub fn functional_coefficients(&self) -> Result<Vec<f64>> {
        let l = self.layout();
        let mut f = vec![0.0; l.tuples * l.outcomes];
        for (c, x) in &self.functional {
            if !c.is_finite() {
                return Err(Error::Domain("non-finite functional coefficient".into()));
            }
            let t = self.tuple_index(x)?;
            for a in 0..l.outcomes {
                let sign = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                f[t * l.outcomes + a] += c * sign;
            }
        }
        Ok(f)
    }

    /// Σ_x max_a f(x, a)
    pub fn algebraic_max(&self) -> Result<f64> {
        let l = self.layout();
        let f = self.functional_coefficients()?;
        Ok(f.chunks(l.outcomes).map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).sum())
    }

    fn validate(&self, size_limit: usize) -> Result<()> {
        if self.arities.is_empty() || self.arities.contains(&0) || self.e_arity == 0 || self.u_arity == 0 {
            return Err(Error::Domain("arities must be positive".into()));
        }
        if self.target_party >= self.n() {
            return Err(Error::UnknownParty(self.target_party));
        }
        let count = self.layout().count();
        if count > size_limit {
            return Err(Error::Domain(format!("LP has {count} variables, limit {size_limit}")));
        }
        if let Some(obs) = &self.observed {
            if obs.arities != self.arities {
                return Err(Error::Domain("observed table arities differ from the problem".into()));
            }
            if obs.signalling() > 1e-8 {
                return Err(Error::Domain("observed table is signalling".into()));
            }
        }
        Ok(())
    }
}

/// Normalization, non-signalling for single-party switches and for the
/// eavesdropper input, consistency with the observed table, and
/// functional ≥ floor; objective is P(e = a_target) at the guess inputs.
pub fn build_lp(p: &NsLpProblem, size_limit: usize) -> Result<LinearProgram> {
    p.validate(size_limit)?;
    let n = p.n();
    let l = p.layout();
    let pu = 1.0 / p.u_arity as f64;
    let mut lp = LinearProgram::new(l.count());
    for x in 0..l.tuples {
        for u in 0..l.u {
            let coeffs = (0..l.outcomes).flat_map(|a| (0..l.e).map(move |e| (l.var(x, u, a, e), 1.0))).collect();
            lp.add(coeffs, Relation::Eq, 1.0);
        }
    }
    for j in 0..n {
        let bit = 1 << (n - 1 - j);
        for x in 0..l.tuples {
            let xs = p.inputs_of(x);
            if xs[j] == 0 {
                continue;
            }
            let mut base = xs.clone();
            base[j] = 0;
            let x0 = p.tuple_index(&base)?;
            for u in 0..l.u {
                for a in (0..l.outcomes).filter(|a| a & bit == 0) {
                    for e in 0..l.e {
                        let mut c = Vec::with_capacity(4);
                        for aa in [a, a | bit] {
                            c.push((l.var(x, u, aa, e), 1.0));
                            c.push((l.var(x0, u, aa, e), -1.0));
                        }
                        lp.add(c, Relation::Eq, 0.0);
                    }
                }
            }
        }
    }
    for u in 1..l.u {
        for x in 0..l.tuples {
            for a in 0..l.outcomes {
                let mut c = Vec::new();
                for e in 0..l.e {
                    c.push((l.var(x, u, a, e), 1.0));
                    c.push((l.var(x, 0, a, e), -1.0));
                }
                lp.add(c, Relation::Eq, 0.0);
            }
        }
    }
    if let Some(obs) = &p.observed {
        for x in 0..l.tuples {
            for a in 0..l.outcomes {
                let c = (0..l.u).flat_map(|u| (0..l.e).map(move |e| (l.var(x, u, a, e), pu))).collect();
                lp.add(c, Relation::Eq, obs.table[x * l.outcomes + a]);
            }
        }
    }
    let f = p.functional_coefficients()?;
    let mut c = Vec::new();
    for x in 0..l.tuples {
        for a in 0..l.outcomes {
            let fa = f[x * l.outcomes + a];
            if fa != 0.0 {
                for u in 0..l.u {
                    for e in 0..l.e {
                        c.push((l.var(x, u, a, e), fa * pu));
                    }
                }
            }
        }
    }
    lp.add(c, Relation::Ge, p.floor);
    let g = p.guess_inputs.clone().unwrap_or_else(|| vec![0; n]);
    let xg = p.tuple_index(&g)?;
    for u in 0..l.u {
        for a in 0..l.outcomes {
            // e = 0 guesses +1, e = 1 guesses −1
            let e = usize::from(outcome_signs(n, a)[p.target_party] < 0);
            if e < l.e {
                lp.objective[l.var(xg, u, a, e)] += pu;
            }
        }
    }
    Ok(lp)
}

/// Solves [`build_lp`] directly in P(a, e | x, u) space. Slow on large
/// instances; kept as an independent route for small ones.
pub fn solve_direct(p: &NsLpProblem) -> Result<NsLpSolution> {
    let lp = build_lp(p, DEFAULT_SIZE_LIMIT)?;
    let s: LpSolution = lp.solve();
    Ok(NsLpSolution { status: s.status, optimum: s.objective, argument: s.x, residual: s.residual, iterations: s.iterations })
}

/// Full-correlator coordinates of one (u, e) slice: ξ_j = 0 leaves party j
/// out, ξ_j = x_j + 1 includes it with input x_j. Every point is a
/// non-signalling (unnormalized) box and every such box has coordinates.
struct Coords {
    ext: Vec<usize>,
    dim: usize,
    /// P(a|x) = Σ coef·z_ξ, per tuple·2ⁿ + a
    expand: Vec<Vec<(usize, f64)>>,
}

impl Coords {
    fn new(p: &NsLpProblem) -> Self {
        let n = p.n();
        let ext: Vec<usize> = p.arities.iter().map(|k| k + 1).collect();
        let dim = ext.iter().product();
        let l = p.layout();
        let scale = 1.0 / l.outcomes as f64;
        let mut expand = Vec::with_capacity(l.tuples * l.outcomes);
        for t in 0..l.tuples {
            let x = p.inputs_of(t);
            for a in 0..l.outcomes {
                let mut row = Vec::with_capacity(l.outcomes);
                for set in 0..1usize << n {
                    let mut xi = vec![0; n];
                    let mut sign = 1.0;
                    for j in (0..n).filter(|j| set >> j & 1 == 1) {
                        xi[j] = x[j] + 1;
                        if a >> (n - 1 - j) & 1 == 1 {
                            sign = -sign;
                        }
                    }
                    row.push((Self::index(&ext, &xi), sign * scale));
                }
                expand.push(row);
            }
        }
        Coords { ext, dim, expand }
    }

    fn index(ext: &[usize], xi: &[usize]) -> usize {
        xi.iter().zip(ext).fold(0, |acc, (v, k)| acc * k + v)
    }

    fn full(&self, x: &[usize]) -> usize {
        let xi: Vec<usize> = x.iter().map(|v| v + 1).collect();
        Self::index(&self.ext, &xi)
    }

    /// Correlators of an observed non-signalling table, missing parties at input 0.
    fn of(&self, p: &NsLpProblem, dist: &ConditionalDistribution) -> Vec<f64> {
        let n = p.n();
        let mut z = vec![0.0; self.dim];
        for (k, zk) in z.iter_mut().enumerate() {
            let mut xi = vec![0; n];
            let mut r = k;
            for j in (0..n).rev() {
                xi[j] = r % self.ext[j];
                r /= self.ext[j];
            }
            let x: Vec<usize> = xi.iter().map(|&v| v.saturating_sub(1)).collect();
            let s = dist.slice(&x).expect("validated arities");
            *zk = s
                .iter()
                .enumerate()
                .map(|(a, q)| {
                    let odd = (0..n).filter(|&j| xi[j] > 0 && a >> (n - 1 - j) & 1 == 1).count() % 2 == 1;
                    if odd {
                        -q
                    } else {
                        *q
                    }
                })
                .sum();
        }
        z
    }
}

/// Solves the problem in correlator coordinates through its dual, which has
/// one row per coordinate instead of one per constraint. The primal optimum
/// is read off the dual multipliers and mapped back to P(a, e | x, u).
pub fn solve(p: &NsLpProblem) -> Result<NsLpSolution> {
    let canonical = build_lp(p, DEFAULT_SIZE_LIMIT)?;
    let l = p.layout();
    let cs = Coords::new(p);
    let d = cs.dim;
    let slices = l.u * l.e;
    let v = slices * d;
    let pu = 1.0 / l.u as f64;
    let slice = |u: usize, e: usize| (u * l.e + e) * d;

    // primal objective c·z
    let mut c = vec![0.0; v];
    let g = p.guess_inputs.clone().unwrap_or_else(|| vec![0; p.n()]);
    p.tuple_index(&g)?;
    let mut xi_t = vec![0; p.n()];
    xi_t[p.target_party] = g[p.target_party] + 1;
    let single = Coords::index(&cs.ext, &xi_t);
    for u in 0..l.u {
        for (e, sigma) in [(0, 1.0), (1, -1.0)] {
            if e < l.e {
                c[slice(u, e)] += 0.5 * pu;
                c[slice(u, e) + single] += 0.5 * sigma * pu;
            }
        }
    }

    // dual columns: (entries over coordinates, dual objective coefficient)
    let mut cols: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for u in 0..l.u {
        for e in 0..l.e {
            for row in &cs.expand {
                cols.push((row.iter().map(|&(k, w)| (slice(u, e) + k, w)).collect(), 0.0));
            }
        }
    }
    let mut floor_col = Vec::new();
    for (coef, x) in &p.functional {
        let k = cs.full(x);
        for u in 0..l.u {
            for e in 0..l.e {
                floor_col.push((slice(u, e) + k, coef * pu));
            }
        }
    }
    cols.push((floor_col, p.floor));
    let mut eqs: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for u in 0..l.u {
        eqs.push(((0..l.e).map(|e| (slice(u, e), 1.0)).collect(), 1.0));
    }
    for u in 1..l.u {
        for k in 1..d {
            let mut r: Vec<(usize, f64)> = (0..l.e).map(|e| (slice(u, e) + k, 1.0)).collect();
            r.extend((0..l.e).map(|e| (slice(0, e) + k, -1.0)));
            eqs.push((r, 0.0));
        }
    }
    if let Some(obs) = &p.observed {
        let z = cs.of(p, obs);
        for (k, &zk) in z.iter().enumerate().skip(1) {
            let r = (0..l.u).flat_map(|u| (0..l.e).map(move |e| (slice(u, e) + k, pu))).collect();
            eqs.push((r, zk));
        }
    }
    for (r, rhs) in eqs {
        let neg = r.iter().map(|&(k, w)| (k, -w)).collect();
        cols.push((r, rhs));
        cols.push((neg, -rhs));
    }

    let mut dual = LinearProgram::new(cols.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); v];
    for (j, (entries, obj)) in cols.iter().enumerate() {
        dual.objective[j] = *obj;
        for &(k, w) in entries {
            rows[k].push((j, w));
        }
    }
    for (k, r) in rows.into_iter().enumerate() {
        dual.add(r, Relation::Eq, -c[k]);
    }
    let s = dual.solve();
    let status = match s.status {
        LpStatus::Optimal => LpStatus::Optimal,
        LpStatus::Unbounded | LpStatus::Infeasible => LpStatus::Infeasible,
        LpStatus::IterationLimit => LpStatus::IterationLimit,
    };
    if status != LpStatus::Optimal {
        return Ok(NsLpSolution { status, optimum: f64::NAN, argument: Vec::new(), residual: f64::NAN, iterations: s.iterations });
    }
    let z = &s.duals;
    let mut argument = vec![0.0; l.count()];
    for u in 0..l.u {
        for e in 0..l.e {
            for (idx, row) in cs.expand.iter().enumerate() {
                let (x, a) = (idx / l.outcomes, idx % l.outcomes);
                argument[l.var(x, u, a, e)] = row.iter().map(|&(k, w)| w * z[slice(u, e) + k]).sum();
            }
        }
    }
    let optimum = canonical.objective.iter().zip(&argument).map(|(a, b)| a * b).sum();
    let residual = canonical.residual(&argument);
    Ok(NsLpSolution { status, optimum, argument, residual, iterations: s.iterations })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub floor: f64,
    pub status: LpStatus,
    pub optimum: f64,
}

pub fn sweep(p: &NsLpProblem, floors: &[f64]) -> Result<Vec<SweepPoint>> {
    if floors.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("floors must be ascending".into()));
    }
    floors
        .iter()
        .map(|&floor| {
            let q = NsLpProblem { floor, ..p.clone() };
            let s = solve(&q)?;
            Ok(SweepPoint { floor, status: s.status, optimum: s.optimum })
        })
        .collect()
}

/// CHSH as correlator terms E00 + E01 + E10 − E11.
pub fn chsh_functional() -> Functional {
    vec![(1.0, vec![0, 0]), (1.0, vec![0, 1]), (1.0, vec![1, 0]), (-1.0, vec![1, 1])]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(floor: f64) -> NsLpProblem {
        NsLpProblem {
            arities: vec![2, 2],
            e_arity: 2,
            u_arity: 1,
            observed: None,
            functional: chsh_functional(),
            floor,
            target_party: 0,
            guess_inputs: None,
        }
    }

    #[test]
    fn variable_count() {
        let mut p = toy(0.0);
        p.arities = vec![4, 6, 4];
        p.functional = crate::bell::c1_functional();
        assert_eq!(build_lp(&p, DEFAULT_SIZE_LIMIT).unwrap().n_vars, 1536);
        assert!(build_lp(&p, 100).is_err());
    }

    #[test]
    fn unconstrained_guess_is_certain() {
        let s = solve(&toy(-4.0)).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.optimum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pr_box_floor() {
        let s = solve(&toy(4.0)).unwrap();
        assert!((s.optimum - 0.5).abs() < 1e-9);
        let s = solve(&toy(3.0)).unwrap();
        assert!((s.optimum - 0.75).abs() < 1e-9);
    }

    #[test]
    fn routes_agree() {
        for floor in [-4.0, 0.0, 2.0, 2.5, 3.0, 3.5, 4.0] {
            let a = solve(&toy(floor)).unwrap();
            let b = solve_direct(&toy(floor)).unwrap();
            assert!((a.optimum - b.optimum).abs() < 1e-9, "{floor}: {} vs {}", a.optimum, b.optimum);
            assert!(a.residual < 1e-9);
        }
        let mut p = toy(3.0);
        p.u_arity = 2;
        p.guess_inputs = Some(vec![1, 0]);
        let (a, b) = (solve(&p).unwrap(), solve_direct(&p).unwrap());
        assert!((a.optimum - b.optimum).abs() < 1e-9);
    }

    #[test]
    fn tsirelson_box_guess() {
        let h = 0.5f64.sqrt();
        let obs = ConditionalDistribution::from_fn(&[2, 2], |x, a| {
            let e = if x == [1, 1] { -h } else { h };
            (1.0 + (a[0] * a[1]) as f64 * e) / 4.0
        });
        let p = NsLpProblem { observed: Some(obs), ..toy(2.0) };
        let (a, b) = (solve(&p).unwrap(), solve_direct(&p).unwrap());
        assert!((a.optimum - (1.5 - h)).abs() < 1e-9);
        assert!((b.optimum - (1.5 - h)).abs() < 1e-9);
    }

    #[test]
    fn above_algebraic_max_infeasible() {
        assert_eq!(toy(0.0).algebraic_max().unwrap(), 4.0);
        assert_eq!(solve(&toy(4.5)).unwrap().status, LpStatus::Infeasible);
    }
}
