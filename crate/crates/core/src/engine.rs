//! Exact expectation values on network states: the per-source analytic
//! route, an independent dense oracle, and Born-rule tables.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, Source, SourceKind};
use crate::observables::{Letter, PartyObservable, PauliWord, NORM_TOL};

pub const DEFAULT_DENSE_LIMIT: usize = 14;
/// Largest single source evaluated densely by the analytic route.
pub const SOURCE_LIMIT: usize = 20;
/// Probabilities above -CLAMP are clamped to 0; below is an error.
pub const CLAMP: f64 = 1e-14;

/// Pure-state amplitudes of a source on its 2^m basis.
fn source_amplitudes(src: &Source) -> Vec<f64> {
    let m = src.attached_count();
    let mut psi = vec![0.0; 1 << m];
    match src.kind {
        SourceKind::Product { .. } => psi[0] = 1.0,
        _ => {
            psi[0] = src.theta.cos();
            psi[(1 << m) - 1] += src.theta.sin();
        }
    }
    psi
}

/// v·⟨ψ|W|ψ⟩ + (1−v)·tr(W)/2^m, evaluated on the 2^m-dimensional source space.
pub fn source_expectation(src: &Source, letters: &[Letter]) -> Result<f64> {
    let m = src.attached_count();
    if letters.len() != m {
        return Err(Error::Domain(format!("word covers {} particles, source has {m}", letters.len())));
    }
    if m > SOURCE_LIMIT {
        return Err(Error::DenseLimit { needed: m, limit: SOURCE_LIMIT });
    }
    let w = PauliWord(letters.to_vec());
    let psi = source_amplitudes(src);
    let d = 1usize << m;
    let (mut pure, mut trace) = (0.0, 0.0);
    for k in 0..d {
        let (r, s) = w.act(k);
        pure += psi[r] * s * psi[k];
        if r == k {
            trace += s;
        }
    }
    let v = src.visibility;
    Ok(v * pure + (1.0 - v) * trace / d as f64)
}

fn check_cover(net: &Network, obs: &[PartyObservable]) -> Result<()> {
    if obs.len() != net.parties {
        return Err(Error::Domain(format!("{} observables for {} parties", obs.len(), net.parties)));
    }
    for (p, o) in obs.iter().enumerate() {
        let c = net.particle_count(p)?;
        if o.party != p {
            return Err(Error::Domain(format!("observable {p} belongs to party {}", o.party)));
        }
        if o.terms.is_empty() || o.terms.iter().any(|t| t.1.len() != c) {
            return Err(Error::Domain(format!("observable of party {p} does not cover its {c} particles")));
        }
    }
    Ok(())
}

/// Σ over cross terms of Π_sources source_expectation.
pub fn expectation(net: &Network, obs: &[PartyObservable]) -> Result<f64> {
    check_cover(net, obs)?;
    let layout: Vec<_> = (0..net.parties).map(|p| net.particles_of(p)).collect();
    let mut letters: Vec<Vec<Letter>> = net.sources.iter().map(|s| vec![Letter::I; s.attached_count()]).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; net.parties];
    loop {
        let mut coef = 1.0;
        for (p, o) in obs.iter().enumerate() {
            let (c, w) = &o.terms[idx[p]];
            coef *= c;
            for (&(s, off), &l) in layout[p].iter().zip(&w.0) {
                letters[s][off] = l;
            }
        }
        if coef != 0.0 {
            let mut val = coef;
            for (s, src) in net.sources.iter().enumerate() {
                val *= source_expectation(src, &letters[s])?;
                if val == 0.0 {
                    break;
                }
            }
            total += val;
        }
        // next cross term, last party fastest
        let mut p = net.parties;
        loop {
            if p == 0 {
                return Ok(total);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < obs[p].terms.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

fn source_density(src: &Source) -> DMatrix<f64> {
    let psi = source_amplitudes(src);
    let d = psi.len();
    let mut rho = DMatrix::from_fn(d, d, |i, j| src.visibility * psi[i] * psi[j]);
    for i in 0..d {
        rho[(i, i)] += (1.0 - src.visibility) / d as f64;
    }
    rho
}

/// tr(O ρ) over the full 2^N space in party-major particle order. The
/// global operator is the tensor product of dense per-party matrices and ρ
/// the tensor product of dense per-source Werner matrices; entries are
/// combined through the global bit layout without factorizing the trace.
pub fn dense_expectation(net: &Network, obs: &[PartyObservable], dense_limit: usize) -> Result<f64> {
    check_cover(net, obs)?;
    let total = net.total_particles();
    if total > dense_limit {
        return Err(Error::DenseLimit { needed: total, limit: dense_limit });
    }
    let rhos: Vec<DMatrix<f64>> = net.sources.iter().map(source_density).collect();
    let sizes: Vec<usize> = net.sources.iter().map(|s| s.attached_count()).collect();
    // contribution of each party-local basis index to every source-local index
    let mut parts: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut nonzeros: Vec<Vec<(usize, usize, f64)>> = Vec::new();
    for (p, o) in obs.iter().enumerate() {
        let layout = net.particles_of(p);
        let np = layout.len();
        let mut table = vec![vec![0usize; sizes.len()]; 1 << np];
        for (k, row) in table.iter_mut().enumerate() {
            for (i, &(s, off)) in layout.iter().enumerate() {
                if k >> (np - 1 - i) & 1 == 1 {
                    row[s] |= 1 << (sizes[s] - 1 - off);
                }
            }
        }
        parts.push(table);
        let m = o.dense();
        let mut nz = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    nz.push((r, c, m[(r, c)]));
                }
            }
        }
        nonzeros.push(nz);
    }
    let ns = sizes.len();
    let mut sum = 0.0;
    let mut rs = vec![0usize; ns];
    let mut cs = vec![0usize; ns];
    let mut stack = vec![0usize; net.parties];
    let n = net.parties;
    // odometer over per-party nonzeros
    loop {
        rs.iter_mut().for_each(|x| *x = 0);
        cs.iter_mut().for_each(|x| *x = 0);
        let mut val = 1.0;
        for p in 0..n {
            let (r, c, v) = nonzeros[p][stack[p]];
            val *= v;
            for s in 0..ns {
                rs[s] |= parts[p][r][s];
                cs[s] |= parts[p][c][s];
            }
        }
        // O[r,c] ρ[c,r]
        for s in 0..ns {
            val *= rhos[s][(cs[s], rs[s])];
            if val == 0.0 {
                break;
            }
        }
        sum += val;
        let mut p = n;
        loop {
            if p == 0 {
                return Ok(sum);
            }
            p -= 1;
            stack[p] += 1;
            if stack[p] < nonzeros[p].len() {
                break;
            }
            stack[p] = 0;
        }
    }
}

/// P(a|x) table with outcomes in {+1, −1}. Outcome index bit (n−1−j) set
/// means party j answered −1; input tuples are mixed-radix, party 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution {
    pub arities: Vec<usize>,
    pub table: Vec<f64>,
}

impl ConditionalDistribution {
    pub fn n(&self) -> usize {
        self.arities.len()
    }

    pub fn tuples(&self) -> usize {
        self.arities.iter().product()
    }

    pub fn outcomes(&self) -> usize {
        1 << self.n()
    }

    pub fn from_fn(arities: &[usize], mut f: impl FnMut(&[usize], &[i8]) -> f64) -> Self {
        let n = arities.len();
        let mut d = ConditionalDistribution { arities: arities.to_vec(), table: Vec::new() };
        let mut table = Vec::with_capacity(d.tuples() << n);
        for t in 0..d.tuples() {
            let x = d.inputs_of(t);
            for a in 0..1 << n {
                table.push(f(&x, &outcome_signs(n, a)));
            }
        }
        d.table = table;
        d
    }

    pub fn uniform(arities: &[usize]) -> Self {
        let p = 1.0 / (1u64 << arities.len()) as f64;
        Self::from_fn(arities, |_, _| p)
    }

    pub fn tuple_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.n() || x.iter().zip(&self.arities).any(|(a, b)| a >= b) {
            return Err(Error::Domain(format!("unknown input tuple {x:?} for arities {:?}", self.arities)));
        }
        Ok(x.iter().zip(&self.arities).fold(0, |acc, (xi, k)| acc * k + xi))
    }

    pub fn inputs_of(&self, mut t: usize) -> Vec<usize> {
        let mut x = vec![0; self.n()];
        for j in (0..self.n()).rev() {
            x[j] = t % self.arities[j];
            t /= self.arities[j];
        }
        x
    }

    pub fn slice(&self, x: &[usize]) -> Result<&[f64]> {
        let t = self.tuple_index(x)?;
        let k = self.outcomes();
        Ok(&self.table[t * k..(t + 1) * k])
    }

    pub fn prob(&self, x: &[usize], a: &[i8]) -> Result<f64> {
        Ok(self.slice(x)?[outcome_index(a)])
    }

    pub fn normalization_error(&self) -> f64 {
        self.table.chunks(self.outcomes()).map(|c| (c.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest change of a party-marginal-complement under a single-party input switch.
    pub fn signalling(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            let bit = 1 << (n - 1 - j);
            for t in 0..self.tuples() {
                let x = self.inputs_of(t);
                if x[j] == 0 {
                    continue;
                }
                let mut y = x.clone();
                y[j] = 0;
                let (p, q) = (self.slice(&x).expect("valid"), self.slice(&y).expect("valid"));
                for a in 0..self.outcomes() {
                    if a & bit == 0 {
                        let d = (p[a] + p[a | bit]) - (q[a] + q[a | bit]);
                        worst = worst.max(d.abs());
                    }
                }
            }
        }
        worst
    }

    /// Marginal table of the listed parties (order kept).
    pub fn marginal(&self, parties: &[usize], x: &[usize]) -> Result<Vec<f64>> {
        let n = self.n();
        let s = self.slice(x)?;
        let mut out = vec![0.0; 1 << parties.len()];
        for (a, &p) in s.iter().enumerate() {
            let mut k = 0;
            for &j in parties {
                k = (k << 1) | (a >> (n - 1 - j) & 1);
            }
            out[k] += p;
        }
        Ok(out)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(RawDistribution::from(self)).expect("serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let raw: RawDistribution = serde_json::from_value(v)?;
        raw.try_into()
    }
}

pub fn outcome_signs(n: usize, a: usize) -> Vec<i8> {
    (0..n).map(|j| if a >> (n - 1 - j) & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn outcome_index(a: &[i8]) -> usize {
    a.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
}

/// Σ_a (Π a_j) P(a|x).
pub fn correlation_from_distribution(dist: &ConditionalDistribution, x: &[usize]) -> Result<f64> {
    let s = dist.slice(x)?;
    Ok(s.iter().enumerate().map(|(a, p)| if a.count_ones() % 2 == 0 { *p } else { -*p }).sum())
}

#[derive(Serialize, Deserialize)]
struct RawRow {
    inputs: Vec<usize>,
    outcomes: Vec<i8>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    arities: Vec<usize>,
    table: Vec<RawRow>,
}

impl From<&ConditionalDistribution> for RawDistribution {
    fn from(d: &ConditionalDistribution) -> Self {
        let n = d.n();
        let mut table = Vec::with_capacity(d.table.len());
        for t in 0..d.tuples() {
            for a in 0..d.outcomes() {
                table.push(RawRow { inputs: d.inputs_of(t), outcomes: outcome_signs(n, a), p: d.table[t * d.outcomes() + a] });
            }
        }
        RawDistribution { arities: d.arities.clone(), table }
    }
}

impl TryFrom<RawDistribution> for ConditionalDistribution {
    type Error = Error;
    fn try_from(r: RawDistribution) -> Result<Self> {
        let mut d = ConditionalDistribution { arities: r.arities, table: Vec::new() };
        d.table = vec![f64::NAN; d.tuples() * d.outcomes()];
        for row in r.table {
            if row.outcomes.len() != d.n() || row.outcomes.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::Domain(format!("bad outcome tuple {:?}", row.outcomes)));
            }
            let t = d.tuple_index(&row.inputs)?;
            let k = d.outcomes();
            d.table[t * k + outcome_index(&row.outcomes)] = row.p;
        }
        if d.table.iter().any(|p| p.is_nan()) {
            return Err(Error::Domain("distribution table is incomplete".into()));
        }
        Ok(d)
    }
}

/// Born-rule table for per-party observable lists with projectors (1 ± M)/2.
pub fn born_distribution(net: &Network, lists: &[Vec<PartyObservable>], dense_limit: usize) -> Result<ConditionalDistribution> {
    let n = net.parties;
    if lists.len() != n {
        return Err(Error::Domain(format!("{} observable lists for {n} parties", lists.len())));
    }
    let total = net.total_particles();
    if total > dense_limit {
        return Err(Error::DenseLimit { needed: total, limit: dense_limit });
    }
    for list in lists {
        for o in list {
            let norm = o.norm(dense_limit)?;
            if norm > 1.0 + NORM_TOL {
                return Err(Error::Domain(format!("observable of party {} is not dichotomic (norm {norm})", o.party)));
            }
        }
    }
    let counts = net.particle_counts();
    let ids: Vec<PartyObservable> = (0..n).map(|p| PartyObservable::identity(p, counts[p])).collect();
    let arities: Vec<usize> = lists.iter().map(|l| l.len()).collect();
    let mut dist = ConditionalDistribution { arities, table: Vec::new() };
    let k = dist.outcomes();
    let mut table = vec![0.0; dist.tuples() * k];
    for t in 0..dist.tuples() {
        let x = dist.inputs_of(t);
        // correlators of every party subset S (bit n−1−j for party j)
        let mut e = vec![0.0; k];
        for (s, es) in e.iter_mut().enumerate() {
            let obs: Vec<PartyObservable> =
                (0..n).map(|j| if s >> (n - 1 - j) & 1 == 1 { lists[j][x[j]].clone() } else { ids[j].clone() }).collect();
            *es = expectation(net, &obs)?;
        }
        for a in 0..k {
            let mut p = 0.0;
            for (s, es) in e.iter().enumerate() {
                // (−1)^{|S ∩ {j : a_j = −1}|}
                p += if (s & a).count_ones() % 2 == 0 { *es } else { -*es };
            }
            p /= k as f64;
            if p < -CLAMP {
                return Err(Error::Domain(format!("negative probability {p} at inputs {x:?}")));
            }
            table[t * k + a] = p.max(0.0);
        }
    }
    dist.table = table;
    Ok(dist)
}
