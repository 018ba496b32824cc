//! Local transformations that give every party an odd number of particles.
//!
//! An EPR pair between `p` and `q` becomes a four-particle GHZ state when
//! each side adds an ancilla with a CNOT; a GHZ(m) source grows to GHZ(m+2)
//! the same way. Each conversion flips the particle parity of two parties.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Network, SourceKind};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub source: usize,
    pub action: String,
    /// particles added per party
    pub added: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TransformTrace {
    pub converted: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
    pub steps: Vec<Step>,
    /// party left out of the pairing for odd n
    pub dropped: Option<usize>,
}

impl TransformTrace {
    pub fn replay(&self, net: &Network) -> Network {
        let mut out = net.clone();
        for st in &self.steps {
            apply(&mut out, st.source, &st.added);
        }
        out
    }
}

fn grow(kind: SourceKind, by: usize) -> SourceKind {
    match kind {
        SourceKind::Epr => SourceKind::Ghz { m: 2 + by },
        SourceKind::Ghz { m } => SourceKind::Ghz { m: m + by },
        SourceKind::Product { m } => SourceKind::Product { m: m + by },
    }
}

fn apply(net: &mut Network, source: usize, added: &[(usize, usize)]) {
    let s = &mut net.sources[source];
    let by: usize = added.iter().map(|&(_, c)| c).sum();
    s.kind = grow(s.kind, by);
    for &(p, c) in added {
        if let Some(a) = s.attach.iter_mut().find(|a| a.0 == p) {
            a.1 += c;
        }
    }
}

fn convert(net: &mut Network, trace: &mut TransformTrace, source: usize, added: Vec<(usize, usize)>) {
    let before = net.sources[source].size();
    let by: usize = added.iter().map(|&(_, c)| c).sum();
    let action = match net.sources[source].kind {
        SourceKind::Epr => format!("epr->ghz{}", before + by),
        _ => format!("ghz{}->ghz{}", before, before + by),
    };
    apply(net, source, &added);
    trace.converted.push(source);
    trace.steps.push(Step { source, action, added });
}

/// Pairwise edges of the source multigraph; GHZ sources contribute a star
/// from their first attached party.
fn edges(net: &Network) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (id, s) in net.sources.iter().enumerate() {
        if !s.is_entangled() {
            continue;
        }
        let ps: Vec<usize> = s.attach.iter().map(|a| a.0).collect();
        for &q in &ps[1..] {
            if q != ps[0] {
                out.push((id, ps[0], q));
            }
        }
    }
    out
}

/// Fundamental cycles of a BFS spanning tree rooted at party 0.
pub fn decompose_cycles(net: &Network) -> Vec<Vec<usize>> {
    let n = net.parties;
    let es = edges(net);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, &(_, a, b)) in es.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; es.len()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            for &(w, k) in &adj[u] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, k));
                    tree[k] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let mut cycles = Vec::new();
    for (k, &(_, a, b)) in es.iter().enumerate() {
        if tree[k] {
            continue;
        }
        let (mut x, mut y) = (a, b);
        let (mut left, mut right) = (vec![x], vec![y]);
        while x != y {
            if depth[x] >= depth[y] {
                x = parent[x].expect("non-root").0;
                left.push(x);
            } else {
                y = parent[y].expect("non-root").0;
                right.push(y);
            }
        }
        right.pop();
        right.reverse();
        left.extend(right);
        cycles.push(normalize_cycle(left));
    }
    cycles
}

fn normalize_cycle(mut c: Vec<usize>) -> Vec<usize> {
    let i = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
    c.rotate_left(i);
    if c.len() > 2 && c[c.len() - 1] < c[1] {
        c[1..].reverse();
    }
    c
}

/// Lowest-id BFS path from `a` to `b`, as (source, u, w) hops.
fn path(net: &Network, a: usize, b: usize, excluded: Option<usize>) -> Result<Vec<(usize, usize, usize)>> {
    let adj = net.adjacency(excluded);
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; net.parties];
    let mut seen = vec![false; net.parties];
    seen[a] = true;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        if u == b {
            break;
        }
        for &(w, s) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((u, s));
                q.push_back(w);
            }
        }
    }
    if !seen[b] {
        return Err(Error::Disconnected);
    }
    let mut hops = Vec::new();
    let mut x = b;
    while x != a {
        let (u, s) = prev[x].expect("reached");
        hops.push((s, u.min(x), u.max(x)));
        x = u;
    }
    hops.reverse();
    Ok(hops)
}

/// Converts sources along paths joining consecutive pairs of `targets`;
/// hops used an even number of times cancel.
fn pair_up(net: &mut Network, trace: &mut TransformTrace, targets: &[usize], excluded: Option<usize>) -> Result<()> {
    let mut used: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for pair in targets.chunks(2) {
        let ex = if excluded.is_some_and(|d| pair.contains(&d)) { None } else { excluded };
        for hop in path(net, pair[0], pair[1], ex)? {
            *used.entry(hop).or_default() += 1;
        }
    }
    let mut per_source: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for ((s, u, w), k) in used {
        if k % 2 == 1 {
            let e = per_source.entry(s).or_default();
            *e.entry(u).or_default() += 1;
            *e.entry(w).or_default() += 1;
        }
    }
    for (s, adds) in per_source {
        convert(net, trace, s, adds.into_iter().collect());
    }
    Ok(())
}

fn even_parties(net: &Network, skip: Option<usize>) -> Vec<usize> {
    net.particle_counts()
        .iter()
        .enumerate()
        .filter(|&(p, &c)| c % 2 == 0 && Some(p) != skip)
        .map(|(p, _)| p)
        .collect()
}

fn prepare(net: &Network) -> Result<()> {
    net.check()?;
    if net.total_particles() % 2 == 1 {
        return Err(Error::Precondition("odd total particle count; apply ghz_even_normalize first".into()));
    }
    Ok(())
}

/// Party left out for odd n: the highest id whose removal keeps the rest connected.
pub fn dropped_party(net: &Network) -> Option<usize> {
    (0..net.parties).rev().find(|&p| net.is_connected_without(p))
}

/// Algorithm 1. For even n every output party holds an odd number of
/// particles; for odd n the first of [`odd_parity_variants`] is returned.
pub fn to_odd_parity(net: &Network) -> Result<(Network, TransformTrace)> {
    prepare(net)?;
    let mut out = net.clone();
    let mut trace = TransformTrace { cycles: decompose_cycles(net), ..Default::default() };
    if net.parties.is_multiple_of(2) {
        let t = even_parties(net, None);
        pair_up(&mut out, &mut trace, &t, None)?;
    } else {
        let d = dropped_party(net).ok_or(Error::Disconnected)?;
        trace.dropped = Some(d);
        let mut t = even_parties(net, Some(d));
        if t.len() % 2 == 1 {
            t.push(d);
        }
        pair_up(&mut out, &mut trace, &t, Some(d))?;
    }
    Ok((out, trace))
}

/// The transformed networks a settings plan draws from: one network for
/// even n; for odd n the pair (N'', N''') where N''' additionally makes the
/// dropped party odd by converting its lowest-id source.
#[derive(Clone, Debug)]
pub struct Variants {
    pub nets: Vec<Network>,
    pub traces: Vec<TransformTrace>,
}

impl Variants {
    pub fn single(net: Network) -> Self {
        Variants { nets: vec![net], traces: vec![TransformTrace::default()] }
    }

    /// The network every party physically holds; earlier variants embed into it.
    pub fn last(&self) -> &Network {
        self.nets.last().expect("non-empty")
    }
}

pub fn odd_parity_variants(net: &Network) -> Result<Variants> {
    let (first, trace) = to_odd_parity(net)?;
    let mut nets = vec![first.clone()];
    let mut traces = vec![trace.clone()];
    if let Some(d) = trace.dropped {
        if first.particle_count(d)? % 2 == 0 {
            let s = first
                .sources
                .iter()
                .position(|s| s.is_entangled() && s.count_for(d) > 0 && s.parties().len() >= 2)
                .ok_or(Error::Disconnected)?;
            let other = first.sources[s].attach.iter().map(|a| a.0).find(|&p| p != d).expect("two parties");
            let mut next = first.clone();
            let mut t2 = TransformTrace { dropped: Some(d), ..Default::default() };
            let mut adds = vec![(d, 1), (other, 1)];
            adds.sort();
            convert(&mut next, &mut t2, s, adds);
            nets.push(next);
            traces.push(t2);
        }
    }
    Ok(Variants { nets, traces })
}

/// Odd GHZ(m) sources become GHZ(m+1); the extra particle goes to the
/// lowest-id attached party.
pub fn ghz_even_normalize(net: &Network) -> Network {
    let mut out = net.clone();
    for s in &mut out.sources {
        if let SourceKind::Ghz { m } = s.kind {
            if m % 2 == 1 {
                s.kind = SourceKind::Ghz { m: m + 1 };
                if let Some(a) = s.attach.iter_mut().min_by_key(|a| a.0) {
                    a.1 += 1;
                }
            }
        }
    }
    out
}

/// Normalization followed by the parity transform: the variants used for evaluation.
pub fn prepare_variants(net: &Network) -> Result<Variants> {
    odd_parity_variants(&ghz_even_normalize(net))
}
