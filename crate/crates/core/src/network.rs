//! Multisource networks: parties, sources and the particle layout.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    /// cosθ|00⟩ + sinθ|11⟩
    Epr,
    /// cosθ|0…0⟩ + sinθ|1…1⟩ on `m` particles
    Ghz { m: usize },
    /// |0…0⟩ on `m` particles, used for biseparable cuts
    Product { m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub kind: SourceKind,
    pub theta: f64,
    pub visibility: f64,
    /// (party, particle count) pairs; particles are laid out in this order
    pub attach: Vec<(usize, usize)>,
}

impl Source {
    pub fn epr(a: usize, b: usize, theta: f64, visibility: f64) -> Self {
        Source { kind: SourceKind::Epr, theta, visibility, attach: vec![(a, 1), (b, 1)] }
    }

    pub fn ghz(attach: &[(usize, usize)], theta: f64, visibility: f64) -> Self {
        let m = attach.iter().map(|&(_, c)| c).sum();
        Source { kind: SourceKind::Ghz { m }, theta, visibility, attach: attach.to_vec() }
    }

    pub fn product(attach: &[(usize, usize)]) -> Self {
        let m = attach.iter().map(|&(_, c)| c).sum();
        Source { kind: SourceKind::Product { m }, theta: 0.0, visibility: 1.0, attach: attach.to_vec() }
    }

    /// Nominal particle count of the state.
    pub fn size(&self) -> usize {
        match self.kind {
            SourceKind::Epr => 2,
            SourceKind::Ghz { m } | SourceKind::Product { m } => m,
        }
    }

    pub fn attached_count(&self) -> usize {
        self.attach.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_entangled(&self) -> bool {
        !matches!(self.kind, SourceKind::Product { .. })
    }

    pub fn count_for(&self, party: usize) -> usize {
        self.attach.iter().filter(|&&(p, _)| p == party).map(|&(_, c)| c).sum()
    }

    pub fn parties(&self) -> BTreeSet<usize> {
        self.attach.iter().map(|&(p, _)| p).collect()
    }

    /// Offsets (within the source) of the particles held by `party`.
    pub fn offsets_of(&self, party: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut start = 0;
        for &(p, c) in &self.attach {
            if p == party {
                out.extend(start..start + c);
            }
            start += c;
        }
        out
    }

    /// Owning party of every particle, in source order.
    pub fn owners(&self) -> Vec<usize> {
        self.attach.iter().flat_map(|&(p, c)| std::iter::repeat_n(p, c)).collect()
    }
}

/// A particle seen from its party: (source id, offset within that source).
pub type ParticleRef = (usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub parties: usize,
    pub sources: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

impl Network {
    pub fn new(parties: usize) -> Self {
        Network { parties, sources: Vec::new() }
    }

    pub fn with(mut self, s: Source) -> Self {
        self.sources.push(s);
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        if self.parties < 2 {
            v.push(format!("party count {} < 2", self.parties));
        }
        for (id, s) in self.sources.iter().enumerate() {
            if s.attached_count() != s.size() {
                v.push(format!("source {id}: attachments hold {} particles, state has {}", s.attached_count(), s.size()));
            }
            if let SourceKind::Ghz { m } = s.kind {
                if m < 2 {
                    v.push(format!("source {id}: GHZ size {m} < 2"));
                }
            }
            let mut seen = BTreeSet::new();
            for &(p, c) in &s.attach {
                if p >= self.parties {
                    v.push(format!("source {id}: unknown party {p}"));
                }
                if c == 0 {
                    v.push(format!("source {id}: zero particle count for party {p}"));
                }
                if !seen.insert(p) {
                    v.push(format!("source {id}: party {p} attached twice"));
                }
            }
            if s.is_entangled() {
                if seen.len() < 2 {
                    v.push(format!("source {id}: connects fewer than two parties"));
                }
                if !(s.theta > 0.0 && s.theta <= FRAC_PI_4 + 1e-15) {
                    v.push(format!("source {id}: theta {} outside (0, pi/4]", s.theta));
                }
                if !(s.visibility > 0.0 && s.visibility <= 1.0) {
                    v.push(format!("source {id}: visibility {} outside (0, 1]", s.visibility));
                }
            }
        }
        for p in 0..self.parties {
            if self.particle_count(p).unwrap_or(0) == 0 {
                v.push(format!("party {p} holds no particles"));
            }
        }
        if self.parties >= 2 && !self.is_connected() {
            v.push("disconnected".to_string());
        }
        ValidationReport { ok: v.is_empty(), violations: v }
    }

    pub fn check(&self) -> Result<()> {
        let r = self.validate();
        if r.ok {
            Ok(())
        } else if r.violations.iter().all(|x| x == "disconnected") {
            Err(Error::Disconnected)
        } else {
            Err(Error::InvalidNetwork(r.violations.join("; ")))
        }
    }

    pub fn particle_count(&self, party: usize) -> Result<usize> {
        if party >= self.parties {
            return Err(Error::UnknownParty(party));
        }
        Ok(self.sources.iter().map(|s| s.count_for(party)).sum())
    }

    pub fn particle_counts(&self) -> Vec<usize> {
        (0..self.parties).map(|p| self.sources.iter().map(|s| s.count_for(p)).sum()).collect()
    }

    pub fn total_particles(&self) -> usize {
        self.sources.iter().map(|s| s.attached_count()).sum()
    }

    /// Party-local particle order: ascending source id, then offset.
    pub fn particles_of(&self, party: usize) -> Vec<ParticleRef> {
        let mut out = Vec::new();
        for (id, s) in self.sources.iter().enumerate() {
            out.extend(s.offsets_of(party).into_iter().map(|o| (id, o)));
        }
        out
    }

    /// True iff no entangled source attaches two parties of `set`.
    pub fn is_k_independent(&self, set: &[usize]) -> Result<bool> {
        for &p in set {
            if p >= self.parties {
                return Err(Error::UnknownParty(p));
            }
        }
        let set: BTreeSet<usize> = set.iter().copied().collect();
        Ok(self
            .sources
            .iter()
            .filter(|s| s.is_entangled())
            .all(|s| s.parties().intersection(&set).count() < 2))
    }

    /// True iff some entangled source has parties on both sides of `cut`.
    pub fn crosses_cut(&self, cut: &[usize]) -> bool {
        let side: BTreeSet<usize> = cut.iter().copied().collect();
        self.sources.iter().filter(|s| s.is_entangled()).any(|s| {
            let ps = s.parties();
            ps.iter().any(|p| side.contains(p)) && ps.iter().any(|p| !side.contains(p))
        })
    }

    /// Neighbour lists: (party, source id) through entangled sources, ascending.
    pub(crate) fn adjacency(&self, excluded: Option<usize>) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.parties];
        for (id, s) in self.sources.iter().enumerate() {
            if !s.is_entangled() {
                continue;
            }
            let ps: Vec<usize> = s.parties().into_iter().filter(|&p| p < self.parties && Some(p) != excluded).collect();
            for &a in &ps {
                for &b in &ps {
                    if a != b {
                        adj[a].push((b, id));
                    }
                }
            }
        }
        for l in &mut adj {
            l.sort_by_key(|&(p, s)| (s, p));
            l.dedup();
        }
        adj
    }

    fn connected_excluding(&self, excluded: Option<usize>) -> bool {
        let adj = self.adjacency(excluded);
        let members: Vec<usize> = (0..self.parties).filter(|&p| Some(p) != excluded).collect();
        let Some(&start) = members.first() else { return true };
        let mut seen = vec![false; self.parties];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        members.iter().all(|&p| seen[p])
    }

    pub fn is_connected(&self) -> bool {
        self.connected_excluding(None)
    }

    pub fn is_connected_without(&self, party: usize) -> bool {
        self.connected_excluding(Some(party))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawNetwork = serde_json::from_str(s)?;
        raw.into_network()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawNetwork::from(self)).expect("network serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(RawNetwork::from(self)).expect("network serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawSource {
    kind: String,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    theta: Option<f64>,
    #[serde(default)]
    visibility: Option<f64>,
    attach: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    parties: usize,
    sources: Vec<RawSource>,
}

impl RawNetwork {
    fn into_network(self) -> Result<Network> {
        let mut sources = Vec::with_capacity(self.sources.len());
        for (id, r) in self.sources.into_iter().enumerate() {
            let kind = match r.kind.as_str() {
                "epr" => {
                    if r.m.is_some_and(|m| m != 2) {
                        return Err(Error::InvalidNetwork(format!("source {id}: epr with m != 2")));
                    }
                    SourceKind::Epr
                }
                "ghz" => SourceKind::Ghz {
                    m: r.m.ok_or_else(|| Error::InvalidNetwork(format!("source {id}: ghz without m")))?,
                },
                "product" => SourceKind::Product { m: r.m.unwrap_or_else(|| r.attach.iter().map(|a| a.1).sum()) },
                k => return Err(Error::InvalidNetwork(format!("source {id}: unknown kind {k:?}"))),
            };
            let entangled = !matches!(kind, SourceKind::Product { .. });
            let theta = match (r.theta, entangled) {
                (Some(t), _) => t,
                (None, false) => 0.0,
                (None, true) => return Err(Error::InvalidNetwork(format!("source {id}: missing theta"))),
            };
            sources.push(Source { kind, theta, visibility: r.visibility.unwrap_or(1.0), attach: r.attach });
        }
        Ok(Network { parties: self.parties, sources })
    }
}

impl From<&Network> for RawNetwork {
    fn from(n: &Network) -> Self {
        RawNetwork {
            parties: n.parties,
            sources: n
                .sources
                .iter()
                .map(|s| RawSource {
                    kind: match s.kind {
                        SourceKind::Epr => "epr",
                        SourceKind::Ghz { .. } => "ghz",
                        SourceKind::Product { .. } => "product",
                    }
                    .to_string(),
                    m: Some(s.size()),
                    theta: Some(s.theta),
                    visibility: Some(s.visibility),
                    attach: s.attach.clone(),
                })
                .collect(),
        }
    }
}

/// Stock instances.
pub mod instances {
    use super::*;

    /// Sources ordered AB, BC, CA.
    pub fn triangle(theta: [f64; 3], visibility: f64) -> Network {
        Network::new(3)
            .with(Source::epr(0, 1, theta[0], visibility))
            .with(Source::epr(1, 2, theta[1], visibility))
            .with(Source::epr(2, 0, theta[2], visibility))
    }

    pub fn triangle_max() -> Network {
        triangle([FRAC_PI_4; 3], 1.0)
    }

    /// Four parties on a cycle of EPR pairs.
    pub fn square_cycle() -> Network {
        let mut n = Network::new(4);
        for i in 0..4 {
            n.sources.push(Source::epr(i, (i + 1) % 4, FRAC_PI_4, 1.0));
        }
        n
    }

    /// Four parties, five EPR pairs, cycles {0,1,2} and {0,2,3}.
    pub fn two_cycle() -> Network {
        let mut n = Network::new(4);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (2, 3), (3, 0)] {
            n.sources.push(Source::epr(a, b, FRAC_PI_4, 1.0));
        }
        n
    }

    /// `k` EPR links joining `k + 1` parties in a line.
    pub fn chain(k: usize, theta: f64, visibility: f64) -> Network {
        let mut n = Network::new(k + 1);
        for i in 0..k {
            n.sources.push(Source::epr(i, i + 1, theta, visibility));
        }
        n
    }
}
