//! Per-party observables and the per-bipartition settings plan.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{pre, Error, Result};
use crate::network::Network;
use crate::transform::Variants;

/// Norm tolerance for the dichotomic contract |M| ≤ 1.
pub const NORM_TOL: f64 = 1e-12;
/// Per-party input budget.
pub const MAX_INPUTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    I,
    Z,
    X,
}

impl Letter {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'Z' => Some(Letter::Z),
            'X' => Some(Letter::X),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::Z => 'Z',
            Letter::X => 'X',
        }
    }
}

/// Letters over one party's particles, in party-local order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord(pub Vec<Letter>);

impl PauliWord {
    pub fn uniform(len: usize, l: Letter) -> Self {
        PauliWord(vec![l; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// (x-mask, z-mask) with particle 0 on the most significant bit.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.0.len();
        let (mut x, mut z) = (0, 0);
        for (i, l) in self.0.iter().enumerate() {
            let bit = 1 << (n - 1 - i);
            match l {
                Letter::X => x |= bit,
                Letter::Z => z |= bit,
                Letter::I => {}
            }
        }
        (x, z)
    }

    /// W|k⟩ = sign·|k'⟩.
    pub fn act(&self, k: usize) -> (usize, f64) {
        let (x, z) = self.masks();
        let sign = if (k & z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        (k ^ x, sign)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

impl std::str::FromStr for PauliWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::Domain(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PauliWord)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyObservable {
    pub party: usize,
    pub terms: Vec<(f64, PauliWord)>,
}

impl PartyObservable {
    pub fn word(party: usize, w: PauliWord) -> Self {
        PartyObservable { party, terms: vec![(1.0, w)] }
    }

    pub fn uniform(party: usize, len: usize, l: Letter) -> Self {
        Self::word(party, PauliWord::uniform(len, l))
    }

    pub fn identity(party: usize, len: usize) -> Self {
        Self::uniform(party, len, Letter::I)
    }

    /// Particle count the observable acts on.
    pub fn len(&self) -> usize {
        self.terms.first().map_or(0, |t| t.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let d = 1usize << self.len();
        let mut m = DMatrix::zeros(d, d);
        for (c, w) in &self.terms {
            for k in 0..d {
                let (r, s) = w.act(k);
                m[(r, k)] += c * s;
            }
        }
        m
    }

    /// Spectral norm from a dense eigen-decomposition on the party space.
    pub fn norm(&self, dense_limit: usize) -> Result<f64> {
        if self.len() > dense_limit {
            return Err(Error::DenseLimit { needed: self.len(), limit: dense_limit });
        }
        let ev = self.dense().symmetric_eigen().eigenvalues;
        Ok(ev.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
    }

    fn key(&self) -> Vec<(u64, PauliWord)> {
        self.terms.iter().map(|(c, w)| (c.to_bits(), w.clone())).collect()
    }
}

/// cosθ Z…Z ± sinθ X…X on `len` particles.
pub fn rotated_observable(party: usize, len: usize, theta: f64, plus: bool) -> PartyObservable {
    let s = if plus { theta.sin() } else { -theta.sin() };
    PartyObservable {
        party,
        terms: vec![(theta.cos(), PauliWord::uniform(len, Letter::Z)), (s, PauliWord::uniform(len, Letter::X))],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormCheck {
    pub norm: f64,
    pub dichotomic: bool,
}

pub fn norm_check(obs: &PartyObservable, dense_limit: usize) -> Result<NormCheck> {
    let norm = obs.norm(dense_limit)?;
    Ok(NormCheck { norm, dichotomic: norm <= 1.0 + NORM_TOL })
}

/// Subsets I with 1 ≤ |I| ≤ ⌊n/2⌋; for |I| = n/2 only those containing party 0.
pub fn canonical_bipartitions(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return pre(format!("canonical_bipartitions needs n >= 2, got {n}"));
    }
    if n > 30 {
        return pre(format!("canonical_bipartitions: n = {n} too large"));
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for size in 1..=n / 2 {
        for mask in 0u64..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            if 2 * size == n && mask & 1 == 0 {
                continue;
            }
            out.push((0..n).filter(|&i| mask >> i & 1 == 1).collect());
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "M_I")]
    M,
    #[serde(rename = "Mhat_I")]
    MHat,
    #[serde(rename = "M_Ibar")]
    MBar,
    #[serde(rename = "Mhat_Ibar")]
    MHatBar,
}

/// Interned input of one party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanInput {
    pub observable: PartyObservable,
    /// variant the layout of `observable` refers to
    pub variant: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub bipartition: Vec<usize>,
    pub variant: usize,
    pub theta: f64,
    /// (party, input index) per role in the order M_I, Mhat_I, M_Ibar, Mhat_Ibar
    pub roles: [Vec<(usize, usize)>; 4],
}

impl PlanEntry {
    pub fn role(&self, r: Role) -> &[(usize, usize)] {
        &self.roles[r as usize]
    }

    /// Per-party input tuple for (I-role, Ibar-role).
    pub fn inputs(&self, n: usize, i_role: Role, bar_role: Role) -> Vec<usize> {
        let mut x = vec![usize::MAX; n];
        for &(p, k) in self.role(i_role).iter().chain(self.role(bar_role)) {
            x[p] = k;
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingsPlan {
    pub n: usize,
    pub theta: f64,
    pub inputs: Vec<Vec<PlanInput>>,
    pub entries: Vec<PlanEntry>,
}

impl SettingsPlan {
    pub fn arities(&self) -> Vec<usize> {
        self.inputs.iter().map(|v| v.len()).collect()
    }

    pub fn observable(&self, party: usize, input: usize) -> &PartyObservable {
        &self.inputs[party][input].observable
    }

    /// Every input re-expressed on the last variant's layout.
    pub fn physical_inputs(&self, variants: &Variants) -> Vec<Vec<PartyObservable>> {
        self.inputs
            .iter()
            .map(|list| list.iter().map(|pi| embed(&pi.observable, &variants.nets[pi.variant], variants.last())).collect())
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Re-expresses an observable of `from` on the layout of `to`, where `to`
/// extends `from` by ancillas copied with CNOTs. Ancillas carry X where
/// their parent carries X and I otherwise, so expectations are preserved.
pub fn embed(obs: &PartyObservable, from: &Network, to: &Network) -> PartyObservable {
    let p = obs.party;
    let from_list = from.particles_of(p);
    let mut terms = Vec::with_capacity(obs.terms.len());
    for (c, w) in &obs.terms {
        let mut letters = Vec::new();
        for (sid, s) in to.sources.iter().enumerate() {
            let orig: Vec<usize> = from.sources[sid].offsets_of(p);
            let now = s.offsets_of(p);
            let local = |o: usize| from_list.iter().position(|&q| q == (sid, o)).expect("particle in layout");
            for k in 0..now.len() {
                let l = if k < orig.len() {
                    w.0[local(orig[k])]
                } else {
                    match w.0[local(orig[0])] {
                        Letter::X => Letter::X,
                        _ => Letter::I,
                    }
                };
                letters.push(l);
            }
        }
        terms.push((*c, PauliWord(letters)));
    }
    PartyObservable { party: p, terms }
}

struct Interner {
    keys: Vec<BTreeMap<Vec<(u64, PauliWord)>, usize>>,
    inputs: Vec<Vec<PlanInput>>,
}

impl Interner {
    fn add(&mut self, obs: PartyObservable, variant: usize) -> Result<usize> {
        let p = obs.party;
        let key = obs.key();
        if let Some(&i) = self.keys[p].get(&key) {
            return Ok(i);
        }
        let i = self.inputs[p].len();
        if i >= MAX_INPUTS {
            return Err(Error::Domain(format!("party {p} exceeds the {MAX_INPUTS}-input budget")));
        }
        self.keys[p].insert(key, i);
        self.inputs[p].push(PlanInput { observable: obs, variant });
        Ok(i)
    }
}

/// Settings for a network whose parties all hold odd particle counts.
pub fn build_settings(net: &Network, theta: f64) -> Result<SettingsPlan> {
    if let Some((p, c)) = net.particle_counts().iter().enumerate().find(|(_, c)| *c % 2 == 0) {
        return Err(Error::Domain(format!("party {p} holds an even number of particles ({c}); transform first")));
    }
    build_settings_variants(&Variants::single(net.clone()), theta, None)
}

/// Settings drawing each bipartition from the first variant in which
/// s_t = min(I) holds an odd particle count. `thetas` optionally overrides
/// the mixing angle per bipartition.
pub fn build_settings_variants(variants: &Variants, theta: f64, thetas: Option<&[f64]>) -> Result<SettingsPlan> {
    let n = variants.nets[0].parties;
    let bips = canonical_bipartitions(n)?;
    if let Some(t) = thetas {
        if t.len() != bips.len() {
            return pre(format!("{} per-bipartition angles for {} bipartitions", t.len(), bips.len()));
        }
    }
    let counts: Vec<Vec<usize>> = variants.nets.iter().map(|v| v.particle_counts()).collect();
    let mut it = Interner { keys: vec![BTreeMap::new(); n], inputs: vec![Vec::new(); n] };
    let mut entries = Vec::with_capacity(bips.len());
    for (bi, set) in bips.into_iter().enumerate() {
        let st = set[0];
        let v = (0..counts.len())
            .find(|&v| counts[v][st] % 2 == 1)
            .ok_or_else(|| Error::Domain(format!("party {st} holds an even number of particles in every variant")))?;
        let th = thetas.map_or(theta, |t| t[bi]);
        let c = &counts[v];
        let mut roles: [Vec<(usize, usize)>; 4] = Default::default();
        for (r, plus) in [(0usize, true), (1, false)] {
            for &p in &set {
                let obs = if p == st {
                    rotated_observable(p, c[p], th, plus)
                } else {
                    PartyObservable::uniform(p, c[p], if plus { Letter::Z } else { Letter::X })
                };
                roles[r].push((p, it.add(obs, v)?));
            }
        }
        let bar: Vec<usize> = (0..n).filter(|p| !set.contains(p)).collect();
        for (r, l) in [(2usize, Letter::Z), (3, Letter::X)] {
            for &p in &bar {
                roles[r].push((p, it.add(PartyObservable::uniform(p, c[p], l), v)?));
            }
        }
        entries.push(PlanEntry { bipartition: set, variant: v, theta: th, roles });
    }
    Ok(SettingsPlan { n, theta, inputs: it.inputs, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::instances::*;
    use crate::network::Source;
    use crate::transform::{prepare_variants, to_odd_parity};

    #[test]
    fn bipartition_lists() {
        assert_eq!(canonical_bipartitions(2).unwrap(), vec![vec![0]]);
        assert_eq!(canonical_bipartitions(3).unwrap(), vec![vec![0], vec![1], vec![2]]);
        let four = canonical_bipartitions(4).unwrap();
        assert_eq!(four.len(), 7);
        assert_eq!(&four[4..], &[vec![0, 1], vec![0, 2], vec![0, 3]]);
        assert!(canonical_bipartitions(1).is_err());
    }

    #[test]
    fn rotated_norms() {
        let one = rotated_observable(0, 1, std::f64::consts::FRAC_PI_4, true);
        assert!((one.norm(14).unwrap() - 1.0).abs() < 1e-12);
        let three = rotated_observable(0, 3, 0.3, false);
        assert_eq!(three.terms[1].0, -(0.3f64).sin());
        assert!((three.norm(14).unwrap() - 1.0).abs() < 1e-12);
        let two = norm_check(&rotated_observable(0, 2, std::f64::consts::FRAC_PI_4, true), 14).unwrap();
        assert!(!two.dichotomic);
        assert!((two.norm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn triangle_plan_arities() {
        let v = prepare_variants(&triangle_max()).unwrap();
        let plan = build_settings_variants(&v, 0.7, None).unwrap();
        assert_eq!(plan.arities(), vec![4, 6, 4]);
        assert_eq!(plan.entries.iter().map(|e| e.variant).collect::<Vec<_>>(), vec![0, 0, 1]);
        assert_eq!(plan.observable(1, 4).terms[0].1.to_string(), "ZZZZ");
        assert_eq!(plan.observable(0, 2).terms[0].1.to_string(), "ZZZ");
    }

    #[test]
    fn chsh_reduction() {
        let n = Network::new(2).with(Source::epr(0, 1, 0.4, 1.0));
        let plan = build_settings(&n, 0.5).unwrap();
        assert_eq!(plan.entries.len(), 1);
        assert_eq!(plan.arities(), vec![2, 2]);
    }

    #[test]
    fn even_party_rejected() {
        assert!(build_settings(&triangle_max(), 0.5).is_err());
    }

    #[test]
    fn square_cycle_budget() {
        let (net, _) = to_odd_parity(&square_cycle()).unwrap();
        let plan = build_settings(&net, 0.5).unwrap();
        assert_eq!(plan.entries.len(), 7);
        assert!(plan.arities().iter().all(|&a| a <= 4));
    }

    #[test]
    fn word_parse_roundtrip() {
        let w: PauliWord = "XZI".parse().unwrap();
        assert_eq!(w.to_string(), "XZI");
        assert_eq!(w.masks(), (0b100, 0b010));
        assert!("XY".parse::<PauliWord>().is_err());
    }
}
