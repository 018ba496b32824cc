//! Generators and brute-force oracles shared by the property tests and the
//! acceptance runner.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::ConditionalDistribution;
use crate::error::{pre, Result};
use crate::network::{Network, Source, SourceKind};
use crate::transform::Variants;

#[derive(Clone, Debug)]
pub struct RandomNetworkSpec {
    pub parties: RangeInclusive<usize>,
    /// total sources, raised to n−1 when needed for a spanning tree
    pub sources: RangeInclusive<usize>,
    /// probability that a source is GHZ rather than EPR
    pub ghz_fraction: f64,
    pub ghz_size: RangeInclusive<usize>,
    pub theta: RangeInclusive<f64>,
    pub visibility: RangeInclusive<f64>,
    /// upper bound on the total particle count (0 = none)
    pub max_particles: usize,
    pub seed: u64,
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        RandomNetworkSpec {
            parties: 3..=4,
            sources: 2..=5,
            ghz_fraction: 0.3,
            ghz_size: 3..=4,
            theta: 0.1..=std::f64::consts::FRAC_PI_4,
            visibility: 0.7..=1.0,
            max_particles: 12,
            seed: 0,
        }
    }
}

fn random_source(spec: &RandomNetworkSpec, rng: &mut ChaCha8Rng, n: usize, must: Option<(usize, usize)>) -> Source {
    let theta = rng.gen_range(spec.theta.clone());
    let vis = rng.gen_range(spec.visibility.clone());
    let (a, b) = must.unwrap_or_else(|| {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        (a, b)
    });
    if rng.gen_bool(spec.ghz_fraction) {
        let m = rng.gen_range(spec.ghz_size.clone()).max(2);
        let mut counts = vec![0usize; n];
        counts[a] = 1;
        counts[b] = 1;
        for _ in 2..m {
            let p = if rng.gen_bool(0.5) { rng.gen_range(0..n) } else if rng.gen_bool(0.5) { a } else { b };
            counts[p] += 1;
        }
        let attach: Vec<(usize, usize)> = (0..n).filter(|&p| counts[p] > 0).map(|p| (p, counts[p])).collect();
        Source::ghz(&attach, theta, vis)
    } else {
        Source::epr(a.min(b), a.max(b), theta, vis)
    }
}

/// A spanning tree of sources over a shuffled party order, then extra
/// sources. Sources that would break the particle budget are redrawn as EPR
/// pairs or skipped.
pub fn gen_connected_network(spec: &RandomNetworkSpec) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = rng.gen_range(spec.parties.clone());
    if n < 2 {
        return pre(format!("random networks need n >= 2, got {n}"));
    }
    let target = rng.gen_range(spec.sources.clone()).max(n - 1);
    let budget = if spec.max_particles == 0 { usize::MAX } else { spec.max_particles };
    if budget < 2 * (n - 1) {
        return pre(format!("particle budget {budget} cannot connect {n} parties"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut net = Network::new(n);
    for i in 1..n {
        let p = order[i];
        let q = order[rng.gen_range(0..i)];
        let left = budget - net.total_particles() - 2 * (n - 1 - i);
        let mut s = random_source(spec, &mut rng, n, Some((p, q)));
        if s.attached_count() > left {
            s = Source::epr(p.min(q), p.max(q), s.theta, s.visibility);
        }
        net.sources.push(s);
    }
    while net.sources.len() < target {
        let s = random_source(spec, &mut rng, n, None);
        if net.total_particles() + s.attached_count() > budget {
            break;
        }
        net.sources.push(s);
    }
    net.check()?;
    Ok(net)
}

fn check_cut(parties: usize, cut: &[usize]) -> Result<()> {
    if cut.is_empty() || cut.len() >= parties || cut.iter().any(|&p| p >= parties) {
        return pre(format!("cut {cut:?} is not a nontrivial subset of {parties} parties"));
    }
    Ok(())
}

/// Replaces every entangled source crossing I|Ī by |0…0⟩ on the same
/// particles, which is the product of the two local fragments.
pub fn biseparable_cut(net: &Network, cut: &[usize]) -> Result<Network> {
    check_cut(net.parties, cut)?;
    let mut out = net.clone();
    for s in &mut out.sources {
        let ps = s.parties();
        let inside = ps.iter().filter(|p| cut.contains(p)).count();
        if s.is_entangled() && inside > 0 && inside < ps.len() {
            *s = Source { kind: SourceKind::Product { m: s.attached_count() }, theta: 0.0, visibility: 1.0, attach: s.attach.clone() };
        }
    }
    Ok(out)
}

/// Applies [`biseparable_cut`] to every transformed network, keeping the
/// particle layout and hence the settings plan of the entangled network.
pub fn cut_variants(variants: &Variants, cut: &[usize]) -> Result<Variants> {
    let nets = variants.nets.iter().map(|n| biseparable_cut(n, cut)).collect::<Result<_>>()?;
    Ok(Variants { nets, traces: variants.traces.clone() })
}

/// Two-party, binary-input, binary-output box in correlator coordinates
/// (⟨A0⟩, ⟨A1⟩, ⟨B0⟩, ⟨B1⟩, E00, E01, E10, E11).
fn positivity_rows() -> Vec<([f64; 8], f64)> {
    let mut rows = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for a in [1.0, -1.0] {
                for b in [1.0, -1.0] {
                    let mut r = [0.0; 8];
                    r[x] = a;
                    r[2 + y] = b;
                    r[4 + 2 * x + y] = a * b;
                    // 1 + r·c ≥ 0
                    rows.push((r, 1.0));
                }
            }
        }
    }
    rows
}

fn box_from_correlators(c: &[f64; 8]) -> ConditionalDistribution {
    ConditionalDistribution::from_fn(&[2, 2], |x, a| {
        let (a, b) = (a[0] as f64, a[1] as f64);
        (1.0 + a * c[x[0]] + b * c[2 + x[1]] + a * b * c[4 + 2 * x[0] + x[1]]) / 4.0
    })
}

/// Vertices of the two-party binary non-signalling polytope by brute force:
/// every choice of 8 tight positivity constraints with a unique, feasible
/// solution.
pub fn ns_vertex_oracle(parties: usize, inputs: usize, outputs: usize) -> Result<Vec<ConditionalDistribution>> {
    if (parties, inputs, outputs) != (2, 2, 2) {
        return pre("vertex enumeration supports two parties with binary inputs and outputs only");
    }
    let rows = positivity_rows();
    let mut found: Vec<[f64; 8]> = Vec::new();
    let mut pick = [0usize; 8];
    fn rec(start: usize, depth: usize, pick: &mut [usize; 8], rows: &[([f64; 8], f64)], found: &mut Vec<[f64; 8]>) {
        if depth == 8 {
            let m = DMatrix::from_fn(8, 8, |i, j| rows[pick[i]].0[j]);
            let rhs = DVector::from_fn(8, |i, _| -rows[pick[i]].1);
            let lu = m.lu();
            if lu.determinant().abs() < 1e-9 {
                return;
            }
            let Some(sol) = lu.solve(&rhs) else { return };
            let c: [f64; 8] = std::array::from_fn(|i| sol[i]);
            let feasible = rows.iter().all(|(r, k)| k + r.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() >= -1e-9);
            if feasible && !found.iter().any(|f| f.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-9)) {
                found.push(c);
            }
            return;
        }
        for i in start..=rows.len() - (8 - depth) {
            pick[depth] = i;
            rec(i + 1, depth + 1, pick, rows, found);
        }
    }
    rec(0, 0, &mut pick, &rows, &mut found);
    Ok(found.iter().map(box_from_correlators).collect())
}

/// Maximal P(e = a₁ | x*) over two-outcome non-signalling extensions of any
/// box whose functional value is at least `floor`, by enumeration: an
/// optimum mixes at most two vertex/guess pairs.
pub fn brute_force_guess(
    vertices: &[ConditionalDistribution],
    functional: impl Fn(&ConditionalDistribution) -> f64,
    guess_inputs: &[usize],
    floor: f64,
) -> Option<f64> {
    let scored: Vec<(f64, f64)> = vertices
        .iter()
        .map(|v| {
            let plus = v.marginal(&[0], guess_inputs).expect("valid inputs")[0];
            (functional(v), plus.max(1.0 - plus))
        })
        .collect();
    let mut best: Option<f64> = None;
    let mut offer = |x: f64| best = Some(best.map_or(x, |b: f64| b.max(x)));
    for &(c1, g1) in &scored {
        for &(c2, g2) in &scored {
            // w·c1 + (1−w)·c2 ≥ floor over w ∈ [0, 1]; the objective is linear in w
            let mut ends = Vec::new();
            for w in [0.0, 1.0] {
                if w * c1 + (1.0 - w) * c2 >= floor - 1e-12 {
                    ends.push(w);
                }
            }
            if (c1 - c2).abs() > 1e-15 {
                let w = (floor - c2) / (c1 - c2);
                if (0.0..=1.0).contains(&w) {
                    ends.push(w);
                }
            }
            for w in ends {
                offer(w * g1 + (1.0 - w) * g2);
            }
        }
    }
    best
}

/// Central second difference.
pub fn second_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}
