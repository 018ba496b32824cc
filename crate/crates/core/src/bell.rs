//! The network Bell functional Σ_I CH_I, its bounds, and the triangle
//! inequalities with four/six and four/four/four inputs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use serde::Serialize;

use crate::engine::{born_distribution, correlation_from_distribution, expectation, ConditionalDistribution};
use crate::error::{pre, Error, Result};
use crate::network::Network;
use crate::observables::{build_settings_variants, Letter, PartyObservable, Role, SettingsPlan};
use crate::transform::{prepare_variants, Variants};

/// Tolerance for comparing the functional with its bounds.
pub const VERDICT_TOL: f64 = 1e-9;

pub fn bipartition_count(n: usize) -> usize {
    (1usize << (n - 1)) - 1
}

/// 2ⁿ√2 − 4√2 + 2
pub fn biseparable_bound(n: usize) -> f64 {
    (1u64 << n) as f64 * SQRT_2 - 4.0 * SQRT_2 + 2.0
}

/// (2ⁿ − 2)√2
pub fn quantum_max(n: usize) -> f64 {
    ((1u64 << n) as f64 - 2.0) * SQRT_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NoViolation,
    Violation,
    AtQuantumMax,
}

pub fn verdict(n: usize, value: f64) -> Verdict {
    if value >= quantum_max(n) - VERDICT_TOL {
        Verdict::AtQuantumMax
    } else if value > biseparable_bound(n) + VERDICT_TOL {
        Verdict::Violation
    } else {
        Verdict::NoViolation
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TermValue {
    pub bipartition: Vec<usize>,
    pub variant: usize,
    pub value: f64,
    /// ⟨M_I M_Ī⟩, ⟨M̂_I M_Ī⟩, ⟨M_I M̂_Ī⟩, ⟨M̂_I M̂_Ī⟩
    pub correlators: [f64; 4],
    /// 2cosθ·V + 2sinθ·Πsin2θ_j·V with V the visibility product
    pub predicted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BellReport {
    pub n: usize,
    pub value: f64,
    pub terms: Vec<TermValue>,
    pub biseparable_bound: f64,
    pub quantum_max: f64,
    pub verdict: Verdict,
    pub theta: f64,
    pub diagnostics: Vec<String>,
}

fn role_obs(plan: &SettingsPlan, idx: usize, i_role: Role, bar_role: Role) -> Vec<PartyObservable> {
    let e = &plan.entries[idx];
    e.inputs(plan.n, i_role, bar_role).iter().enumerate().map(|(p, &k)| plan.observable(p, k).clone()).collect()
}

/// The four correlators of CH_I for plan entry `idx`.
pub fn ch_correlators(variants: &Variants, plan: &SettingsPlan, idx: usize) -> Result<[f64; 4]> {
    let e = plan.entries.get(idx).ok_or_else(|| Error::Domain(format!("plan has no entry {idx}")))?;
    let net = &variants.nets[e.variant];
    let mut out = [0.0; 4];
    let combos = [(Role::M, Role::MBar), (Role::MHat, Role::MBar), (Role::M, Role::MHatBar), (Role::MHat, Role::MHatBar)];
    for (k, (a, b)) in combos.into_iter().enumerate() {
        out[k] = expectation(net, &role_obs(plan, idx, a, b))?;
    }
    Ok(out)
}

/// CH_I = ⟨M_I M_Ī⟩ + ⟨M̂_I M_Ī⟩ + ⟨M_I M̂_Ī⟩ − ⟨M̂_I M̂_Ī⟩
pub fn ch_term(variants: &Variants, plan: &SettingsPlan, idx: usize) -> Result<f64> {
    let c = ch_correlators(variants, plan, idx)?;
    Ok(c[0] + c[1] + c[2] - c[3])
}

/// Πsin2θ_j and Πv_j over the entangled sources.
pub fn source_products(net: &Network) -> (f64, f64) {
    net.sources
        .iter()
        .filter(|s| s.is_entangled())
        .fold((1.0, 1.0), |(p, v), s| (p * (2.0 * s.theta).sin(), v * s.visibility))
}

/// Evaluates the functional on prepared variants. `reference` supplies the
/// source angles and visibilities for the per-term prediction.
pub fn evaluate_variants(variants: &Variants, reference: &Network, theta: f64) -> Result<BellReport> {
    let plan = build_settings_variants(variants, theta, None)?;
    report(variants, &plan, reference, theta)
}

pub fn report(variants: &Variants, plan: &SettingsPlan, reference: &Network, theta: f64) -> Result<BellReport> {
    let n = plan.n;
    let (p, v) = source_products(reference);
    let predicted = (2.0 * theta.cos() + 2.0 * theta.sin() * p) * v;
    let mut terms = Vec::with_capacity(plan.entries.len());
    let mut diagnostics = Vec::new();
    for (idx, e) in plan.entries.iter().enumerate() {
        let c = ch_correlators(variants, plan, idx)?;
        let value = c[0] + c[1] + c[2] - c[3];
        if value < predicted - VERDICT_TOL {
            diagnostics.push(format!("CH{:?} = {value:.12} below the predicted {predicted:.12}", e.bipartition));
        }
        terms.push(TermValue { bipartition: e.bipartition.clone(), variant: e.variant, value, correlators: c, predicted });
    }
    let value = terms.iter().map(|t| t.value).sum();
    Ok(BellReport {
        n,
        value,
        terms,
        biseparable_bound: biseparable_bound(n),
        quantum_max: quantum_max(n),
        verdict: verdict(n, value),
        theta,
        diagnostics,
    })
}

pub fn evaluate(net: &Network, theta: f64) -> Result<BellReport> {
    let variants = prepare_variants(net)?;
    evaluate_variants(&variants, net, theta)
}

/// Golden-section search of a unimodal function on [lo, hi].
pub fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = (a + b) / 2.0;
    Ok((x, f(x)?))
}

/// Maximizes the functional over the shared mixing angle θ ∈ [0, π/2].
pub fn optimize_theta(net: &Network) -> Result<(f64, BellReport)> {
    let variants = prepare_variants(net)?;
    let (t, _) = golden_max(|t| Ok(evaluate_variants(&variants, net, t)?.value), 0.0, FRAC_PI_2, 1e-10)?;
    Ok((t, evaluate_variants(&variants, net, t)?))
}

/// Smallest Πsin2θ_j with a violation at the optimal θ:
/// √(N² − 2(2−√2)N + 3 − 2√2)/N.
pub fn violation_threshold(n: usize) -> Result<f64> {
    if n < 3 {
        return pre(format!("violation_threshold needs n >= 3, got {n}"));
    }
    let nn = bipartition_count(n) as f64;
    Ok((nn * nn - 2.0 * (2.0 - SQRT_2) * nn + 3.0 - 2.0 * SQRT_2).sqrt() / nn)
}

#[derive(Clone, Debug, Serialize)]
pub struct VisibilityThreshold {
    /// threshold on the product of visibilities
    pub product: f64,
    /// uniform visibility from the closed form
    pub closed_form: f64,
    /// uniform visibility from bisection on the functional
    pub bisection: f64,
    pub sources: usize,
}

/// Uniform-visibility threshold: closed form 1 − (2−√2)/(2N) on the product
/// of visibilities, cross-checked by bisection on the evaluated functional.
pub fn visibility_threshold(net: &Network) -> Result<VisibilityThreshold> {
    let n = net.parties;
    if n < 3 {
        return pre(format!("visibility threshold needs n >= 3, got {n}"));
    }
    if net.sources.iter().any(|s| s.is_entangled() && (s.theta - FRAC_PI_4).abs() > 1e-12) {
        return pre("visibility threshold assumes maximally entangled sources (theta = pi/4)");
    }
    let m = net.sources.iter().filter(|s| s.is_entangled()).count();
    let product = 1.0 - (2.0 - SQRT_2) / (2.0 * bipartition_count(n) as f64);
    let closed_form = product.powf(1.0 / m as f64);
    let clean = {
        let mut c = net.clone();
        c.sources.iter_mut().for_each(|s| s.visibility = 1.0);
        c
    };
    let variants = prepare_variants(&clean)?;
    let bound = biseparable_bound(n);
    let value_at = |v: f64| -> Result<f64> {
        let mut vs = variants.clone();
        for net in &mut vs.nets {
            for s in net.sources.iter_mut().filter(|s| s.is_entangled()) {
                s.visibility = v;
            }
        }
        Ok(evaluate_variants(&vs, &clean, FRAC_PI_4)?.value)
    };
    if value_at(1.0)? <= bound {
        return Err(Error::Domain("no violation even without noise".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if value_at(mid)? > bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(VisibilityThreshold { product, closed_form, bisection: 0.5 * (lo + hi), sources: m })
}

/// The settings plan at mixing angle θ and its Born-rule table P(a|x).
pub fn observed_statistics(net: &Network, theta: f64, dense_limit: usize) -> Result<(SettingsPlan, ConditionalDistribution)> {
    let variants = prepare_variants(net)?;
    let plan = build_settings_variants(&variants, theta, None)?;
    let dist = born_distribution(variants.last(), &plan.physical_inputs(&variants), dense_limit)?;
    Ok((plan, dist))
}

/// Per party, the first input measuring Z on every particle.
pub fn all_z_inputs(plan: &SettingsPlan) -> Option<Vec<usize>> {
    plan.inputs
        .iter()
        .map(|list| {
            list.iter().position(|pi| {
                let t = &pi.observable.terms;
                t.len() == 1 && t[0].0 == 1.0 && t[0].1 .0.iter().all(|&l| l == Letter::Z)
            })
        })
        .collect()
}

/// Correlator terms (sign, inputs of A, B, C), inputs zero-based.
pub type Functional = Vec<(f64, Vec<usize>)>;

/// Four inputs for A and C, six for B.
pub fn c1_functional() -> Functional {
    let t = |s: f64, a: usize, b: usize, c: usize| (s, vec![a - 1, b - 1, c - 1]);
    vec![
        t(1.0, 1, 1, 1),
        t(1.0, 2, 1, 1),
        t(1.0, 1, 2, 2),
        t(-1.0, 2, 2, 2),
        t(1.0, 3, 3, 1),
        t(1.0, 3, 4, 1),
        t(1.0, 4, 3, 2),
        t(-1.0, 4, 4, 2),
        t(1.0, 3, 5, 3),
        t(1.0, 3, 5, 4),
        t(1.0, 4, 6, 3),
        t(-1.0, 4, 6, 4),
    ]
}

/// Four inputs per party.
pub fn c2_functional() -> Functional {
    let mut f = c1_functional();
    for (k, b) in [(8, 1), (9, 1), (10, 2), (11, 2)] {
        f[k].1[1] = b - 1;
    }
    f
}

pub fn functional_value(f: &Functional, dist: &ConditionalDistribution) -> Result<f64> {
    let mut s = 0.0;
    for (c, x) in f {
        s += c * correlation_from_distribution(dist, x)?;
    }
    Ok(s)
}

fn check_arity(dist: &ConditionalDistribution, want: &[usize]) -> Result<()> {
    if dist.arities != want {
        return Err(Error::Domain(format!("arity mismatch: table has {:?}, functional needs {want:?}", dist.arities)));
    }
    Ok(())
}

pub fn evaluate_c1(dist: &ConditionalDistribution) -> Result<f64> {
    check_arity(dist, &[4, 6, 4])?;
    functional_value(&c1_functional(), dist)
}

pub fn evaluate_c2(dist: &ConditionalDistribution) -> Result<f64> {
    check_arity(dist, &[4, 4, 4])?;
    functional_value(&c2_functional(), dist)
}

/// The four/six-input functional evaluated through the settings plan of a triangle.
pub fn evaluate_c1_network(net: &Network, theta: f64) -> Result<f64> {
    if net.parties != 3 {
        return Err(Error::Domain("evaluate_c1 needs a three-party network".into()));
    }
    let variants = prepare_variants(net)?;
    let plan = build_settings_variants(&variants, theta, None)?;
    if plan.arities() != [4, 6, 4] {
        return Err(Error::Domain(format!("plan arities {:?} do not match (4, 6, 4)", plan.arities())));
    }
    let mut s = 0.0;
    for i in 0..plan.entries.len() {
        s += ch_term(&variants, &plan, i)?;
    }
    Ok(s)
}

/// 6cosθ + 2sinθ·(s1s2 + s2s3 + s1s3) with s_j = sin2θ_j.
pub fn c2_closed_form(theta: f64, thetas: [f64; 3]) -> f64 {
    6.0 * theta.cos() + 2.0 * theta.sin() * pairwise_sum(thetas)
}

pub fn pairwise_sum(thetas: [f64; 3]) -> f64 {
    let s = thetas.map(|t| (2.0 * t).sin());
    s[0] * s[1] + s[1] * s[2] + s[0] * s[2]
}

fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo) > 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c2_best(s: f64) -> f64 {
    golden_max(|t| Ok(6.0 * t.cos() + 2.0 * t.sin() * s), 0.0, FRAC_PI_2, 1e-12).expect("infallible").1
}

/// Pairwise-sum threshold for the four-input functional, by root finding
/// on its θ-optimized closed form.
pub fn c2_pairwise_threshold() -> f64 {
    bisect(|s| c2_best(s) - biseparable_bound(3), 0.0, 3.0, 1e-13)
}

/// θ3 at which the four-input functional starts to violate when θ1 = θ2 = π/4.
pub fn c2_theta3_boundary() -> f64 {
    let s_star = c2_pairwise_threshold();
    bisect(|t3| pairwise_sum([FRAC_PI_4, FRAC_PI_4, t3]) - s_star, 1e-9, FRAC_PI_4, 1e-13)
}
