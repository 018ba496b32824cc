//! Classical simulation of network correlations with shared randomness and
//! one bit of communication per link.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{pre, Result};

pub type Vec3 = [f64; 3];

const UNIT_TOL: f64 = 1e-9;
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub k: usize,
    pub theta_a: f64,
    pub theta_b: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimResult {
    pub estimate: f64,
    pub target: f64,
    pub stderr: f64,
    pub bits_per_round: u32,
    pub samples: u64,
    /// no Monte Carlo run: some branch correlation exceeds 1 in magnitude
    pub analytic_only: bool,
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sgn(x: f64) -> i64 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Unit vector at angle θ from the z axis in the xz-plane.
pub fn xz(theta: f64) -> Vec3 {
    [theta.sin(), 0.0, theta.cos()]
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// One round of the sphere protocol. Alice outputs sgn(a·λ1) and sends
/// c = sgn(a·λ1)·sgn(a·λ2); Bob outputs sgn(b·(λ1 + cλ2)).
fn singlet_round(a: &Vec3, b: &Vec3, rng: &mut ChaCha8Rng) -> i64 {
    let l1: Vec3 = UnitSphere.sample(rng);
    let l2: Vec3 = UnitSphere.sample(rng);
    let alice = sgn(dot(a, &l1));
    let c = (alice * sgn(dot(a, &l2))) as f64;
    let bob = sgn(dot(b, &[l1[0] + c * l2[0], l1[1] + c * l2[1], l1[2] + c * l2[2]]));
    alice * bob
}

/// Sums ±1 round values in parallel. Integer sums keep the result
/// independent of the thread schedule.
fn run(samples: u64, f: impl Fn(u64) -> i64 + Sync) -> (f64, f64) {
    let chunks = samples.div_ceil(CHUNK);
    let sum: i64 = (0..chunks)
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(samples)).map(&f).sum::<i64>())
        .sum();
    let n = samples as f64;
    let mean = sum as f64 / n;
    // values are ±1, so the sample variance is 1 − mean²
    let var = (1.0 - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn check_unit(v: &Vec3) -> Result<()> {
    if (dot(v, v).sqrt() - 1.0).abs() > UNIT_TOL {
        return pre(format!("{v:?} is not a unit vector"));
    }
    Ok(())
}

pub fn simulate_singlet(a: Vec3, b: Vec3, samples: u64, seed: u64) -> Result<SimResult> {
    check_unit(&a)?;
    check_unit(&b)?;
    if samples == 0 {
        return pre("samples must be positive");
    }
    let (estimate, stderr) = run(samples, |r| singlet_round(&a, &b, &mut round_rng(seed, r)));
    Ok(SimResult { estimate, target: dot(&a, &b), stderr, bits_per_round: 1, samples, analytic_only: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainAlgebra {
    /// 2cosθ_a·cosθ_b and 2sinθ_a·sinθ_b
    pub branches: [f64; 2],
    pub combined: f64,
    pub target: f64,
    pub identity_error: f64,
}

pub fn chain_algebra(theta_a: f64, theta_b: f64) -> ChainAlgebra {
    let branches = [2.0 * theta_a.cos() * theta_b.cos(), 2.0 * theta_a.sin() * theta_b.sin()];
    let combined = 0.5 * (branches[0] + branches[1]);
    let target = (theta_a - theta_b).cos();
    ChainAlgebra { branches, combined, target, identity_error: (combined - target).abs() }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub result: SimResult,
    pub algebra: ChainAlgebra,
}

/// Two equally likely branches with end-to-end correlations given by
/// [`chain_algebra`]. In each branch the first link carries the branch
/// correlation and the remaining links are perfectly correlated, each link
/// an independent singlet simulation; the end outputs are sign products.
pub fn compose_chain(cfg: &SimConfig) -> Result<ChainReport> {
    if cfg.k < 2 {
        return pre(format!("chain needs k >= 2, got {}", cfg.k));
    }
    if cfg.samples == 0 {
        return pre("samples must be positive");
    }
    let algebra = chain_algebra(cfg.theta_a, cfg.theta_b);
    let bits = cfg.k as u32;
    if algebra.branches.iter().any(|t| t.abs() > 1.0) {
        let result = SimResult {
            estimate: algebra.combined,
            target: algebra.target,
            stderr: 0.0,
            bits_per_round: bits,
            samples: 0,
            analytic_only: true,
        };
        return Ok(ChainReport { result, algebra });
    }
    let z = [0.0, 0.0, 1.0];
    let ends = algebra.branches.map(|t| [(1.0 - t * t).max(0.0).sqrt(), 0.0, t]);
    let k = cfg.k;
    let seed = cfg.seed;
    let (estimate, stderr) = run(cfg.samples, |r| {
        let mut rng = round_rng(seed, r);
        let branch = usize::from(rand::Rng::gen::<bool>(&mut rng));
        let mut s = singlet_round(&z, &ends[branch], &mut rng);
        for _ in 1..k {
            s *= singlet_round(&z, &z, &mut rng);
        }
        s
    });
    let result = SimResult { estimate, target: algebra.target, stderr, bits_per_round: bits, samples: cfg.samples, analytic_only: false };
    Ok(ChainReport { result, algebra })
}

#[derive(Clone, Debug, Serialize)]
pub struct GhzAlgebra {
    pub k: usize,
    pub gamma: f64,
    /// 2γ√(1−γ²)·Πcosθ_i + Πsinθ_i
    pub quantum: f64,
    /// 2·2γ√(1−γ²)·Πcosθ_i and 2·Πsinθ_i
    pub branches: [f64; 2],
    pub combined: f64,
    pub identity_error: f64,
    /// whether each branch is a valid ±1 correlation
    pub realizable: [bool; 2],
}

pub fn compose_ghz(k: usize, angles: &[f64], gamma: f64) -> Result<GhzAlgebra> {
    if k < 2 || k % 2 == 1 {
        return pre(format!("GHZ composition is stated for even k >= 2, got {k}"));
    }
    if angles.len() != k {
        return pre(format!("expected {k} angles, got {}", angles.len()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return pre(format!("gamma {gamma} outside (0, 1)"));
    }
    let c = 2.0 * gamma * (1.0 - gamma * gamma).sqrt();
    let pc: f64 = angles.iter().map(|t| t.cos()).product();
    let ps: f64 = angles.iter().map(|t| t.sin()).product();
    let quantum = c * pc + ps;
    let branches = [2.0 * c * pc, 2.0 * ps];
    let combined = 0.5 * (branches[0] + branches[1]);
    Ok(GhzAlgebra {
        k,
        gamma,
        quantum,
        branches,
        combined,
        identity_error: (combined - quantum).abs(),
        realizable: branches.map(|b| b.abs() <= 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn singlet_targets() {
        let r = simulate_singlet(xz(0.3), xz(1.1), 200_000, 7).unwrap();
        assert!((r.target - 0.8f64.cos()).abs() < 1e-15);
        assert!((r.estimate - r.target).abs() <= 4.0 * r.stderr);
        let r = simulate_singlet(xz(0.4), xz(0.4), 1000, 1).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert!(simulate_singlet([1.0, 1.0, 0.0], xz(0.0), 10, 1).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let a = simulate_singlet(xz(0.2), xz(2.0), 50_000, 3).unwrap();
        let b = simulate_singlet(xz(0.2), xz(2.0), 50_000, 3).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn chain_regimes() {
        let cfg = SimConfig { k: 3, theta_a: FRAC_PI_3, theta_b: FRAC_PI_6, samples: 100_000, seed: 11 };
        let r = compose_chain(&cfg).unwrap();
        assert!(!r.result.analytic_only);
        assert!((r.result.target - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((r.result.estimate - r.result.target).abs() <= 4.0 * r.result.stderr);
        let cfg = SimConfig { theta_a: 0.0, theta_b: 0.0, ..cfg };
        assert!(compose_chain(&cfg).unwrap().result.analytic_only);
    }

    #[test]
    fn ghz_algebra() {
        let g = compose_ghz(2, &[FRAC_PI_4; 2], 0.5f64.sqrt()).unwrap();
        assert!((g.quantum - 1.0).abs() < 1e-15);
        let g = compose_ghz(4, &[FRAC_PI_2, 0.3, 0.2, 0.1], 0.3).unwrap();
        assert!(g.branches[0].abs() < 1e-15);
        assert!(compose_ghz(3, &[0.1; 3], 0.5).is_err());
    }
}
