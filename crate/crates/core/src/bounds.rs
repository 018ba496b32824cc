//! Closed-form device-independent bounds and the operator SOS certificate.

use std::f64::consts::SQRT_2;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::ConditionalDistribution;
use crate::error::{pre, Error, Result};

type C = Complex<f64>;
type CMat = DMatrix<C>;

/// Lower end of the certified window, 4√2 + 2.
pub fn window_lo() -> f64 {
    4.0 * SQRT_2 + 2.0
}

/// Upper end of the certified window, 6√2.
pub fn window_hi() -> f64 {
    6.0 * SQRT_2
}

const WINDOW_TOL: f64 = 1e-12;

fn check_window(varpi: f64) -> Result<()> {
    if !(varpi >= window_lo() - WINDOW_TOL && varpi <= window_hi() + WINDOW_TOL) {
        return Err(Error::Domain(format!(
            "varpi {varpi} outside the certified window [{}, {}]",
            window_lo(),
            window_hi()
        )));
    }
    Ok(())
}

/// α = (2ⁿ − 1)/n
pub fn monogamy_alpha(n: usize) -> f64 {
    ((1u64 << n) as f64 - 1.0) / n as f64
}

/// 2n − (ϖ − 2√2(α − ⌊α⌋))/(2⌊α⌋), clamped into [0, 2n].
pub fn monogamy_bound(n: usize, varpi: f64) -> Result<f64> {
    if n < 3 {
        return pre(format!("monogamy bound needs n >= 3, got {n}"));
    }
    let a = monogamy_alpha(n);
    let fl = a.floor();
    let raw = 2.0 * n as f64 - (varpi - 2.0 * SQRT_2 * (a - fl)) / (2.0 * fl);
    Ok(raw.clamp(0.0, 2.0 * n as f64))
}

/// Chained quantity of parties (i, j) on inputs {0, 1}, other parties at input 0:
/// P(a_i = a_j | 0, 1) + P(a_i ≠ a_j | 0, 0) + P(a_i ≠ a_j | 1, 0) + P(a_i ≠ a_j | 1, 1).
pub fn chained_i2(dist: &ConditionalDistribution, i: usize, j: usize) -> Result<f64> {
    let n = dist.n();
    if i >= n || j >= n || i == j || dist.arities[i] < 2 || dist.arities[j] < 2 {
        return Err(Error::Domain(format!("chained I2 needs two inputs for distinct parties {i}, {j}")));
    }
    let pair = |xi: usize, xj: usize| -> Result<(f64, f64)> {
        let mut x = vec![0; n];
        x[i] = xi;
        x[j] = xj;
        let m = dist.marginal(&[i, j], &x)?;
        Ok((m[0] + m[3], m[1] + m[2]))
    };
    Ok(pair(0, 1)?.0 + pair(0, 0)?.1 + pair(1, 0)?.1 + pair(1, 1)?.1)
}

/// ½ + √(72 − ϖ²)/12 on [4√2 + 2, 6√2].
pub fn guessing_bound(varpi: f64) -> Result<f64> {
    check_window(varpi)?;
    Ok((0.5 + (72.0 - varpi * varpi).max(0.0).sqrt() / 12.0).clamp(0.5, 1.0))
}

/// −Σ p(a,b,…) log₂ p(a|b,…) for party 0 given the rest, from one input slice.
pub fn conditional_entropy_first(joint: &[f64]) -> f64 {
    let half = joint.len() / 2;
    let mut h = 0.0;
    for rest in 0..half {
        let (p0, p1) = (joint[rest], joint[rest + half]);
        let m = p0 + p1;
        for p in [p0, p1] {
            if p > 0.0 {
                h -= p * (p / m).log2();
            }
        }
    }
    h
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyRate {
    pub raw: f64,
    pub clamped: f64,
    pub guessing: f64,
    pub conditional_entropy: f64,
}

/// R ≥ −log₂ P_guess(ϖ) − H(a|b,c), from the key-input slice of `dist`.
pub fn key_rate(varpi: f64, dist: &ConditionalDistribution, key_inputs: &[usize]) -> Result<KeyRate> {
    let g = guessing_bound(varpi)?;
    let h = conditional_entropy_first(dist.slice(key_inputs)?);
    let raw = -g.log2() - h;
    Ok(KeyRate { raw, clamped: raw.max(0.0), guessing: g, conditional_entropy: h })
}

/// (P_guess(ϖ) + m_es^{−1/4})^m, clamped to ≤ 1.
pub fn bqc_guess_bound(varpi: f64, m: u32, m_es: f64) -> Result<f64> {
    if m < 1 || m_es < 1.0 {
        return pre("bqc bound needs m >= 1 and m_es >= 1");
    }
    let base = guessing_bound(varpi)? + m_es.powf(-0.25);
    Ok(base.min(1.0).powi(m as i32).min(1.0))
}

/// ½ Σ |p − q|
pub fn variation_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Domain(format!("support mismatch: {} vs {}", p.len(), q.len())));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[derive(Clone, Debug, Serialize)]
pub struct SosReport {
    pub varpi: f64,
    pub trials: usize,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
}

fn c(x: f64) -> C {
    Complex::new(x, 0.0)
}

/// n·σ for a random unit Bloch vector: a ±1-spectrum qubit observable.
fn random_dichotomic(rng: &mut ChaCha8Rng) -> CMat {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    CMat::from_row_slice(2, 2, &[c(z), Complex::new(x, -y), Complex::new(x, y), c(-z)])
}

fn on_register(op: &CMat, reg: usize) -> CMat {
    let id = CMat::identity(2, 2);
    let mut out = CMat::identity(1, 1);
    for r in 0..3 {
        out = out.kronecker(if r == reg { op } else { &id });
    }
    out
}

/// The four operators of the certificate for γ = 3/√(72 − ϖ²).
pub fn sos_operators(varpi: f64, a: [&CMat; 2], d: [&CMat; 2]) -> [CMat; 4] {
    let r = (72.0 - varpi * varpi).sqrt();
    let sg = (3.0 / r).sqrt();
    let id = CMat::identity(8, 8);
    let q = 36.0 - varpi * varpi;
    let (a0, a1, d0, d1) = (a[0], a[1], d[0], d[1]);
    let a0d0 = a0 * d0;
    let a0d1 = a0 * d1;
    let a1d0 = a1 * d0;
    let a1d1 = a1 * d1;
    let l1 = a1 * c(-sg / 2.0) + (d0 - d1) * c(varpi * sg / 24.0) + (&a1d0 + &a1d1) * c(varpi / (48.0 * sg));
    let l2 = &id * c(varpi * sg / 12.0) - a0 * c(varpi / (24.0 * sg)) + (d0 + d1) * c(1.0 / (8.0 * sg))
        - (&a0d0 + &a0d1) * c(sg / 4.0)
        + (&a1d0 - &a1d1) * c(q * sg / 144.0);
    let l3 = (&a0d0 - &a0d1) * c(sg / 4.0) - (d0 - d1) * c(1.0 / (8.0 * sg)) - (&a1d0 + &a1d1) * c(q * sg / 144.0);
    let l4 = &id * c(1.0 / (4.0 * sg)) - a0 * c(q * sg / 72.0) - (d0 + d1) * c(sg * varpi / 24.0)
        - (&a1d0 - &a1d1) * c(varpi / (48.0 * sg));
    [l1, l2, l3, l4]
}

/// 6/r − ½A₀ − (ϖ/(4r))(A₀D₀ + A₀D₁ + A₁D₀ − A₁D₁), r = √(72 − ϖ²).
pub fn sos_target(varpi: f64, a: [&CMat; 2], d: [&CMat; 2]) -> CMat {
    let r = (72.0 - varpi * varpi).sqrt();
    let w = a[0] * d[0] + a[0] * d[1] + a[1] * d[0] - a[1] * d[1];
    CMat::identity(8, 8) * c(6.0 / r) - a[0] * c(0.5) - w * c(varpi / (4.0 * r))
}

/// Checks Σ L†L = target on random commuting dichotomic observables
/// (A on register 0, B on 1, C on 2, D_y = B_y C_y).
pub fn verify_sos_certificate(varpi: f64, trials: usize, seed: u64) -> Result<SosReport> {
    if !(varpi >= window_lo() - WINDOW_TOL && varpi < window_hi()) {
        return pre(format!("SOS certificate needs varpi in [4sqrt2+2, 6sqrt2), got {varpi}"));
    }
    let per: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let _: f64 = rng.gen();
            let mut obs = |reg| on_register(&random_dichotomic(&mut rng), reg);
            let (a0, a1, b0, b1, c0, c1) = (obs(0), obs(0), obs(1), obs(1), obs(2), obs(2));
            let (d0, d1) = (&b0 * &c0, &b1 * &c1);
            let ls = sos_operators(varpi, [&a0, &a1], [&d0, &d1]);
            let lhs = ls.iter().fold(CMat::zeros(8, 8), |acc, l| acc + l.adjoint() * l);
            let rhs = sos_target(varpi, [&a0, &a1], [&d0, &d1]);
            let res = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let herm = (&rhs + rhs.adjoint()) * c(0.5);
            let ev = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            (res, ev)
        })
        .collect();
    let max_residual = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let min_eigenvalue = per.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(SosReport { varpi, trials, max_residual, min_eigenvalue })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monogamy_values() {
        let v = monogamy_bound(3, 6.0 * SQRT_2).unwrap();
        assert!((v - (6.0 - (6.0 * SQRT_2 - 2.0 * SQRT_2 / 3.0) / 4.0)).abs() < 1e-12);
        assert_eq!(monogamy_bound(3, 0.0).unwrap(), 6.0);
        assert!(monogamy_bound(2, 1.0).is_err());
    }

    #[test]
    fn guessing_endpoints() {
        assert_eq!(guessing_bound(6.0 * SQRT_2).unwrap(), 0.5);
        assert!((guessing_bound(4.0 * SQRT_2 + 2.0).unwrap() - 0.80474).abs() < 1e-4);
        assert!(guessing_bound(7.0).is_err());
    }

    #[test]
    fn variation() {
        assert_eq!(variation_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(variation_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((variation_distance(&[0.5, 0.5], &[0.75, 0.25]).unwrap() - 0.25).abs() < 1e-15);
        assert!(variation_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn bqc() {
        let b = bqc_guess_bound(6.0 * SQRT_2, 10, f64::INFINITY).unwrap();
        assert!((b - 0.5f64.powi(10)).abs() < 1e-15);
        assert_eq!(bqc_guess_bound(6.0 * SQRT_2, 1, 16.0).unwrap(), 1.0);
    }

    #[test]
    fn sos_identity_holds() {
        let r = verify_sos_certificate(7.8, 10, 1).unwrap();
        assert!(r.max_residual < 1e-10, "{r:?}");
        assert!(r.min_eigenvalue > -1e-9);
        assert!(verify_sos_certificate(6.0 * SQRT_2, 1, 1).is_err());
    }

    #[test]
    fn entropy_of_uniform_bit() {
        assert!((conditional_entropy_first(&[0.25; 4]) - 1.0).abs() < 1e-15);
        assert_eq!(conditional_entropy_first(&[0.5, 0.0, 0.0, 0.5]), 0.0);
    }
}
