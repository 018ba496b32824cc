//! LOCC primitives on Werner states: entanglement swapping and GHZ reduction.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{pre, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SwapResult {
    /// two-qubit state of the end parties, basis |00⟩,|01⟩,|10⟩,|11⟩
    pub state: Vec<Vec<f64>>,
    pub visibility: f64,
    pub fidelity: f64,
}

fn phi_plus() -> DVector<f64> {
    let h = 0.5f64.sqrt();
    DVector::from_vec(vec![h, 0.0, 0.0, h])
}

/// v|ψ⟩⟨ψ| + (1−v)I/d.
pub fn werner(psi: &DVector<f64>, v: f64) -> DMatrix<f64> {
    let d = psi.len();
    psi * psi.transpose() * v + DMatrix::identity(d, d) * ((1.0 - v) / d as f64)
}

pub fn ghz_vector(k: usize) -> DVector<f64> {
    let mut g = DVector::zeros(1 << k);
    g[0] = 0.5f64.sqrt();
    g[(1 << k) - 1] = 0.5f64.sqrt();
    g
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn check_v(v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return pre(format!("visibility {v} outside (0, 1]"));
    }
    Ok(())
}

/// Bell measurement on the middle pair of two Werner EPR pairs with Pauli
/// correction: the end parties share a Werner state of visibility v1·v2.
pub fn swap_werner(v1: f64, v2: f64) -> Result<SwapResult> {
    check_v(v1)?;
    check_v(v2)?;
    let v = v1 * v2;
    let rho = werner(&phi_plus(), v);
    let fid = (phi_plus().transpose() * &rho * phi_plus())[0];
    Ok(SwapResult { state: rows(&rho), visibility: v, fidelity: fid })
}

/// The printed three-component mixture and its stated fidelity (v1+v2)/2.
pub fn stated_swap_mixture(v1: f64, v2: f64) -> (DMatrix<f64>, f64) {
    let phi = phi_plus();
    let mut m = &phi * phi.transpose() * (v1 * v2) + DMatrix::identity(4, 4) * ((1.0 - v1) * (1.0 - v2) / 4.0);
    let w = (v1 + v2 - 2.0 * v1 * v2) / 2.0;
    m[(0, 0)] += w;
    m[(3, 3)] += w;
    (m, (v1 + v2) / 2.0)
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn pauli(which: char) -> DMatrix<f64> {
    match which {
        'X' => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        'Z' => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        _ => DMatrix::identity(2, 2),
    }
}

/// Dense simulation on qubits (A, B1, B2, C): project (B1, B2) on each
/// Bell state, correct C, and return the outcome-averaged state of (A, C)
/// together with the per-outcome probabilities.
pub fn swap_werner_dense(v1: f64, v2: f64) -> (DMatrix<f64>, Vec<f64>) {
    let rho = kron(&werner(&phi_plus(), v1), &werner(&phi_plus(), v2));
    let h = 0.5f64.sqrt();
    let bells = [
        ([h, 0.0, 0.0, h], 'I'),
        ([h, 0.0, 0.0, -h], 'Z'),
        ([0.0, h, h, 0.0], 'X'),
        ([0.0, h, -h, 0.0], 'Y'),
    ];
    let mut avg = DMatrix::zeros(4, 4);
    let mut probs = Vec::new();
    for (b, corr) in bells {
        // out[(a,c),(a',c')] = Σ b[b1 b2] ρ[(a b1 b2 c),(a' b1' b2' c')] b[b1' b2']
        let mut out = DMatrix::zeros(4, 4);
        for a in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut s = 0.0;
                        for m in 0..4 {
                            for m2 in 0..4 {
                                let r = a << 3 | m << 1 | c;
                                let col = a2 << 3 | m2 << 1 | c2;
                                s += b[m] * rho[(r, col)] * b[m2];
                            }
                        }
                        out[(a << 1 | c, a2 << 1 | c2)] = s;
                    }
                }
            }
        }
        let p = out.trace();
        probs.push(p);
        let u = match corr {
            'Y' => kron(&DMatrix::identity(2, 2), &(pauli('Z') * pauli('X'))),
            c => kron(&DMatrix::identity(2, 2), &pauli(c)),
        };
        avg += &u * out * u.transpose();
    }
    (avg, probs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzWerner {
    pub k: usize,
    pub visibility: f64,
}

/// One party measures in the X basis and announces the result: the others
/// keep a (k−1)-particle GHZ Werner state with the same visibility.
pub fn ghz_reduce_werner(k: usize, v: f64) -> Result<GhzWerner> {
    if k < 3 {
        return pre(format!("GHZ reduction needs k >= 3, got {k}"));
    }
    check_v(v)?;
    Ok(GhzWerner { k: k - 1, visibility: v })
}

/// Dense simulation of the reduction: post-measurement states for both
/// X outcomes (after a Z correction on the − branch), with probabilities.
pub fn ghz_reduce_dense(k: usize, v: f64) -> Vec<(f64, DMatrix<f64>)> {
    let rho = werner(&ghz_vector(k), v);
    let h = 0.5f64.sqrt();
    let d = 1 << (k - 1);
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let m = [h, sign * h];
        let mut r = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += m[a] * rho[(i << 1 | a, j << 1 | b)] * m[b];
                    }
                }
                r[(i, j)] = s;
            }
        }
        let p = r.trace();
        r /= p;
        if sign < 0.0 {
            let mut z = DMatrix::identity(1, 1);
            for q in 0..k - 1 {
                z = kron(&z, &pauli(if q == 0 { 'Z' } else { 'I' }));
            }
            r = &z * r * &z;
        }
        out.push((p, r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_matches_dense_oracle() {
        for &(v1, v2) in &[(1.0, 1.0), (0.9, 0.8), (0.5, 0.3)] {
            let s = swap_werner(v1, v2).unwrap();
            let (avg, probs) = swap_werner_dense(v1, v2);
            for p in probs {
                assert!((p - 0.25).abs() < 1e-12);
            }
            let st = DMatrix::from_fn(4, 4, |i, j| s.state[i][j]);
            assert!((st - avg).abs().max() < 1e-12);
        }
        assert!((swap_werner(1.0, 1.0).unwrap().fidelity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stated_mixture_is_normalized() {
        let (m, f) = stated_swap_mixture(0.9, 0.8);
        assert!((m.trace() - 1.0).abs() < 1e-15);
        assert!((f - 0.85).abs() < 1e-15);
    }

    #[test]
    fn reduction_keeps_visibility() {
        for k in 3..=5 {
            let want = werner(&ghz_vector(k - 1), 0.7);
            for (p, r) in ghz_reduce_dense(k, 0.7) {
                assert!((p - 0.5).abs() < 1e-12);
                assert!((r - &want).abs().max() < 1e-12);
            }
        }
        assert_eq!(ghz_reduce_werner(4, 0.9).unwrap(), GhzWerner { k: 3, visibility: 0.9 });
        assert!(ghz_reduce_werner(2, 0.9).is_err());
    }
}
