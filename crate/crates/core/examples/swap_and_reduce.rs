//! Entanglement swapping of Werner pairs and GHZ reduction, against dense simulation.

use netbell::locc;

fn main() -> netbell::Result<()> {
    for (v1, v2) in [(1.0, 1.0), (0.9, 0.8), (0.6, 0.5)] {
        let s = locc::swap_werner(v1, v2)?;
        let (dense, probs) = locc::swap_werner_dense(v1, v2);
        let h = 0.5;
        let f = h * (dense[(0, 0)] + dense[(0, 3)] + dense[(3, 0)] + dense[(3, 3)]);
        let (_, stated) = locc::stated_swap_mixture(v1, v2);
        println!("v = ({v1}, {v2}): visibility {:.4}, fidelity {:.6}, dense {f:.6}, (v1+v2)/2 = {stated:.4}, outcomes {probs:.3?}", s.visibility, s.fidelity);
    }
    for k in 3..=5 {
        let r = locc::ghz_reduce_werner(k, 0.9)?;
        let dense = locc::ghz_reduce_dense(k, 0.9);
        println!("GHZ{k} -> GHZ{} at v = {}, outcome probabilities {:?}", r.k, r.visibility, dense.iter().map(|d| d.0).collect::<Vec<_>>());
    }
    Ok(())
}
