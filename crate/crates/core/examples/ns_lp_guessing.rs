//! Eavesdropper guessing probability over non-signalling extensions.

use std::f64::consts::FRAC_PI_4;

use netbell::bell;
use netbell::engine::DEFAULT_DENSE_LIMIT;
use netbell::network::instances;
use netbell::nslp::{self, NsLpProblem};

fn main() -> netbell::Result<()> {
    let chsh = NsLpProblem {
        arities: vec![2, 2],
        e_arity: 2,
        u_arity: 1,
        observed: None,
        functional: nslp::chsh_functional(),
        floor: 0.0,
        target_party: 0,
        guess_inputs: None,
    };
    for p in nslp::sweep(&chsh, &[2.0, 2.5, 2.0 * 2f64.sqrt(), 3.5, 4.0])? {
        println!("CHSH >= {:.4}: guess {:.6}", p.floor, p.optimum);
    }

    let (_, dist) = bell::observed_statistics(&instances::triangle_max(), FRAC_PI_4, DEFAULT_DENSE_LIMIT)?;
    let tri = NsLpProblem { arities: dist.arities.clone(), observed: Some(dist), functional: bell::c1_functional(), floor: 7.657, ..chsh };
    let s = nslp::solve(&tri)?;
    println!("triangle statistics: {:?}, guess {:.9}, residual {:.1e}, {} pivots", s.status, s.optimum, s.residual, s.iterations);
    Ok(())
}
