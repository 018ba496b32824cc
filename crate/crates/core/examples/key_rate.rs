//! Guessing bound, key rate and monogamy bound from the Bell value.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use netbell::bell;
use netbell::bounds;
use netbell::engine::DEFAULT_DENSE_LIMIT;
use netbell::network::instances;

fn main() -> netbell::Result<()> {
    let (lo, hi) = (bounds::window_lo(), bounds::window_hi());
    for k in 0..=4 {
        let w = lo + (hi - lo) * k as f64 / 4.0;
        println!("varpi {w:.4}: guess <= {:.6}, monogamy D <= {:.6}", bounds::guessing_bound(w)?, bounds::monogamy_bound(3, w)?);
    }
    for v in [1.0, 0.995, 0.99] {
        let net = instances::triangle([FRAC_PI_4; 3], v);
        let varpi = bell::evaluate(&net, FRAC_PI_4)?.value;
        let (plan, dist) = bell::observed_statistics(&net, FRAC_PI_4, DEFAULT_DENSE_LIMIT)?;
        let key = bell::all_z_inputs(&plan).expect("all-Z inputs");
        let r = bounds::key_rate(varpi, &dist, &key)?;
        println!("v = {v}: varpi {varpi:.6}, rate {:.6} (clamped {:.6})", r.raw, r.clamped);
    }
    println!("blind computation, m = 4, m_es = 1e8: {:.6}", bounds::bqc_guess_bound(6.0 * SQRT_2, 4, 1e8)?);
    Ok(())
}
