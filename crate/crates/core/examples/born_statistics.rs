//! Born-rule statistics of the triangle plan and the four/six-input functional.

use std::f64::consts::FRAC_PI_4;

use netbell::bell;
use netbell::engine::DEFAULT_DENSE_LIMIT;
use netbell::network::instances;

fn main() -> netbell::Result<()> {
    for v in [1.0, 0.98, 0.95] {
        let net = instances::triangle([FRAC_PI_4; 3], v);
        let (plan, dist) = bell::observed_statistics(&net, FRAC_PI_4, DEFAULT_DENSE_LIMIT)?;
        println!(
            "v = {v}: arities {:?}, functional {:.9}, signalling {:.1e}, normalization {:.1e}",
            plan.arities(),
            bell::evaluate_c1(&dist)?,
            dist.signalling(),
            dist.normalization_error()
        );
    }
    Ok(())
}
