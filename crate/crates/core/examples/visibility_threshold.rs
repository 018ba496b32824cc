//! Werner-noise visibility thresholds.

use netbell::bell;
use netbell::network::instances;

fn main() -> netbell::Result<()> {
    for (name, net) in [("triangle", instances::triangle_max()), ("chain of two", instances::chain(2, std::f64::consts::FRAC_PI_4, 1.0))] {
        let t = bell::visibility_threshold(&net)?;
        println!("{name}: product {:.6}, per source {:.6} (bisection {:.6}, {} sources)", t.product, t.closed_form, t.bisection, t.sources);
    }
    Ok(())
}
