//! Violation thresholds for partially entangled sources.

use std::f64::consts::{FRAC_PI_4, PI};

use netbell::bell;

fn main() -> netbell::Result<()> {
    for n in 3..=6 {
        println!("n = {n}: violation needs prod sin 2theta_j > {:.6}", bell::violation_threshold(n)?);
    }
    println!("four-input functional: pairwise sum threshold {:.6}", bell::c2_pairwise_threshold());
    println!("with theta1 = theta2 = pi/4 it violates for theta3 > {:.5} pi", bell::c2_theta3_boundary() / PI);
    let s = bell::pairwise_sum([FRAC_PI_4, FRAC_PI_4, 0.5]);
    println!("pairwise sum at theta3 = 0.5: {s:.6}, closed form at theta = 0.3: {:.6}", bell::c2_closed_form(0.3, [FRAC_PI_4, FRAC_PI_4, 0.5]));
    Ok(())
}
