//! Measurement settings per bipartition for the triangle.

use std::f64::consts::FRAC_PI_4;

use netbell::network::instances;
use netbell::observables::{build_settings_variants, Role};
use netbell::transform::prepare_variants;

fn main() -> netbell::Result<()> {
    let v = prepare_variants(&instances::triangle_max())?;
    let plan = build_settings_variants(&v, FRAC_PI_4, None)?;
    println!("inputs per party {:?}", plan.arities());
    for (p, list) in plan.inputs.iter().enumerate() {
        for (k, pi) in list.iter().enumerate() {
            let terms: Vec<String> = pi.observable.terms.iter().map(|(c, w)| format!("{c:+.4}*{w}")).collect();
            println!("party {p} input {k} (variant {}): {}", pi.variant, terms.join(" "));
        }
    }
    for e in &plan.entries {
        println!("I = {:?}: M_I {:?}, M_Ibar {:?}", e.bipartition, e.role(Role::M), e.role(Role::MBar));
    }
    Ok(())
}
