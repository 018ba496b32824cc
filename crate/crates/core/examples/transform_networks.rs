//! Odd-parity transformation of cyclic networks and its trace.

use netbell::network::instances;
use netbell::transform;

fn main() -> netbell::Result<()> {
    for (name, net) in [("square cycle", instances::square_cycle()), ("two cycles", instances::two_cycle())] {
        let (out, trace) = transform::to_odd_parity(&net)?;
        println!("{name}: cycles {:?}", trace.cycles);
        for s in &trace.steps {
            println!("  source {} {} adds {:?}", s.source, s.action, s.added);
        }
        println!("  particle counts {:?}", out.particle_counts());
    }
    let v = transform::prepare_variants(&instances::triangle_max())?;
    for (i, n) in v.nets.iter().enumerate() {
        println!("triangle variant {i}: counts {:?}, dropped {:?}", n.particle_counts(), v.traces[i].dropped);
    }
    Ok(())
}
